"""Decay-law fits and regime detection for observable time series.

All fits are unweighted linear least squares in log space (straight lines on
semilog or log-log axes).  Regime detection scans candidate breakpoints on
the sample grid, using prefix sums so each candidate segmentation costs O(1).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from itertools import combinations

import numpy as np

from .errors import FitDomainError

MIN_POINTS = 8          # fixed-window fits
MIN_SEGMENT_SAMPLES = 10
SMOOTH_WIDTH = 5        # centered moving average used before segmentation
IMPROVEMENT = 0.05      # extra segment must cut total sse by this fraction
SSE_FLOOR = 1e-10       # sse gains below this are prefix-sum round-off
TAIL_WINDOW = 15        # samples per local-variance window in tail trimming
TAIL_REL_VAR = 0.1


class FitModel(Enum):
    EXPONENTIAL = "exponential"
    POWER_LAW = "power_law"
    QUADRATIC = "quadratic"


class ScalingModel(Enum):
    TWO_POWER_LAWS = "two_power_laws"
    QUADRATIC = "quadratic"


@dataclass(frozen=True)
class FitResult:
    """One fitted law on one window.

    exponent holds alpha for y = prefactor * exp(-alpha t), beta for
    y = prefactor * t^(-beta), and the leading coefficient for a quadratic
    (full coefficient triple in coefficients).  For exponent-vs-N scaling
    fits the power law grows, alpha ~ N^gamma, and exponent holds +gamma.
    sse is in the fit's own (log or raw) space.
    """

    model: FitModel
    exponent: float
    prefactor: float
    window: tuple[float, float]
    sse: float
    n_points: int
    coefficients: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if not self.window[0] < self.window[1]:
            raise FitDomainError(f"degenerate fit window {self.window}")
        if self.sse < 0:
            raise FitDomainError(f"negative sse {self.sse}")


@dataclass(frozen=True)
class RegimeSegmentation:
    """Breakpoints (strictly increasing interior times) and per-segment fits.
    multi_regime is False when no added segment cut total sse by >= 5%."""

    breakpoints: np.ndarray
    segments: list[FitResult]
    multi_regime: bool

    @property
    def total_sse(self) -> float:
        return float(sum(s.sse for s in self.segments))


def _window_mask(times: np.ndarray, window: tuple[float, float] | None
                 ) -> np.ndarray:
    if window is None:
        return np.ones(len(times), dtype=bool)
    lo, hi = window
    if not lo < hi:
        raise FitDomainError(f"empty fit window ({lo}, {hi})")
    return (times >= lo) & (times <= hi)


def _line_fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """Least-squares line y = a x + b; returns (a, b, sse)."""
    n = len(x)
    vxx = np.sum(x * x) - np.sum(x) ** 2 / n
    vxy = np.sum(x * y) - np.sum(x) * np.sum(y) / n
    vyy = np.sum(y * y) - np.sum(y) ** 2 / n
    slope = vxy / vxx
    intercept = (np.sum(y) - slope * np.sum(x)) / n
    return float(slope), float(intercept), float(max(vyy - vxy**2 / vxx, 0.0))


def fit_exponential(times: np.ndarray, values: np.ndarray,
                    window: tuple[float, float] | None = None) -> FitResult:
    """Fit y = prefactor * exp(-alpha t) by least squares on ln y vs t."""
    m = _window_mask(times, window)
    t, y = np.asarray(times, float)[m], np.asarray(values, float)[m]
    if len(t) < MIN_POINTS:
        raise FitDomainError(f"{len(t)} points in window, need >= {MIN_POINTS}")
    if np.any(y <= 0):
        raise FitDomainError("exponential fit requires positive values")
    slope, intercept, sse = _line_fit(t, np.log(y))
    return FitResult(model=FitModel.EXPONENTIAL, exponent=-slope,
                     prefactor=float(np.exp(intercept)),
                     window=(float(t[0]), float(t[-1])), sse=sse,
                     n_points=len(t))


def fit_powerlaw(times: np.ndarray, values: np.ndarray,
                 window: tuple[float, float] | None = None) -> FitResult:
    """Fit y = prefactor * t^(-beta) by least squares on ln y vs ln t."""
    m = _window_mask(times, window)
    t, y = np.asarray(times, float)[m], np.asarray(values, float)[m]
    if len(t) < MIN_POINTS:
        raise FitDomainError(f"{len(t)} points in window, need >= {MIN_POINTS}")
    if np.any(y <= 0) or np.any(t <= 0):
        raise FitDomainError("power-law fit requires positive t and values")
    slope, intercept, sse = _line_fit(np.log(t), np.log(y))
    return FitResult(model=FitModel.POWER_LAW, exponent=-slope,
                     prefactor=float(np.exp(intercept)),
                     window=(float(t[0]), float(t[-1])), sse=sse,
                     n_points=len(t))


def _smooth(y: np.ndarray, width: int = SMOOTH_WIDTH) -> np.ndarray:
    kernel = np.ones(width)
    return np.convolve(y, kernel, mode="same") / \
        np.convolve(np.ones_like(y), kernel, mode="same")


def _trim_fluctuating_tail(values: np.ndarray) -> int:
    """Index one past the usable data: trailing samples whose local relative
    variance (var/mean^2 over TAIL_WINDOW samples) stays >= TAIL_REL_VAR are
    dropped.  Returns len(values) when the tail is quiet."""
    n = len(values)
    if n < 2 * TAIL_WINDOW:
        return n
    end = n
    while end > TAIL_WINDOW:
        w = values[end - TAIL_WINDOW:end]
        mean = np.mean(w)
        if mean == 0:
            end -= 1
            continue
        if np.var(w) / mean**2 < TAIL_REL_VAR:
            break
        end -= 1
    return end


class _SegmentCost:
    """O(1) per-window line-fit sse via prefix sums, for one model's (x, y).
    Windows starting before min_start cost infinity (used to keep the t=0
    sample out of power-law segments, where x = ln t is undefined)."""

    def __init__(self, x: np.ndarray, y: np.ndarray, min_start: int = 0):
        z = np.zeros(1)
        self.sx = np.concatenate([z, np.cumsum(x)])
        self.sy = np.concatenate([z, np.cumsum(y)])
        self.sxx = np.concatenate([z, np.cumsum(x * x)])
        self.sxy = np.concatenate([z, np.cumsum(x * y)])
        self.syy = np.concatenate([z, np.cumsum(y * y)])
        self.min_start = min_start

    def sse(self, i, j):
        """Residual sse of the line fit over sample slice [i, j); i and j may
        be arrays of equal shape."""
        i = np.maximum(i, self.min_start)
        n = j - i
        sx = self.sx[j] - self.sx[i]
        sy = self.sy[j] - self.sy[i]
        vxx = (self.sxx[j] - self.sxx[i]) - sx * sx / n
        vxy = (self.sxy[j] - self.sxy[i]) - sx * sy / n
        vyy = (self.syy[j] - self.syy[i]) - sy * sy / n
        with np.errstate(divide="ignore", invalid="ignore"):
            out = vyy - np.where(vxx > 0, vxy * vxy / np.where(vxx > 0, vxx, 1.0), 0.0)
        return np.maximum(out, 0.0)


def _subsequences(seq: tuple, k: int):
    """All order-preserving length-k subsequences, deduplicated."""
    return sorted(set(tuple(seq[i] for i in idx)
                      for idx in combinations(range(len(seq)), k)),
                  key=lambda s: [m.value for m in s])


def _fit_segment(model: FitModel, t: np.ndarray, y: np.ndarray) -> FitResult:
    if model is FitModel.EXPONENTIAL:
        return fit_exponential(t, y)
    keep = t > 0
    return fit_powerlaw(t[keep], y[keep])


def detect_regimes(times: np.ndarray, values: np.ndarray,
                   max_segments: int = 2,
                   model_sequence: tuple[FitModel, ...] | None = None
                   ) -> RegimeSegmentation:
    """Best piecewise decay-law description of a positive series.

    model_sequence gives the models of the maximal segmentation in time
    order (default: exponentials followed by one power law); candidates with
    fewer segments use its order-preserving subsequences.  The series is
    smoothed by a 5-sample centered moving average (half-width edge samples
    dropped: the truncated windows there bias curved data) and its
    fluctuating tail trimmed before scanning; segments need >= 10 samples;
    an extra segment is accepted only if it cuts total sse by >= 5% and by
    more than round-off (multi_regime flags this).
    """
    if not 1 <= max_segments <= 3:
        raise FitDomainError(f"max_segments must be 1..3, got {max_segments}")
    if model_sequence is None:
        model_sequence = (FitModel.EXPONENTIAL,) * (max_segments - 1) + \
            (FitModel.POWER_LAW,)
    if len(model_sequence) != max_segments:
        raise FitDomainError("model_sequence length must equal max_segments")
    if FitModel.QUADRATIC in model_sequence:
        raise FitDomainError("quadratic is not a time-decay model")
    t = np.asarray(times, float)
    y = np.asarray(values, float)
    if np.any(y <= 0):
        raise FitDomainError("regime detection requires positive values")
    y = _smooth(y)
    half = SMOOTH_WIDTH // 2
    t, y = t[half:len(y) - half], y[half:len(y) - half]
    end = _trim_fluctuating_tail(y)
    t, y = t[:end], y[:end]
    if len(t) < MIN_SEGMENT_SAMPLES:
        raise FitDomainError("series too short after smoothing and tail trimming")

    ly = np.log(y)
    costs = {FitModel.EXPONENTIAL: _SegmentCost(t, ly)}
    if FitModel.POWER_LAW in model_sequence:
        lt = np.log(np.where(t > 0, t, 1.0))
        costs[FitModel.POWER_LAW] = _SegmentCost(
            lt, ly, min_start=int(np.searchsorted(t, 0.0, side="right")))

    n = len(t)
    best: dict[int, tuple[float, tuple[int, ...], tuple[FitModel, ...]]] = {}
    for k in range(1, max_segments + 1):
        if n < k * MIN_SEGMENT_SAMPLES:
            break
        for models in _subsequences(model_sequence, k):
            found = _scan(costs, models, n)
            if found is None:
                continue
            sse, cuts = found
            if k not in best or sse < best[k][0]:
                best[k] = (sse, cuts, models)

    if 1 not in best:
        raise FitDomainError("no admissible single-segment fit")
    chosen_k = 1
    for k in sorted(best):
        if k == 1:
            continue
        gain = best[chosen_k][0] - best[k][0]
        if gain >= IMPROVEMENT * best[chosen_k][0] and gain > SSE_FLOOR:
            chosen_k = k
    sse, cuts, models = best[chosen_k]
    bounds = (0,) + cuts + (n,)
    segments = [_fit_segment(models[i], t[bounds[i]:bounds[i + 1]],
                             y[bounds[i]:bounds[i + 1]])
                for i in range(chosen_k)]
    return RegimeSegmentation(
        breakpoints=np.array([t[c] for c in cuts]),
        segments=segments, multi_regime=chosen_k > 1)


def _scan(costs: dict, models: tuple[FitModel, ...], n: int):
    """Minimum total sse over breakpoint placements for a fixed model order.
    Returns (sse, interior cut indices) or None if no placement is valid."""
    k = len(models)
    m = MIN_SEGMENT_SAMPLES
    if k == 1:
        s = float(costs[models[0]].sse(0, n))
        return (s, ()) if np.isfinite(s) else None
    if k == 2:
        cuts = np.arange(m, n - m + 1)
        total = costs[models[0]].sse(0, cuts) + costs[models[1]].sse(cuts, n)
        i = int(np.argmin(total))
        return (float(total[i]), (int(cuts[i]),)) if np.isfinite(total[i]) else None
    # k == 3: vectorize the inner breakpoint for each outer one
    best_sse, best_cuts = np.inf, None
    first = costs[models[0]]
    second = costs[models[1]]
    third = costs[models[2]]
    for c1 in range(m, n - 2 * m + 1):
        c2 = np.arange(c1 + m, n - m + 1)
        total = float(first.sse(0, c1)) + second.sse(c1, c2) + third.sse(c2, n)
        i = int(np.argmin(total))
        if total[i] < best_sse:
            best_sse, best_cuts = float(total[i]), (c1, int(c2[i]))
    return (best_sse, best_cuts) if np.isfinite(best_sse) else None


def fit_exponent_scaling(n_values: np.ndarray, exponents: np.ndarray,
                         model: ScalingModel) -> list[FitResult]:
    """Fit decay-exponent-vs-bath-size scaling.

    TwoPowerLaws: alpha ~ N^gamma on log-log with a scanned split point,
    at least two points per side; returns [small-N fit, large-N fit] with
    exponent = +gamma.  Quadratic: ordinary least squares on
    alpha = a N^2 + b N + c (raw space); returns one result with
    coefficients (a, b, c).
    """
    n = np.asarray(n_values, float)
    a = np.asarray(exponents, float)
    if len(n) != len(a):
        raise FitDomainError("mismatched point arrays")
    order = np.argsort(n)
    n, a = n[order], a[order]
    if len(n) < 4:
        raise FitDomainError(f"need >= 4 points, got {len(n)}")
    if model is ScalingModel.QUADRATIC:
        coeffs = np.polyfit(n, a, 2)
        resid = a - np.polyval(coeffs, n)
        return [FitResult(model=FitModel.QUADRATIC,
                          exponent=float(coeffs[0]),
                          prefactor=float(coeffs[2]),
                          window=(float(n[0]), float(n[-1])),
                          sse=float(np.sum(resid**2)), n_points=len(n),
                          coefficients=tuple(float(c) for c in coeffs))]
    if np.any(n <= 0) or np.any(a <= 0):
        raise FitDomainError("log-log scaling fit requires positive data")
    ln_n, ln_a = np.log(n), np.log(a)
    best = None
    for split in range(2, len(n) - 1):
        s1 = _line_fit(ln_n[:split], ln_a[:split])
        s2 = _line_fit(ln_n[split:], ln_a[split:])
        total = s1[2] + s2[2]
        if best is None or total < best[0]:
            best = (total, split, s1, s2)
    if best is None:
        raise FitDomainError("no valid split with >= 2 points per side")
    _, split, s1, s2 = best
    def result(seg, lo, hi, count):
        slope, intercept, sse = seg
        return FitResult(model=FitModel.POWER_LAW, exponent=slope,
                         prefactor=float(np.exp(intercept)),
                         window=(float(lo), float(hi)), sse=sse,
                         n_points=count)
    return [result(s1, n[0], n[split - 1], split),
            result(s2, n[split], n[-1], len(n) - split)]


def first_crossing(times: np.ndarray, values: np.ndarray,
                   level: float) -> float | None:
    """First time the series reaches the level, linearly interpolated between
    samples; None if it never does."""
    v = np.asarray(values, float) - level
    if v[0] == 0.0:
        return float(times[0])
    sign_change = np.nonzero(v[:-1] * v[1:] <= 0)[0]
    if sign_change.size == 0:
        return None
    i = int(sign_change[0])
    if v[i + 1] == v[i]:
        return float(times[i])
    frac = -v[i] / (v[i + 1] - v[i])
    return float(times[i] + frac * (times[i + 1] - times[i]))
