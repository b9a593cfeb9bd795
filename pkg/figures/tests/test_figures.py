import os
import shutil
import subprocess
import sys

import numpy as np
import pytest

from qsdfigures import FIGURES, SchemaError, build, read_table
from qsdfigures.figures import PURITY_FLOOR
from qsdfigures.main import render, run_all, run_one

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"
SCRIPTS_DIR = os.path.join(os.path.dirname(__file__), os.pardir)


def test_registry_names_and_files():
    assert sorted(FIGURES) == [f"fig{i:02d}" for i in range(1, 14)]
    filenames = [f for _, f in FIGURES.values()]
    assert len(set(filenames)) == 13
    assert all(f.endswith(".png") for f in filenames)


@pytest.mark.parametrize("name", sorted(FIGURES))
def test_every_figure_renders_a_png(name, dataset, tmp_path):
    path = render(name, dataset, str(tmp_path))
    assert os.path.basename(path) == FIGURES[name][1]
    with open(path, "rb") as fh:
        head = fh.read(8)
    assert head == PNG_MAGIC
    assert os.path.getsize(path) > 1000


@pytest.mark.parametrize("name", ["fig06", "fig08"])
def test_rerender_is_byte_identical(name, dataset, tmp_path):
    a = render(name, dataset, str(tmp_path / "a"))
    b = render(name, dataset, str(tmp_path / "b"))
    with open(a, "rb") as fh:
        first = fh.read()
    with open(b, "rb") as fh:
        second = fh.read()
    assert first == second


@pytest.mark.parametrize("name", ["fig03", "fig05", "fig06", "fig12"])
def test_decay_figures_are_semilog(name, dataset):
    ax = build(name, dataset).axes[0]
    assert ax.get_yscale() == "log"
    assert ax.get_xscale() == "linear"


@pytest.mark.parametrize("name", ["fig09", "fig10", "fig13"])
def test_scaling_figures_are_loglog(name, dataset):
    ax = build(name, dataset).axes[0]
    assert ax.get_xscale() == "log"
    assert ax.get_yscale() == "log"


def test_revival_figure_overlays_exact_reference(dataset):
    fig = build("fig01", dataset)
    main = fig.axes[0]
    assert main.get_xscale() == "linear" and main.get_yscale() == "linear"
    assert len(main.lines) >= 2        # ensemble curve plus exact reference
    assert len(main.child_axes) == 1   # position trace lives in an inset
    assert len(main.child_axes[0].lines) == 2


def test_purity_figure_marks_the_floor(dataset):
    ax = build("fig07", dataset).axes[0]
    floors = [ln for ln in ax.lines
              if np.allclose(ln.get_ydata(), PURITY_FLOOR, atol=1e-12)]
    assert floors, "no horizontal line at 1/15"


def test_phase_grid_is_two_by_four(dataset):
    fig = build("fig08", dataset)
    assert len(fig.axes) == 8
    titles = [ax.get_title() for ax in fig.axes]
    assert titles == [f"N = {n}" for n in (0, 1, 10, 20, 50, 100, 500, 1000)]


def test_alpha_scaling_draws_powerlaw_guides(dataset):
    ax = build("fig09", dataset).axes[0]
    guides = [ln for ln in ax.lines
              if ln.get_label().startswith(r"$\propto")]
    assert len(guides) == 2


def test_well_figure_draws_every_level(dataset):
    ax = build("fig11", dataset).axes[0]
    assert len(ax.collections) == 38   # one hlines call per bound state
    assert len(ax.lines) == 1          # the potential itself


def test_fit_overlays_follow_segment_windows(dataset):
    ax = build("fig03", dataset).axes[0]
    dashed = [ln for ln in ax.lines if ln.get_label() == "_fit"]
    assert len(dashed) == 2
    exp_seg, pow_seg = dashed
    assert exp_seg.get_xdata()[0] == pytest.approx(0.0)
    assert exp_seg.get_xdata()[-1] == pytest.approx(120.0)
    assert pow_seg.get_xdata()[-1] == pytest.approx(200.0)
    # exponential segment starts at its prefactor
    assert exp_seg.get_ydata()[0] == pytest.approx(7.5)


def test_missing_column_is_reported_by_name(dataset, tmp_path):
    broken = tmp_path / "broken"
    shutil.copytree(dataset, broken)
    path = broken / "revival" / "observables.csv"
    lines = path.read_text().splitlines()
    header = lines[1].split(",")
    drop = header.index("position")
    kept = [",".join(v for j, v in enumerate(ln.split(",")) if j != drop)
            for ln in lines[1:]]
    path.write_text("\n".join(lines[:1] + kept) + "\n")
    with pytest.raises(SchemaError, match="position"):
        build("fig01", str(broken))


def test_missing_table_is_reported_with_path(dataset, tmp_path):
    partial = tmp_path / "partial"
    shutil.copytree(dataset, partial)
    os.remove(partial / "ho_types" / "exponents.csv")
    with pytest.raises(SchemaError, match="exponents.csv"):
        build("fig09", str(partial))


def test_foreign_csv_is_rejected(tmp_path):
    bad = tmp_path / "revival"
    bad.mkdir()
    (bad / "observables.csv").write_text("t,energy\n0,1\n")
    with pytest.raises(SchemaError, match="schema line"):
        build("fig01", str(tmp_path))


def test_unknown_figure_name():
    with pytest.raises(SchemaError, match="fig99"):
        build("fig99", ".")


def test_read_table_keeps_text_columns(dataset):
    name, tab = read_table(os.path.join(dataset, "ho", "N10", "fits.csv"))
    assert name == "fits"
    assert list(tab["model"]) == ["exponential", "power_law"]
    assert tab["t_hi"].dtype == float


def test_make_all_renders_everything(dataset, tmp_path):
    out = tmp_path / "out"
    assert run_all(["--input-dir", dataset, "--out", str(out)]) == 0
    files = sorted(os.listdir(out))
    assert files == sorted(f for _, f in FIGURES.values())


def test_run_one_exit_codes(dataset, tmp_path):
    assert run_one("fig11", ["--input-dir", dataset,
                             "--out", str(tmp_path)]) == 0
    empty = tmp_path / "empty"
    empty.mkdir()
    assert run_one("fig11", ["--input-dir", str(empty),
                             "--out", str(tmp_path)]) == 2


def test_per_figure_script_runs(dataset, tmp_path):
    script = os.path.join(SCRIPTS_DIR, "fig11_well_levels.py")
    proc = subprocess.run(
        [sys.executable, script, "--input-dir", dataset,
         "--out", str(tmp_path)],
        capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert os.path.isfile(tmp_path / "fig11_well_levels.png")


def test_make_all_script_fails_cleanly_without_data(tmp_path):
    script = os.path.join(SCRIPTS_DIR, "make_all")
    proc = subprocess.run(
        [sys.executable, script, "--input-dir", str(tmp_path / "nowhere"),
         "--out", str(tmp_path)],
        capture_output=True, text=True)
    assert proc.returncode == 1
    assert "missing input table" in proc.stderr
