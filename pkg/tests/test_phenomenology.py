"""Boundary-family sweeps at exploratory resolution.

Two end-to-end sweep protocols at 48x96: the winding family's interior
cleans up as the winding number grows, and the small-mu2 family switches
from smooth to singular minimizers.  Both go through the command-line
sweep driver and read back the run-directory artifacts.
"""

import csv
import io
from pathlib import Path

import numpy as np
import pytest

from ldglab.cli import load_run, main as cli_main
from ldglab.topology import beta_field

CONFIGS = Path(__file__).resolve().parent / "configs"


def _sweep(tmp_path, config, param, values):
    out = tmp_path / "sweep"
    rc = cli_main(["sweep", "--config", str(CONFIGS / config),
                   "--param", param, "--values", values, "--out", str(out)])
    assert rc == 0
    with io.StringIO((out / "sweep.csv").read_text()) as fh:
        rows = list(csv.DictReader(fh))
    assert all(row["status"] == "ok" for row in rows), rows
    return out, rows


def _interior_roughness(run_dir, collar=0.3):
    """max of 1 - beta over the interior ball of radius 1 - collar."""
    run, _cfg = load_run(run_dir)
    bf = beta_field(run.field)
    grid = run.field.grid
    R, Z = np.meshgrid(grid.r, grid.z)
    mask = (np.hypot(R, Z) < 1.0 - collar) & ~np.isnan(bf.values)
    return float(np.max(1.0 - bf.values[mask]))


def test_winding_sweep_localizes_interior(tmp_path):
    out, rows = _sweep(tmp_path, "torus48.ini", "j", "2,4,8")
    metric = [_interior_roughness(out / f"j_{j}") for j in (2, 4, 8)]
    assert metric[0] > metric[1] > metric[2], \
        f"interior roughness not decreasing: {metric}"
    counts = [int(row["n_singularities"]) for row in rows]
    assert counts == [0, 0, 0], f"winding family should stay smooth: {counts}"


def test_small_mu2_sweep_turns_singular(tmp_path):
    _out, rows = _sweep(tmp_path, "split48.ini", "mu2", "0.4,0.2,0.1,0.05")
    counts = [int(row["n_singularities"]) for row in rows]
    assert all(c % 2 == 0 for c in counts), f"odd defect count: {counts}"
    assert counts[-1] >= 2, f"smallest mu2 should be singular: {counts}"
    assert rows[-1]["verdict"] == "SplitMinimizer", rows[-1]
