import json

import numpy as np
import pytest

from semiclassica import cli
from semiclassica.coherent import PhaseGrid, husimi
from semiclassica.grid import GridSpec
from semiclassica.limits import SweepResult, cached_ground_state
from semiclassica.phase_space import builtin_potential
from semiclassica.plotting import emit_plot, heatmap_svg, sweep_svg, viridis


def _sweep():
    return SweepResult("demo", [0.5, 0.2, 0.1], ["hbar", "max_defect", "other_defect", "defect_0"],
                       [[0.5, 0.3, 1e-3, 1.0], [0.2, 0.1, 1e-4, 1.0], [0.1, 0.03, 0.0, 1.0]])


def test_viridis_endpoints():
    assert viridis(0.0).tolist() == [68, 1, 84]
    assert viridis(1.0).tolist() == [253, 231, 37]
    assert viridis(np.array([[0.3]])).shape == (1, 1, 3)


def test_sweep_svg_is_byte_stable(tmp_path):
    a = sweep_svg(_sweep())
    b = sweep_svg(_sweep())
    assert a == b
    assert a.count("<polyline") == 2  # indexed per-observable columns are left out
    emit_plot(_sweep(), tmp_path / "x.svg")
    assert (tmp_path / "x.svg").read_text() == a


def test_empty_sweep_is_rejected():
    with pytest.raises(ValueError):
        sweep_svg(SweepResult("empty", [], ["hbar", "x_defect"], []))
    with pytest.raises(ValueError):
        sweep_svg(SweepResult("nodefect", [0.1], ["hbar", "y"], [[0.1, 2.0]]))
    with pytest.raises(TypeError):
        emit_plot(object(), "never.svg")


def test_heatmap_is_byte_stable():
    grid = GridSpec(1, 6.0, 256)
    _, gs = cached_ground_state(builtin_potential("doublewell"), 0.2, grid)
    field = husimi(gs.psi, 0.2, PhaseGrid(grid, 0.2))
    a, b = heatmap_svg(field), heatmap_svg(field)
    assert a == b and a.endswith("</svg>\n")


def test_husimi_peaks_sit_on_the_wells(tmp_path):
    out = tmp_path / "h"
    assert cli.main(["husimi", "--hbar", "0.05", "--out", str(out), "--svg"]) == 0
    meta = json.loads((out / "husimi.json").read_text())
    peaks = sorted(meta["peaks"])
    assert len(peaks) == 2
    for (q, p), q0 in zip(peaks, (-1.0, 1.0)):
        assert np.hypot(q - q0, p) < 0.15
    svg1 = (out / "husimi.svg").read_bytes()
    out2 = tmp_path / "h2"
    cli.main(["husimi", "--hbar", "0.05", "--out", str(out2), "--svg"])
    assert (out2 / "husimi.svg").read_bytes() == svg1
