import json
import math
import os

import numpy as np
import pytest

import wwlab


def test_version():
    assert wwlab.__version__ == "0.1.0"


def test_channel_and_mrt_shapes():
    sc = wwlab.Scenario.unicast(3, 2, 4, 1.0, 0.5)
    rng = wwlab.RngStream(11, 0)
    ch = wwlab.draw_channel(sc, rng)
    assert ch.h.shape == (4, 6)
    assert ch.h.dtype == np.complex128

    w = wwlab.mrt(ch)
    assert w.w.shape == (6, 4)
    assert wwlab.power_feasible(w, sc, 1e-9)

    report = wwlab.sinr_and_se(ch, w)
    assert len(report.se) == 4
    assert all(s >= 0.0 for s in report.se)


def test_gradient_shape_and_zero_point():
    sc = wwlab.Scenario.multicast(2, 2, 4, 2, 1.0, 1.0)
    ch = wwlab.draw_channel(sc, wwlab.RngStream(12, 0))
    w0 = wwlab.pgd_init(ch)
    g = wwlab.smoothed_min_rate_gradient(ch, w0, 0.05)
    assert g.shape == w0.w.shape
    zero = wwlab.PrecoderSet()
    zero.w = np.zeros_like(w0.w)
    assert np.all(wwlab.smoothed_min_rate_gradient(ch, zero, 0.05) == 0)


def test_substreams_differ():
    root = wwlab.RngStream(5, 0)
    a = root.substream(1)
    b = root.substream(2)
    assert (a.seed, a.stream_id) != (b.seed, b.stream_id)
    ab = root.substream2(1, 2)
    assert (ab.seed, ab.stream_id) == (
        root.substream(1).substream(2).seed,
        root.substream(1).substream(2).stream_id,
    )


def test_ib_sweep_small():
    joint = wwlab.DiscreteJoint(np.array([[0.4, 0.1], [0.1, 0.4]]))
    cap = wwlab.mutual_information(joint)
    points = wwlab.ib_sweep(joint, [0.0, 100.0], 2, 3, wwlab.RngStream(3, 0))
    assert len(points) == 2
    assert points[0].i_xz <= 1e-9
    assert points[1].i_zy >= 0.99 * cap
    for pt in points:
        assert pt.i_zy <= cap + 1e-9
        assert pt.i_zy <= pt.i_xz + 1e-9


def test_chebyshev_closed_form():
    for x in (-0.9, -0.2, 0.3, 1.7):
        assert wwlab.chebyshev_t(3, x) == pytest.approx(4 * x**3 - 3 * x, abs=1e-12)
    factor = wwlab.worst_case_factor(wwlab.chebyshev_schedule(8, 1.0, 10.0))
    assert factor == pytest.approx(1.0 / math.cosh(8 * math.acosh(11.0 / 9.0)), abs=1e-9)


def test_sum_product_matches_brute_force():
    g = wwlab.FactorGraph()
    g.cardinalities = [2, 2]
    g.factors = [
        wwlab.FactorGraph.Factor([0], [0.3, 0.7]),
        wwlab.FactorGraph.Factor([0, 1], [0.9, 0.1, 0.2, 0.8]),
    ]
    bp = wwlab.sum_product(g, 64, 0.0, 1e-15)
    exact = wwlab.brute_force_marginals(g)
    assert bp.converged
    for got, want in zip(bp.marginals, exact):
        assert np.max(np.abs(np.asarray(got) - np.asarray(want))) <= 1e-9


def test_run_config_json(tmp_path):
    config = {"experiment": "horizon_sweep", "seed": 0, "params": {"horizons": [1, 2]}}
    csv_path, manifest_path = wwlab.run_config_json(json.dumps(config), str(tmp_path))
    assert os.path.basename(csv_path) == "horizon_sweep.csv"
    with open(csv_path) as f:
        lines = f.read().splitlines()
    assert lines[0] == "t,schedule_kind,worst_case_factor"
    assert len(lines) == 5
    with open(manifest_path) as f:
        manifest = json.load(f)
    assert manifest["version"] == "0.1.0"
    assert manifest["config"]["experiment"] == "horizon_sweep"


def test_bad_config_raises():
    with pytest.raises(ValueError):
        wwlab.run_config_json("{not json", ".")
    with pytest.raises(ValueError):
        wwlab.run_config_json(json.dumps({"experiment": "nope"}), ".")
