import math
import pathlib

import pytest

import semiclass

CONFIGS = pathlib.Path(__file__).resolve().parents[2] / "configs"


def test_parse_scale_and_hash():
    assert semiclass.parse_scale("1/10") == 0.1
    assert semiclass.parse_scale("2^-5") == pytest.approx(1 / 32, rel=1e-15)
    assert semiclass.config_hash("") == "cbf29ce484222325"


def test_command_names():
    names = semiclass.command_names()
    assert "orbit-convergence" in names and "kh-diagnostics" in names
    assert len(names) == 8


def test_spacing_run_matches_brute_force():
    cfg = semiclass.load_config(str(CONFIGS / "spacing_laplacian_1d.toml"))
    rows, meta = semiclass.run(cfg)
    tau = {r["h"]: r["value"] for r in rows if r["metric"] == "tau_H"}
    assert tau[0.1] == pytest.approx(0.1 / 0.23, rel=1e-12)
    assert meta["config_hash"] == semiclass.config_hash(cfg.source)


def test_report_roundtrip(tmp_path):
    cfg = semiclass.load_config(str(CONFIGS / "spacing_laplacian_1d.toml"))
    semiclass.run_to_dir(cfg, str(tmp_path))
    rows, meta = semiclass.read_report(str(tmp_path))
    assert rows and rows[0]["command"] == "spacing"
    direct, _ = semiclass.run(cfg)
    assert len(rows) == len(direct) == 9
    for a, b in zip(rows, direct):
        assert a["metric"] == b["metric"] and a["value"] == b["value"]
    assert semiclass.rows_to_csv(rows).splitlines()[0] == "command,h,tau,metric,value"
    assert meta["h_list"] == pytest.approx([0.1, 0.05, 0.025])


def test_config_errors_map_to_python():
    with pytest.raises(semiclass.ConfigError):
        semiclass.parse_config("bogus = 1\n")
    with pytest.raises(semiclass.SemiclassError):
        semiclass.parse_config('h_list = ["2^-5", "2^-4"]\n')


def test_free_propagation_is_unitary():
    import numpy as np

    u = semiclass.coherent_state([0.3, 0.7], [1.0, 0.5], 0.5, 1 / 32)
    assert u.norm() == pytest.approx(1.0, abs=1e-12)
    model = semiclass.HamiltonianModel.quadratic(np.eye(2))
    v = semiclass.free_propagate(u, 12.5, model)
    assert v.norm() == pytest.approx(1.0, abs=1e-12)
    dens = semiclass.position_density(v, 32)
    # integral of |u|^2 over the torus by the grid sum
    assert sum(dens) * (2 * math.pi / 32) ** 2 == pytest.approx(1.0, rel=1e-10)


def test_minimal_spacing_binding():
    import numpy as np

    model = semiclass.HamiltonianModel.quadratic(np.array([[2.0]]))
    tau, gap, distinct = semiclass.minimal_spacing(model, 0.1, np.array([1.0]), np.array([4.0]))
    assert gap == pytest.approx(0.23, rel=1e-12)
    assert distinct == 29
    with pytest.raises(semiclass.EmptyCluster):
        semiclass.minimal_spacing(model, 0.5, np.array([1.0]), np.array([1.4]))
