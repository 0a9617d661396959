import numpy as np
import pytest

from fkbounds.plots import render_figure


def png_ok(path):
    data = path.read_bytes()
    return data[:8] == b"\x89PNG\r\n\x1a\n" and len(data) > 1000


def test_paths_figure(tmp_path):
    out = tmp_path / "p.png"
    payload = {
        "times": np.linspace(0, 1, 9),
        "nodes": np.random.default_rng(0).standard_normal((5, 9, 1)),
    }
    render_figure("paths", payload, str(out))
    assert png_ok(out)


def test_verification_figure(tmp_path):
    out = tmp_path / "v.png"
    payload = {
        "check": "diamagnetic",
        "worst_margin": 0.004,
        "details": [
            {"slack": 0.004},
            {"slack": 0.01},
            {"slack": -0.001},
        ],
    }
    render_figure("verification", payload, str(out))
    assert png_ok(out)


def test_ids_figure(tmp_path):
    out = tmp_path / "i.png"
    e = np.arange(-2.0, 2.01, 0.5)
    payload = {
        "energies": e,
        "n_mean": np.maximum(0.0, 0.2 * (e + 1.5)),
        "n_se": np.full(e.size, 0.01),
        "bound_optimized": np.exp(0.4 * e),
        "bound_fixed_beta": 2 * np.exp(0.4 * e),
        "weyl": np.where(e > 0, np.sqrt(np.abs(e)), np.nan),
    }
    render_figure("ids", payload, str(out))
    assert png_ok(out)


def test_oracle_figure(tmp_path):
    out = tmp_path / "o.png"
    render_figure("oracle", {"eigenvalues": np.sort(np.random.default_rng(1).uniform(0, 5, 40))}, str(out))
    assert png_ok(out)


def test_moments_figure(tmp_path):
    out = tmp_path / "m.png"
    payload = {"probes": [{"z_score": z} for z in (-1.0, 0.5, 2.0)]}
    render_figure("moments", payload, str(out))
    assert png_ok(out)


def test_unknown_kind_raises(tmp_path):
    with pytest.raises(ValueError):
        render_figure("nonesuch", {}, str(tmp_path / "x.png"))
