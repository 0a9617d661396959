import json
import math

import pytest

from fkbounds import cli
from fkbounds.cli import main, parse_command, parse_endpoints, parse_energies, run_experiment
from fkbounds.reporting import RunReport


def test_parse_kernel_example():
    cfg = parse_command(
        "kernel --dim 1 --beta 1 --hbar 1 --steps 256 --paths 100000 --seed 7 "
        "--v harmonic:1 --a zero --q 0 --qprime 0".split()
    )
    assert cfg.subcommand == "kernel"
    assert cfg.params["paths"] == 100_000
    assert cfg.params["v"] == "harmonic:1"
    assert cfg.seed == 7


def test_parse_ids_example_has_33_energies():
    cfg = parse_command(
        "ids --grid 200 --box 40 --realizations 50 --cov se:1,1 "
        "--energies -6:2:0.25 --seed 3".split()
    )
    assert len(cfg.params["energies"]) == 33
    assert cfg.params["energies"][0] == -6.0
    assert cfg.params["energies"][-1] == pytest.approx(2.0)


def test_negative_beta_is_usage_error():
    with pytest.raises(SystemExit) as err:
        parse_command("kernel --beta -1".split())
    assert err.value.code == 2


def test_unknown_flag_rejected():
    with pytest.raises(SystemExit) as err:
        parse_command("kernel --frobnicate 3".split())
    assert err.value.code == 2


def test_unknown_subcommand_rejected():
    with pytest.raises(SystemExit):
        parse_command(["transmogrify"])


def test_endpoint_parsing():
    pairs = parse_endpoints("0,0:1,0;0.5,-1:0,0")
    assert pairs == (((0.0, 0.0), (1.0, 0.0)), ((0.5, -1.0), (0.0, 0.0)))


def test_energy_range_endpoint_inclusive():
    es = parse_energies("0:1:0.5")
    assert es == (0.0, 0.5, 1.0)


def test_free_kernel_run_report():
    cfg = parse_command(
        "kernel --dim 1 --beta 1 --hbar 1 --steps 64 --paths 2000 --seed 1 "
        "--v zero --a zero --q 0 --qprime 0".split()
    )
    report = run_experiment(cfg)
    assert report.payload["value_re"] == pytest.approx(0.3989422804014327, rel=1e-12)
    assert report.payload["std_error"] == 0.0
    assert report.payload["value_im"] == 0.0


def test_main_writes_json_report(tmp_path, capsys):
    out = tmp_path / "kernel.json"
    rc = main(
        f"kernel --steps 32 --paths 500 --seed 2 --out {out} --format json".split()
    )
    assert rc == 0
    doc = json.loads(out.read_text())
    assert doc["kind"] == "kernel"
    assert doc["config"]["subcommand"] == "kernel"
    assert set(doc["result"]) >= {"value_re", "value_im", "std_error", "potential"}


def test_rerun_is_byte_identical(tmp_path):
    out1 = tmp_path / "a.json"
    out2 = tmp_path / "b.json"
    args = "kernel --steps 32 --paths 800 --seed 9 --v harmonic:1 --format json"
    assert main(args.split() + ["--out", str(out1)]) == 0
    assert main(args.split() + ["--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_worker_count_is_invisible_in_reports(tmp_path):
    outs = []
    for workers in (1, 8):
        path = tmp_path / f"w{workers}.json"
        rc = main(
            f"kernel --steps 64 --paths 5000 --seed 4 --v harmonic:1 "
            f"--workers {workers} --out {path}".split()
        )
        assert rc == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_ids_csv_header_and_determinism(tmp_path):
    args = (
        "ids --grid 60 --box 12 --realizations 4 --cov se:1,1 "
        "--energies -2:1:0.5 --seed 5 --format csv"
    )
    out1 = tmp_path / "ids1.csv"
    out2 = tmp_path / "ids2.csv"
    assert main(args.split() + ["--out", str(out1)]) == 0
    assert main(args.split() + ["--out", str(out2), "--workers", "8"]) == 0
    text = out1.read_text()
    assert text.splitlines()[0] == "E,N_mean,N_se,bound_fixed_beta,bound_optimized,beta_star,weyl"
    assert out1.read_bytes() == out2.read_bytes()


def test_sample_paths_csv_columns(tmp_path):
    out = tmp_path / "paths.csv"
    rc = main(
        f"sample-paths --total-time 1 --steps 4 --dim 2 --paths 3 --seed 1 "
        f"--format csv --out {out}".split()
    )
    assert rc == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "path_id,k,t_k,x_1,x_2"
    assert len(lines) == 1 + 3 * 5  # header + paths * nodes


def test_sample_paths_moment_report_json(tmp_path):
    out = tmp_path / "moments.json"
    rc = main(
        f"sample-paths --steps 4 --paths 500 --seed 2 --bridge 0:1 "
        f"--probes 0.25,0.5 --out {out}".split()
    )
    assert rc == 0
    doc = json.loads(out.read_text())
    assert doc["kind"] == "moments"
    kinds = {p["kind"] for p in doc["result"]["probes"]}
    assert kinds == {"mean", "cov", "endpoint_corr"}


def test_check_dia_passes_and_writes_csv(tmp_path):
    out = tmp_path / "dia.csv"
    rc = main(
        f"check-dia --dim 2 --steps 48 --paths 2000 --seed 3 --v zero "
        f"--a landau:const:1 --endpoints 0,0:0,0;1,0:0,0 --format csv --out {out}".split()
    )
    assert rc == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "q,qprime,abs_k_magnetic,k_free_potential,combined_se,slack"
    assert len(lines) == 3


def test_check_mono_passes(tmp_path):
    out = tmp_path / "mono.json"
    rc = main(
        f"check-mono --steps 48 --paths 2000 --seed 3 --b const:0 --B const:1 "
        f"--endpoints 0,0:0,0 --out {out}".split()
    )
    assert rc == 0
    doc = json.loads(out.read_text())
    assert doc["result"]["passed"] is True


def test_check_mono_hypothesis_violation_exits_3(tmp_path, capsys):
    out = tmp_path / "mono.json"
    rc = main(
        f"check-mono --steps 16 --paths 100 --seed 0 --b const:1 --B sin:0,1,1 "
        f"--endpoints 0,0:0,0 --out {out}".split()
    )
    assert rc == 3
    assert not out.exists()  # no verdict, no report


def test_overflow_exits_4(tmp_path):
    rc = main(
        "kernel --steps 16 --paths 50 --seed 0 --v well:10000,50".split()
    )
    assert rc == 4


def test_lattice_cap_exits_2():
    rc = main("oracle --dim 2 --grid 65 --box 10".split())
    assert rc == 2


def test_failed_check_exits_5_and_still_writes(tmp_path, monkeypatch):
    out = tmp_path / "failed.json"
    failed = RunReport(
        config={"subcommand": "check-dia"},
        kind="verification",
        payload={"check": "diamagnetic", "passed": False, "details": [],
                 "worst_margin": -1.0},
        wall_time=0.0,
    )
    monkeypatch.setattr(cli, "run_experiment", lambda cfg: failed)
    rc = main(f"check-dia --steps 8 --paths 16 --out {out}".split())
    assert rc == 5
    assert json.loads(out.read_text())["result"]["passed"] is False


def test_oracle_subcommand_json_and_csv(tmp_path):
    out_json = tmp_path / "oracle.json"
    rc = main(
        f"oracle --dim 1 --grid 120 --box 12 --v harmonic:1 --beta 1 "
        f"--q 0 --qprime 0 --out {out_json}".split()
    )
    assert rc == 0
    doc = json.loads(out_json.read_text())
    assert doc["result"]["kernel_re"] == pytest.approx(0.368, abs=5e-3)
    assert doc["result"]["hermiticity_residual"] < 1e-12

    out_csv = tmp_path / "oracle.csv"
    rc = main(
        f"oracle --dim 1 --grid 20 --box 8 --format csv --out {out_csv}".split()
    )
    assert rc == 0
    lines = out_csv.read_text().splitlines()
    assert lines[0] == "index,eigenvalue"
    assert len(lines) == 21


def test_plot_flag_renders_png(tmp_path):
    out = tmp_path / "kernel.json"
    rc = main(
        f"kernel --steps 32 --paths 2000 --seed 6 --v harmonic:1 "
        f"--out {out} --plot".split()
    )
    assert rc == 0
    png = tmp_path / "kernel.png"
    assert png.exists()
    assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_plot_auto_requires_out():
    with pytest.raises(SystemExit) as err:
        parse_command("kernel --plot".split())
    assert err.value.code == 2


def test_ids_plot(tmp_path):
    out = tmp_path / "ids.json"
    fig = tmp_path / "fig.png"
    rc = main(
        f"ids --grid 40 --box 8 --realizations 3 --energies -1:1:0.5 "
        f"--seed 1 --out {out} --plot {fig}".split()
    )
    assert rc == 0
    assert fig.exists() and fig.stat().st_size > 0
