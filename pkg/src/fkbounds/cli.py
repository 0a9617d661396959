"""Command-line front end.

Subcommands: sample-paths, kernel, check-dia, check-mono, ids, oracle.
Every run is deterministic given its config: path and disorder streams are
keyed by (seed, index), reductions run in fixed order, and the report file
contains no timestamps.  Exit codes: 0 ok, 2 usage error, 3 theorem
hypothesis not met, 4 numeric failure, 5 check failed (report written).
"""

from __future__ import annotations

import argparse
import re
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import EstimateOverflowError, HypothesisError, TooLargeError
from .ids import bound_curves, compare_ids_to_bounds, estimate_ids
from .inequalities import diamagnetic_check, monotonicity_check
from .kernel import CHUNK, FkConfig, annealed_diagonal_kernel, estimate_kernel
from .lattice import LatticeSpec, build_lattice_hamiltonian, oracle_kernel, site_index
from .paths import (
    independence_report,
    make_grid,
    moment_report,
    sample_wiener_ensemble,
    to_bridge_ensemble,
)
from .potentials import parse_bfield, parse_covariance, parse_scalar, parse_vector
from .reporting import RunReport, write_report

__all__ = ["ExperimentConfig", "parse_command", "run_experiment", "main"]

EXIT_USAGE = 2
EXIT_HYPOTHESIS = 3
EXIT_NUMERIC = 4
EXIT_CHECK_FAILED = 5


@dataclass(frozen=True)
class ExperimentConfig:
    subcommand: str
    params: dict
    seed: int
    workers: int
    out: str | None
    format: str
    plot: str | None


def _positive_float(text: str) -> float:
    x = float(text)
    if x <= 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return x


def _positive_int(text: str) -> int:
    n = int(text)
    if n <= 0:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return n


def parse_point(text: str) -> tuple:
    try:
        return tuple(float(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad point {text!r}; expected e.g. 0.5,-1")


def parse_endpoints(text: str) -> tuple:
    """Pairs 'q:qprime' separated by ';', point components by ','."""
    pairs = []
    for item in text.split(";"):
        left, sep, right = item.partition(":")
        if not sep:
            raise argparse.ArgumentTypeError(f"endpoint pair {item!r} needs 'q:qprime'")
        pairs.append((parse_point(left), parse_point(right)))
    return tuple(pairs)


def parse_energies(text: str) -> tuple:
    """Inclusive range 'start:stop:step', computed as start + k*step."""
    try:
        start, stop, step = (float(p) for p in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad energy range {text!r}; expected start:stop:step")
    if step <= 0 or stop < start:
        raise argparse.ArgumentTypeError("energy range needs step > 0 and stop >= start")
    out = []
    k = 0
    while True:
        e = start + k * step
        if e > stop + 0.5 * step:
            break
        out.append(e)
        k += 1
    return tuple(out)


def _spec_arg(parse_fn, what: str):
    def convert(text: str):
        try:
            parse_fn(text)
        except (ValueError, OSError) as exc:
            raise argparse.ArgumentTypeError(f"bad {what} spec {text!r}: {exc}")
        return text

    return convert


# values like '-6:2:0.25' or '-1,0:0,0' must parse as option values, not flags
_LEADING_MINUS_VALUE = re.compile(r"^-\d")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fkbounds",
        description="Path-integral Monte Carlo kernels and bound verification",
    )
    parser._negative_number_matcher = _LEADING_MINUS_VALUE
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p):
        p._negative_number_matcher = _LEADING_MINUS_VALUE
        p.add_argument("--seed", type=int, default=0, help="master seed")
        p.add_argument("--workers", type=_positive_int, default=1,
                       help="worker threads (affects speed only, never results)")
        p.add_argument("--out", default=None, help="output path (default stdout)")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--plot", nargs="?", const="auto", default=None,
                       metavar="PATH", help="also render a figure (PNG)")

    p = sub.add_parser("sample-paths", help="sample Wiener or bridge paths")
    p.add_argument("--total-time", type=_positive_float, default=1.0)
    p.add_argument("--steps", type=_positive_int, default=16)
    p.add_argument("--dim", type=_positive_int, default=1)
    p.add_argument("--paths", type=_positive_int, default=100)
    p.add_argument("--bridge", type=parse_endpoints, default=None,
                   metavar="QPRIME:Q", help="transform to bridges with these endpoints")
    p.add_argument("--probes", type=parse_point, default=None,
                   help="comma-separated node times for a moment report")
    common(p)

    p = sub.add_parser("kernel", help="Monte Carlo kernel estimate")
    p.add_argument("--beta", type=_positive_float, default=1.0)
    p.add_argument("--hbar", type=_positive_float, default=1.0)
    p.add_argument("--dim", type=_positive_int, default=1)
    p.add_argument("--steps", type=_positive_int, default=256)
    p.add_argument("--paths", type=_positive_int, default=10_000)
    p.add_argument("--v", default="zero", type=_spec_arg(parse_scalar, "scalar"),
                   help="scalar potential spec")
    p.add_argument("--a", default="zero", type=_spec_arg(parse_vector, "vector"),
                   help="vector potential spec")
    p.add_argument("--q", type=parse_point, default=(0.0,))
    p.add_argument("--qprime", type=parse_point, default=(0.0,))
    common(p)

    p = sub.add_parser("check-dia", help="diamagnetic inequality check")
    p.add_argument("--beta", type=_positive_float, default=1.0)
    p.add_argument("--hbar", type=_positive_float, default=1.0)
    p.add_argument("--dim", type=_positive_int, default=2)
    p.add_argument("--steps", type=_positive_int, default=128)
    p.add_argument("--paths", type=_positive_int, default=20_000)
    p.add_argument("--v", default="zero", type=_spec_arg(parse_scalar, "scalar"))
    p.add_argument("--a", default="landau:const:1", type=_spec_arg(parse_vector, "vector"))
    p.add_argument("--endpoints", type=parse_endpoints, default=parse_endpoints("0,0:0,0"))
    common(p)

    p = sub.add_parser("check-mono", help="diamagnetic monotonicity check (hbar = 1)")
    p.add_argument("--beta", type=_positive_float, default=1.0)
    p.add_argument("--steps", type=_positive_int, default=128)
    p.add_argument("--paths", type=_positive_int, default=20_000)
    p.add_argument("--b", default="const:0", type=_spec_arg(parse_bfield, "profile"),
                   help="smaller field profile")
    p.add_argument("--B", dest="big", default="const:1",
                   type=_spec_arg(parse_bfield, "profile"), help="larger field profile")
    p.add_argument("--endpoints", type=parse_endpoints, default=parse_endpoints("0,0:0,0"))
    common(p)

    p = sub.add_parser("ids", help="integrated density of states vs bounds")
    p.add_argument("--dim", type=_positive_int, default=1, choices=(1, 2))
    p.add_argument("--grid", type=_positive_int, default=200, help="lattice points per side")
    p.add_argument("--box", type=_positive_float, default=40.0, help="box side length")
    p.add_argument("--realizations", type=_positive_int, default=50)
    p.add_argument("--cov", default="se:1,1", type=_spec_arg(parse_covariance, "covariance"))
    p.add_argument("--b", default=None, type=_spec_arg(parse_bfield, "profile"),
                   help="field profile for a planar Peierls run (dim 2 only)")
    p.add_argument("--modes", type=_positive_int, default=1024)
    p.add_argument("--energies", type=parse_energies, default=parse_energies("-6:2:0.25"))
    p.add_argument("--beta", type=_positive_float, default=1.0,
                   help="beta for the fixed-beta bound column")
    p.add_argument("--hbar", type=_positive_float, default=1.0)
    p.add_argument("--annealed-paths", type=int, default=0,
                   help="paths for the annealed diagonal-kernel chain check (0 = off)")
    p.add_argument("--annealed-steps", type=_positive_int, default=32)
    p.add_argument("--weyl-window", default=None, metavar="LO:HI",
                   help="energy window for the Weyl-ratio layer")
    common(p)

    p = sub.add_parser("oracle", help="dense lattice Hamiltonian reference")
    p.add_argument("--dim", type=_positive_int, default=1, choices=(1, 2))
    p.add_argument("--grid", type=_positive_int, default=400)
    p.add_argument("--box", type=_positive_float, default=16.0)
    p.add_argument("--v", default="zero", type=_spec_arg(parse_scalar, "scalar"))
    p.add_argument("--a", default="zero", type=_spec_arg(parse_vector, "vector"))
    p.add_argument("--beta", type=_positive_float, default=1.0)
    p.add_argument("--hbar", type=_positive_float, default=1.0)
    p.add_argument("--q", type=parse_point, default=None)
    p.add_argument("--qprime", type=parse_point, default=None)
    common(p)

    return parser


_PARAM_KEYS = {
    "sample-paths": ("total_time", "steps", "dim", "paths", "bridge", "probes"),
    "kernel": ("beta", "hbar", "dim", "steps", "paths", "v", "a", "q", "qprime"),
    "check-dia": ("beta", "hbar", "dim", "steps", "paths", "v", "a", "endpoints"),
    "check-mono": ("beta", "steps", "paths", "b", "big", "endpoints"),
    "ids": ("dim", "grid", "box", "realizations", "cov", "b", "modes", "energies",
            "beta", "hbar", "annealed_paths", "annealed_steps", "weyl_window"),
    "oracle": ("dim", "grid", "box", "v", "a", "beta", "hbar", "q", "qprime"),
}


def parse_command(argv=None) -> ExperimentConfig:
    parser = build_parser()
    ns = parser.parse_args(argv)
    if ns.plot == "auto":
        if ns.out is None:
            parser.error("--plot without a path requires --out")
        ns.plot = str(Path(ns.out).with_suffix(".png"))
    if ns.subcommand == "ids" and ns.b is not None and ns.dim != 2:
        parser.error("--b (Peierls run) requires --dim 2")
    params = {k: getattr(ns, k) for k in _PARAM_KEYS[ns.subcommand]}
    return ExperimentConfig(
        subcommand=ns.subcommand,
        params=params,
        seed=ns.seed,
        workers=ns.workers,
        out=ns.out,
        format=ns.format,
        plot=ns.plot,
    )


def _config_dict(cfg: ExperimentConfig) -> dict:
    def plain(v):
        if isinstance(v, tuple):
            return [plain(x) for x in v]
        return v

    out = {"subcommand": cfg.subcommand, "seed": cfg.seed}
    out.update({k: plain(v) for k, v in cfg.params.items()})
    return out


def _run_sample_paths(cfg: ExperimentConfig) -> RunReport:
    p = cfg.params
    grid = make_grid(p["total_time"], p["steps"], p["dim"])
    ens = sample_wiener_ensemble(grid, cfg.seed, p["paths"])
    kind = "wiener"
    if p["bridge"]:
        (qprime, q), = p["bridge"]
        collection = to_bridge_ensemble(ens, qprime, q)
        kind = "bridge"
    else:
        collection = ens

    payload: dict = {"kind": kind, "n_paths": p["paths"]}
    if p["probes"]:
        report = moment_report(collection, list(p["probes"]))
        probes = list(report.to_dict()["probes"])
        if kind == "bridge":
            indep = independence_report(ens, collection.start, collection.end, list(p["probes"]))
            probes += list(indep.to_dict()["probes"])
        payload.update(
            {
                "sample_count": report.sample_count,
                "max_abs_z": max((abs(pr["z_score"]) for pr in probes), default=0.0),
                "probes": probes,
            }
        )

    times = grid.times()
    header = ("path_id", "k", "t_k") + tuple(f"x_{j+1}" for j in range(grid.dim))
    rows = [
        (i, k, times[k]) + tuple(collection.nodes[i, k])
        for i in range(p["paths"])
        for k in range(grid.n_steps + 1)
    ]
    return RunReport(
        config=_config_dict(cfg),
        kind="moments" if p["probes"] else "paths",
        payload=payload,
        wall_time=0.0,
        csv_rows=(header, rows),
        figure_data={"times": times, "nodes": collection.nodes},
    )


def _run_kernel(cfg: ExperimentConfig) -> RunReport:
    p = cfg.params
    fk = FkConfig(
        beta=p["beta"], hbar=p["hbar"], dim=p["dim"],
        n_steps=p["steps"], n_paths=p["paths"], seed=cfg.seed,
    )
    est = estimate_kernel(
        fk, parse_scalar(p["v"]), parse_vector(p["a"]), p["q"], p["qprime"],
        workers=cfg.workers,
    )
    payload = est.to_dict()
    header = tuple(payload.keys())
    row = tuple(
        ":".join(str(x) for x in v) if isinstance(v, list) else v for v in payload.values()
    )
    return RunReport(
        config=_config_dict(cfg),
        kind="kernel",
        payload=payload,
        wall_time=0.0,
        csv_rows=(header, [row]),
        figure_data={
            **payload,
            "running_abs": np.abs(est.running_means()),
            "running_counts": np.minimum(
                np.arange(1, len(est.chunk_sums) + 1) * CHUNK, est.n_paths
            ),
        },
    )


def _run_check_dia(cfg: ExperimentConfig) -> RunReport:
    p = cfg.params
    fk = FkConfig(
        beta=p["beta"], hbar=p["hbar"], dim=p["dim"],
        n_steps=p["steps"], n_paths=p["paths"], seed=cfg.seed,
    )
    report = diamagnetic_check(
        fk, parse_scalar(p["v"]), parse_vector(p["a"]), p["endpoints"], workers=cfg.workers
    )
    header = ("q", "qprime", "abs_k_magnetic", "k_free_potential", "combined_se", "slack")
    rows = [
        (
            ":".join(str(x) for x in d["q"]),
            ":".join(str(x) for x in d["qprime"]),
            d["abs_k_magnetic"], d["k_free_potential"], d["combined_se"], d["slack"],
        )
        for d in report.details
    ]
    return RunReport(
        config=_config_dict(cfg),
        kind="verification",
        payload=report.to_dict(),
        wall_time=0.0,
        csv_rows=(header, rows),
    )


def _run_check_mono(cfg: ExperimentConfig) -> RunReport:
    p = cfg.params
    fk = FkConfig(
        beta=p["beta"], hbar=1.0, dim=1,
        n_steps=p["steps"], n_paths=p["paths"], seed=cfg.seed,
    )
    report = monotonicity_check(
        parse_bfield(p["b"]), parse_bfield(p["big"]), p["endpoints"], p["beta"], fk
    )
    header = ("q", "qprime", "lhs_abs", "rhs_abs_damped", "combined_se", "slack")
    rows = [
        (
            ":".join(str(x) for x in d["q"]),
            ":".join(str(x) for x in d["qprime"]),
            d["lhs_abs"], d["rhs_abs_damped"], d["combined_se"], d["slack"],
        )
        for d in report.details
    ]
    return RunReport(
        config=_config_dict(cfg),
        kind="verification",
        payload=report.to_dict(),
        wall_time=0.0,
        csv_rows=(header, rows),
    )


def _run_ids(cfg: ExperimentConfig) -> RunReport:
    p = cfg.params
    lattice = LatticeSpec(p["dim"], p["grid"], p["box"])
    cov = parse_covariance(p["cov"])
    curve = estimate_ids(
        lattice, cov, p["realizations"], p["energies"], cfg.seed,
        hbar=p["hbar"], modes=p["modes"], workers=cfg.workers,
        b_field=parse_bfield(p["b"]) if p["b"] else None,
    )
    fixed, optimized, weyl = bound_curves(
        p["energies"], cov, p["hbar"], p["dim"], p["beta"]
    )

    annealed = None
    if p["annealed_paths"] > 0:
        fk = FkConfig(
            beta=p["beta"], hbar=p["hbar"], dim=p["dim"],
            n_steps=p["annealed_steps"], n_paths=p["annealed_paths"], seed=cfg.seed,
        )
        annealed = abs(annealed_diagonal_kernel(fk, cov, workers=cfg.workers).value)

    window = None
    if p["weyl_window"]:
        lo, hi = (float(x) for x in p["weyl_window"].split(":"))
        window = (lo, hi)

    verdict = compare_ids_to_bounds(
        curve, optimized, weyl=weyl if window else None, weyl_window=window,
        annealed_diag=annealed, chain_beta=p["beta"] if annealed is not None else None,
    )

    payload = {
        "energies": list(curve.energies),
        "n_mean": list(curve.mean),
        "n_se": list(curve.std_error),
        "bound_fixed_beta": list(fixed.values),
        "bound_optimized": list(optimized.values),
        "beta_star": list(optimized.betas),
        "weyl": list(weyl),
        "verification": verdict.to_dict(),
        "passed": verdict.passed,
    }
    header = ("E", "N_mean", "N_se", "bound_fixed_beta", "bound_optimized", "beta_star", "weyl")
    rows = list(
        zip(curve.energies, curve.mean, curve.std_error,
            fixed.values, optimized.values, optimized.betas, weyl)
    )
    return RunReport(
        config=_config_dict(cfg),
        kind="ids",
        payload=payload,
        wall_time=0.0,
        csv_rows=(header, rows),
    )


def _run_oracle(cfg: ExperimentConfig) -> RunReport:
    p = cfg.params
    spec = LatticeSpec(p["dim"], p["grid"], p["box"])
    opr = build_lattice_hamiltonian(spec, parse_scalar(p["v"]), parse_vector(p["a"]), p["hbar"])
    vals = opr.eigenvalues()
    payload = {
        "n_sites": spec.size,
        "spacing": spec.spacing,
        "lowest_eigenvalue": float(vals[0]),
        "highest_eigenvalue": float(vals[-1]),
        "hermiticity_residual": opr.hermiticity_residual(),
    }
    q = p["q"] if p["q"] is not None else (0.0,) * spec.dim
    qp = p["qprime"] if p["qprime"] is not None else q
    i, j = site_index(spec, q), site_index(spec, qp)
    entry = oracle_kernel(opr, p["beta"], i, j)
    payload.update(
        {
            "beta": p["beta"],
            "site_i": i,
            "site_j": j,
            "kernel_re": entry.real,
            "kernel_im": entry.imag,
        }
    )
    header = ("index", "eigenvalue")
    rows = list(enumerate(float(x) for x in vals))
    return RunReport(
        config=_config_dict(cfg),
        kind="oracle",
        payload=payload,
        wall_time=0.0,
        csv_rows=(header, rows),
        figure_data={"eigenvalues": vals},
    )


_RUNNERS = {
    "sample-paths": _run_sample_paths,
    "kernel": _run_kernel,
    "check-dia": _run_check_dia,
    "check-mono": _run_check_mono,
    "ids": _run_ids,
    "oracle": _run_oracle,
}


def run_experiment(cfg: ExperimentConfig) -> RunReport:
    start = time.perf_counter()
    report = _RUNNERS[cfg.subcommand](cfg)
    elapsed = time.perf_counter() - start
    return RunReport(
        config=report.config,
        kind=report.kind,
        payload=report.payload,
        wall_time=elapsed,
        csv_rows=report.csv_rows,
        figure_data=report.figure_data,
    )


def main(argv=None) -> int:
    try:
        cfg = parse_command(argv)
    except SystemExit as exc:  # argparse usage errors (and --help)
        return int(exc.code or 0)

    try:
        report = run_experiment(cfg)
    except HypothesisError as exc:
        print(f"fkbounds: hypothesis not met: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except TooLargeError as exc:
        print(f"fkbounds: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (EstimateOverflowError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"fkbounds: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC

    try:
        write_report(report, cfg.out, cfg.format)
        if cfg.plot:
            from .plots import render_figure

            render_figure(report.kind, report.figure_data or report.payload, cfg.plot)
    except (OSError, ValueError) as exc:
        print(f"fkbounds: output failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC

    print(f"fkbounds: {cfg.subcommand} finished in {report.wall_time:.2f} s", file=sys.stderr)
    if report.passed is False:
        return EXIT_CHECK_FAILED
    return 0


if __name__ == "__main__":
    sys.exit(main())
