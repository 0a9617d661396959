"""Monte Carlo evaluation of Boltzmann-Gibbs kernels over bridge paths.

The kernel <q| exp(-beta H(a, v)) |q'> is estimated as

    prefactor(q, q') * mean over bridges of exp(-action) * exp(i * phase),

where the prefactor is the free kernel, the action is the trapezoid-rule
integral of v along the path in imaginary time, and the phase is the
mid-point (Stratonovich) line integral of the vector potential divided by
hbar.  The mid-point rule is what makes gauge transformations act as pure
endpoint phases and reproduces the constant-field kernel; the scalar term
has no such constraint and uses the trapezoid rule.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import EstimateOverflowError
from .paths import BridgePath, bridge_nodes, make_grid, wiener_block
from .potentials import ScalarPotential, VectorPotential, ZeroVector

__all__ = [
    "CHUNK",
    "FkConfig",
    "KernelEstimate",
    "free_kernel",
    "landau_abs_kernel",
    "scalar_action",
    "magnetic_phase",
    "estimate_kernel",
    "estimate_kernels",
    "annealed_weight",
    "annealed_diagonal_kernel",
]

# Paths are processed in fixed-size chunks and partial sums are reduced in
# chunk order, so accumulation is bit-reproducible for any worker count.
CHUNK = 4096

# exp() overflow guard on the log weight -action
MAX_LOG_WEIGHT = 700.0


@dataclass(frozen=True)
class FkConfig:
    """Sampling parameters for one kernel estimate."""

    beta: float
    hbar: float = 1.0
    dim: int = 1
    n_steps: int = 128
    n_paths: int = 10_000
    seed: int = 0

    def __post_init__(self):
        if self.beta <= 0:
            raise ValueError("beta must be positive")
        if self.hbar <= 0:
            raise ValueError("hbar must be positive")
        if self.dim < 1 or self.n_steps < 1 or self.n_paths < 1:
            raise ValueError("dim, n_steps and n_paths must be at least 1")

    @property
    def total_time(self) -> float:
        """Wiener time T = beta * hbar^2."""
        return self.beta * self.hbar**2

    def grid(self):
        return make_grid(self.total_time, self.n_steps, self.dim)

    def to_dict(self) -> dict:
        return {
            "beta": self.beta,
            "hbar": self.hbar,
            "dim": self.dim,
            "n_steps": self.n_steps,
            "n_paths": self.n_paths,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class KernelEstimate:
    value: complex
    std_error: float
    n_paths: int
    prefactor: float
    q: tuple
    qprime: tuple
    config: FkConfig
    potential: str = "zero"
    vector_potential: str = "zero"
    chunk_sums: tuple = ()  # per-chunk complex sums, for convergence plots

    @property
    def abs_value(self) -> float:
        return abs(self.value)

    def running_means(self) -> np.ndarray:
        """Cumulative estimate after each chunk (prefactor applied)."""
        sums = np.cumsum(np.asarray(self.chunk_sums))
        counts = np.cumsum([min(CHUNK, self.n_paths - i * CHUNK) for i in range(len(sums))])
        return self.prefactor * sums / counts

    def to_dict(self) -> dict:
        cfg = self.config
        return {
            "value_re": self.value.real,
            "value_im": self.value.imag,
            "std_error": self.std_error,
            "n_paths": self.n_paths,
            "n_steps": cfg.n_steps,
            "beta": cfg.beta,
            "hbar": cfg.hbar,
            "dim": cfg.dim,
            "seed": cfg.seed,
            "q": list(self.q),
            "qprime": list(self.qprime),
            "potential": self.potential,
            "vector_potential": self.vector_potential,
        }


def _point(x, dim: int) -> np.ndarray:
    p = np.atleast_1d(np.asarray(x, dtype=float))
    if p.shape != (dim,):
        raise ValueError(f"point {x!r} does not have dimension {dim}")
    return p


def free_kernel(cfg: FkConfig, q, qprime) -> float:
    """(2 pi beta hbar^2)^(-d/2) * exp(-|q - q'|^2 / (2 beta hbar^2))."""
    q = _point(q, cfg.dim)
    qp = _point(qprime, cfg.dim)
    T = cfg.total_time
    dist2 = float(np.sum((q - qp) ** 2))
    return (2.0 * math.pi * T) ** (-0.5 * cfg.dim) * math.exp(-dist2 / (2.0 * T))


def landau_abs_kernel(b0: float, cfg: FkConfig, q, qprime) -> float:
    """Modulus of the planar constant-field kernel.

    (B0 / 4 pi hbar) / sinh(beta hbar B0 / 2)
        * exp(-(q1-q1')^2 (B0 / 4 hbar) / tanh(beta hbar B0 / 2)
              - (q2-q2')^2 / (2 beta hbar^2));
    the B0 -> 0 limit is the planar free kernel.
    """
    if cfg.dim != 2:
        raise ValueError("constant-field kernel is planar (dim 2)")
    if b0 < 0:
        raise ValueError("B0 must be non-negative (the modulus ignores the sign)")
    q = _point(q, 2)
    qp = _point(qprime, 2)
    if b0 == 0.0:
        return free_kernel(cfg, q, qp)
    half = 0.5 * cfg.beta * cfg.hbar * b0
    amp = (b0 / (4.0 * math.pi * cfg.hbar)) / math.sinh(half)
    gauss1 = (q[0] - qp[0]) ** 2 * (b0 / (4.0 * cfg.hbar)) / math.tanh(half)
    gauss2 = (q[1] - qp[1]) ** 2 / (2.0 * cfg.beta * cfg.hbar**2)
    return amp * math.exp(-gauss1 - gauss2)


def _trap_weights(beta: float, n_steps: int) -> np.ndarray:
    w = np.full(n_steps + 1, beta / n_steps)
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def _actions(nodes: np.ndarray, v: ScalarPotential, cfg: FkConfig) -> np.ndarray:
    """Trapezoid-rule integral of v along each path, in imaginary time."""
    vals = v.evaluate(nodes)
    return vals @ _trap_weights(cfg.beta, cfg.n_steps)


def _phases(nodes: np.ndarray, a: VectorPotential, cfg: FkConfig) -> np.ndarray:
    """Mid-point line integral sum a(mid) . dx, divided by hbar."""
    if isinstance(a, ZeroVector):
        return np.zeros(nodes.shape[:-2])
    mids = 0.5 * (nodes[..., :-1, :] + nodes[..., 1:, :])
    dx = np.diff(nodes, axis=-2)
    return np.sum(a.evaluate(mids) * dx, axis=(-2, -1)) / cfg.hbar


def _check_grid(path: BridgePath, cfg: FkConfig):
    if abs(path.grid.total_time - cfg.total_time) > 1e-12 * max(1.0, cfg.total_time):
        raise ValueError("path grid total_time does not match beta * hbar^2")
    if path.grid.n_steps != cfg.n_steps or path.grid.dim != cfg.dim:
        raise ValueError("path grid does not match the kernel config")


def scalar_action(path: BridgePath, v: ScalarPotential, cfg: FkConfig) -> float:
    _check_grid(path, cfg)
    return float(_actions(path.nodes, v, cfg))


def magnetic_phase(path: BridgePath, a: VectorPotential, cfg: FkConfig) -> float:
    _check_grid(path, cfg)
    return float(_phases(path.nodes, a, cfg))


def _chunk_ranges(n_paths: int):
    return [(i, min(CHUNK, n_paths - i)) for i in range(0, n_paths, CHUNK)]


def estimate_kernels(
    cfg: FkConfig,
    v: ScalarPotential,
    a: VectorPotential,
    pairs: Sequence[tuple],
    workers: int = 1,
) -> list[KernelEstimate]:
    """Kernel estimates for several (q, q') pairs on one shared path sample.

    All pairs see the same underlying Wiener paths (bridges are affine
    transforms of them), which is the common-random-numbers coupling used
    by the inequality checks.  Reduction runs in fixed chunk order, so the
    result is independent of `workers`.
    """
    pts = [(_point(q, cfg.dim), _point(qp, cfg.dim)) for q, qp in pairs]
    grid = cfg.grid()
    ranges = _chunk_ranges(cfg.n_paths)

    def one_chunk(args):
        first, count = args
        w = wiener_block(grid, cfg.seed, first, count)
        out = []
        for q, qp in pts:
            x = bridge_nodes(w, grid, qp, q)
            s = _actions(x, v, cfg)
            log_w = -s
            if np.any(log_w > MAX_LOG_WEIGHT):
                bad = int(np.argmax(log_w > MAX_LOG_WEIGHT))
                raise EstimateOverflowError(first + bad, float(log_w[bad]))
            z = np.exp(log_w + 1j * _phases(x, a, cfg))
            out.append((complex(z.sum()), float(np.vdot(z, z).real)))
        return out

    if workers > 1 and len(ranges) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunk_results = list(pool.map(one_chunk, ranges))
    else:
        chunk_results = [one_chunk(r) for r in ranges]

    estimates = []
    n = cfg.n_paths
    for ip, (q, qp) in enumerate(pts):
        chunk_sums = [chunk_results[ic][ip][0] for ic in range(len(ranges))]
        total = complex(sum(chunk_sums))
        total_sq = math.fsum(chunk_results[ic][ip][1] for ic in range(len(ranges)))
        mean = total / n
        # sample variance of the complex summand around its mean
        var = max(0.0, (total_sq - abs(total) ** 2 / n)) / max(1, n - 1)
        pref = free_kernel(cfg, q, qp)
        estimates.append(
            KernelEstimate(
                value=pref * mean,
                std_error=pref * math.sqrt(var / n),
                n_paths=n,
                prefactor=pref,
                q=tuple(q),
                qprime=tuple(qp),
                config=cfg,
                potential=v.spec_string(),
                vector_potential=a.spec_string(),
                chunk_sums=tuple(chunk_sums),
            )
        )
    return estimates


def estimate_kernel(
    cfg: FkConfig, v: ScalarPotential, a: VectorPotential, q, qprime, workers: int = 1
) -> KernelEstimate:
    return estimate_kernels(cfg, v, a, [(q, qprime)], workers=workers)[0]


def annealed_weight(path: BridgePath, cov, cfg: FkConfig) -> float:
    """Closed-form Gaussian disorder average of exp(-scalar action).

    For a centered Gaussian field with covariance C the average over
    realizations is exp(u^T C u / 2) where u holds the trapezoid weights of
    the action quadrature on the frozen path.
    """
    _check_grid(path, cfg)
    u = _trap_weights(cfg.beta, cfg.n_steps)
    diffs = path.nodes[:, None, :] - path.nodes[None, :, :]
    c = cov.at_lag(diffs)
    return float(math.exp(0.5 * u @ c @ u))


def annealed_diagonal_kernel(cfg: FkConfig, cov, q=None, workers: int = 1) -> KernelEstimate:
    """Disorder-averaged diagonal kernel for the zero-field Gaussian model.

    Monte Carlo over bridges from q to q of the closed-form annealed path
    weight; by stationarity the result does not depend on q.
    """
    if q is None:
        q = np.zeros(cfg.dim)
    q = _point(q, cfg.dim)
    grid = cfg.grid()
    u = _trap_weights(cfg.beta, cfg.n_steps)
    ranges = _chunk_ranges(cfg.n_paths)

    def one_chunk(args):
        first, count = args
        w = wiener_block(grid, cfg.seed, first, count)
        x = bridge_nodes(w, grid, q, q)
        total = 0.0
        total_sq = 0.0
        for sub in range(0, count, 128):  # bound the (m, n+1, n+1, dim) scratch
            xs = x[sub:sub + 128]
            diffs = xs[:, :, None, :] - xs[:, None, :, :]
            c = cov.at_lag(diffs)
            vals = np.exp(0.5 * np.einsum("i,mij,j->m", u, c, u))
            total += float(vals.sum())
            total_sq += float(vals @ vals)
        return total, total_sq

    if workers > 1 and len(ranges) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(one_chunk, ranges))
    else:
        parts = [one_chunk(r) for r in ranges]

    n = cfg.n_paths
    total = math.fsum(p[0] for p in parts)
    total_sq = math.fsum(p[1] for p in parts)
    mean = total / n
    var = max(0.0, (total_sq - total**2 / n)) / max(1, n - 1)
    pref = free_kernel(cfg, q, q)
    return KernelEstimate(
        value=complex(pref * mean),
        std_error=pref * math.sqrt(var / n),
        n_paths=n,
        prefactor=pref,
        q=tuple(q),
        qprime=tuple(q),
        config=cfg,
        potential=f"annealed:{cov.spec_string()}",
        vector_potential="zero",
    )
