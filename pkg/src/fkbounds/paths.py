"""Discretized Wiener paths, bridge paths, and moment diagnostics.

Wiener paths start at the origin with i.i.d. Gaussian increments of
component variance equal to the grid step.  Bridge paths with prescribed
endpoints are obtained from a Wiener path by the affine transform

    bridge(t) = w(t) + start - (t/T) * (w(T) + start - end),

whose image measure is the Brownian bridge; the same underlying Wiener
sample therefore serves both free-measure tests and bridge estimates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np

from .streams import PATHS, stream

__all__ = [
    "PathGrid",
    "WienerPath",
    "BridgePath",
    "WienerEnsemble",
    "BridgeEnsemble",
    "MomentProbe",
    "MomentReport",
    "make_grid",
    "path_stream",
    "sample_wiener",
    "sample_wiener_ensemble",
    "wiener_block",
    "bridge_nodes",
    "to_bridge",
    "to_bridge_ensemble",
    "moment_report",
    "independence_report",
]


@dataclass(frozen=True)
class PathGrid:
    """Uniform time grid on [0, total_time] with n_steps steps in dim dimensions."""

    total_time: float
    n_steps: int
    dim: int

    def __post_init__(self):
        if not self.total_time > 0.0:
            raise ValueError(f"total_time must be positive, got {self.total_time}")
        if self.n_steps < 1:
            raise ValueError(f"n_steps must be at least 1, got {self.n_steps}")
        if self.dim < 1:
            raise ValueError(f"dim must be at least 1, got {self.dim}")

    @property
    def step(self) -> float:
        return self.total_time / self.n_steps

    def times(self) -> np.ndarray:
        """Node times t_k = k * step, k = 0 .. n_steps."""
        return self.step * np.arange(self.n_steps + 1)

    def node_index(self, t: float) -> int:
        """Index of the grid node at time t; raises if t is off-grid."""
        k = int(round(t / self.step))
        if k < 0 or k > self.n_steps or abs(k * self.step - t) > 1e-9 * max(self.total_time, 1.0):
            raise ValueError(f"time {t} is not a node of the grid (step {self.step})")
        return k


def make_grid(total_time: float, n_steps: int, dim: int) -> PathGrid:
    return PathGrid(float(total_time), int(n_steps), int(dim))


@dataclass(frozen=True)
class WienerPath:
    grid: PathGrid
    nodes: np.ndarray  # (n_steps + 1, dim), nodes[0] == 0


@dataclass(frozen=True)
class BridgePath:
    grid: PathGrid
    start: np.ndarray
    end: np.ndarray
    nodes: np.ndarray  # (n_steps + 1, dim), exact endpoints


@dataclass(frozen=True)
class WienerEnsemble:
    grid: PathGrid
    nodes: np.ndarray  # (n_paths, n_steps + 1, dim)

    def __len__(self) -> int:
        return self.nodes.shape[0]


@dataclass(frozen=True)
class BridgeEnsemble:
    grid: PathGrid
    start: np.ndarray
    end: np.ndarray
    nodes: np.ndarray  # (n_paths, n_steps + 1, dim)

    def __len__(self) -> int:
        return self.nodes.shape[0]


def path_stream(seed: int, index: int) -> np.random.Generator:
    """Stream for path `index` under master `seed`; one stream per path."""
    return stream(seed, PATHS, index)


def sample_wiener(grid: PathGrid, rng: np.random.Generator) -> WienerPath:
    """Draw one Wiener path: origin start, Gaussian increments of variance step."""
    incr = rng.standard_normal((grid.n_steps, grid.dim)) * math.sqrt(grid.step)
    nodes = np.empty((grid.n_steps + 1, grid.dim))
    nodes[0] = 0.0
    np.cumsum(incr, axis=0, out=nodes[1:])
    return WienerPath(grid, nodes)


def wiener_block(grid: PathGrid, seed: int, first_index: int, count: int) -> np.ndarray:
    """Node array (count, n_steps+1, dim); path i uses stream (seed, first_index+i).

    The per-path streams make the block independent of how calls are split:
    wiener_block(g, s, 0, 10) stacks the same paths as two blocks of 5.
    """
    sqrt_step = math.sqrt(grid.step)
    nodes = np.empty((count, grid.n_steps + 1, grid.dim))
    nodes[:, 0] = 0.0
    for i in range(count):
        rng = path_stream(seed, first_index + i)
        np.cumsum(
            rng.standard_normal((grid.n_steps, grid.dim)) * sqrt_step,
            axis=0,
            out=nodes[i, 1:],
        )
    return nodes


def sample_wiener_ensemble(
    grid: PathGrid, seed: int, n_paths: int, first_index: int = 0
) -> WienerEnsemble:
    return WienerEnsemble(grid, wiener_block(grid, seed, first_index, n_paths))


def _as_point(x, dim: int) -> np.ndarray:
    p = np.atleast_1d(np.asarray(x, dtype=float))
    if p.shape != (dim,):
        raise ValueError(f"point of dimension {p.shape} does not match grid dim {dim}")
    return p


def bridge_nodes(
    wiener: np.ndarray, grid: PathGrid, start: np.ndarray, end: np.ndarray
) -> np.ndarray:
    """Affine bridge transform applied nodewise to (..., n_steps+1, dim) arrays.

    The final node is assigned `end` exactly, so the endpoint constraint
    carries no floating-point drift.
    """
    frac = grid.times() / grid.total_time
    out = wiener + start - frac[:, None] * (wiener[..., -1:, :] + start - end)
    out[..., 0, :] = start
    out[..., -1, :] = end
    return out


def to_bridge(w: WienerPath, start, end) -> BridgePath:
    start = _as_point(start, w.grid.dim)
    end = _as_point(end, w.grid.dim)
    return BridgePath(w.grid, start, end, bridge_nodes(w.nodes, w.grid, start, end))


def to_bridge_ensemble(ens: WienerEnsemble, start, end) -> BridgeEnsemble:
    start = _as_point(start, ens.grid.dim)
    end = _as_point(end, ens.grid.dim)
    return BridgeEnsemble(ens.grid, start, end, bridge_nodes(ens.nodes, ens.grid, start, end))


@dataclass(frozen=True)
class MomentProbe:
    kind: str  # "mean" | "cov" | "endpoint_corr"
    t: float
    s: float | None
    j: int
    k: int | None
    empirical: float
    target: float
    std_error: float
    z_score: float

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "t": self.t,
            "s": self.s,
            "j": self.j,
            "k": self.k,
            "empirical": self.empirical,
            "target": self.target,
            "std_error": self.std_error,
            "z_score": self.z_score,
        }


@dataclass(frozen=True)
class MomentReport:
    sample_count: int
    probes: tuple[MomentProbe, ...] = field(default_factory=tuple)

    @property
    def max_abs_z(self) -> float:
        return max((abs(p.z_score) for p in self.probes), default=0.0)

    def to_dict(self) -> dict:
        return {
            "sample_count": self.sample_count,
            "max_abs_z": self.max_abs_z,
            "probes": [p.to_dict() for p in self.probes],
        }


def _zscore(deviation: float, se: float) -> float:
    # Degenerate probes (exactly pinned nodes) have zero spread and zero
    # deviation; report z = 0 rather than 0/0.
    if se == 0.0:
        return 0.0 if deviation == 0.0 else math.inf
    return deviation / se


PathCollection = Union[
    WienerEnsemble, BridgeEnsemble, Sequence[WienerPath], Sequence[BridgePath]
]


def _stack(paths: PathCollection):
    """Return (grid, nodes, mean_fn, cov_fn) for a homogeneous collection."""
    if isinstance(paths, (WienerEnsemble, BridgeEnsemble)):
        grid, nodes = paths.grid, paths.nodes
        is_bridge = isinstance(paths, BridgeEnsemble)
        start = paths.start if is_bridge else None
        end = paths.end if is_bridge else None
    else:
        paths = list(paths)
        if len(paths) < 2:
            raise ValueError("moment report needs at least 2 paths")
        kinds = {type(p) for p in paths}
        if len(kinds) != 1:
            raise ValueError("mixed path kinds in one collection")
        grid = paths[0].grid
        nodes = np.stack([p.nodes for p in paths])
        is_bridge = isinstance(paths[0], BridgePath)
        start = paths[0].start if is_bridge else None
        end = paths[0].end if is_bridge else None
    if nodes.shape[0] < 2:
        raise ValueError("moment report needs at least 2 paths")

    T = grid.total_time
    if is_bridge:
        mean_fn: Callable = lambda t, j: start[j] + (t / T) * (end[j] - start[j])
        cov_fn: Callable = lambda t, s, j, k: (min(t, s) - t * s / T) if j == k else 0.0
    else:
        mean_fn = lambda t, j: 0.0
        cov_fn = lambda t, s, j, k: min(t, s) if j == k else 0.0
    return grid, nodes, mean_fn, cov_fn


def moment_report(paths: PathCollection, probe_times: Sequence[float]) -> MomentReport:
    """Empirical means and covariances at probe node times, with z-scores
    against the exact Wiener or bridge targets."""
    grid, nodes, mean_fn, cov_fn = _stack(paths)
    n = nodes.shape[0]
    idx = [grid.node_index(t) for t in probe_times]
    probes: list[MomentProbe] = []
    sqrt_n = math.sqrt(n)

    for t, it in zip(probe_times, idx):
        for j in range(grid.dim):
            vals = nodes[:, it, j]
            emp = float(vals.mean())
            se = float(vals.std(ddof=1)) / sqrt_n
            target = mean_fn(t, j)
            probes.append(
                MomentProbe("mean", t, None, j, None, emp, target, se,
                            _zscore(emp - target, se))
            )

    for a, (t, it) in enumerate(zip(probe_times, idx)):
        for s, isx in zip(probe_times[a:], idx[a:]):
            for j in range(grid.dim):
                for k in range(grid.dim):
                    x = nodes[:, it, j]
                    y = nodes[:, isx, k]
                    prods = (x - x.mean()) * (y - y.mean())
                    emp = float(prods.sum()) / (n - 1)
                    se = float(prods.std(ddof=1)) / sqrt_n
                    target = cov_fn(t, s, j, k)
                    probes.append(
                        MomentProbe("cov", t, s, j, k, emp, target, se,
                                    _zscore(emp - target, se))
                    )
    return MomentReport(n, tuple(probes))


def independence_report(
    wiener: WienerEnsemble, start, end, probe_times: Sequence[float]
) -> MomentReport:
    """Correlations between w(T) and the bridge built from the same w.

    The bridge transform removes all dependence on the final Wiener point,
    so each correlation should vanish within sampling error (z = corr * sqrt(N)).
    """
    grid = wiener.grid
    bridge = to_bridge_ensemble(wiener, start, end)
    n = len(wiener)
    idx = [grid.node_index(t) for t in probe_times]
    endpoint = wiener.nodes[:, -1, :]
    probes = []
    for t, it in zip(probe_times, idx):
        for j in range(grid.dim):
            x = endpoint[:, j]
            y = bridge.nodes[:, it, j]
            sx, sy = x.std(), y.std()
            if sx == 0.0 or sy == 0.0:
                corr = 0.0
            else:
                corr = float(np.corrcoef(x, y)[0, 1])
            probes.append(
                MomentProbe("endpoint_corr", t, None, j, None, corr, 0.0,
                            1.0 / math.sqrt(n), corr * math.sqrt(n))
            )
    return MomentReport(n, tuple(probes))
