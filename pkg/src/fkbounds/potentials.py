"""Scalar potentials, planar field profiles, vector potentials, and
stationary Gaussian random fields.

All evaluators are vectorized: scalar specs map point arrays of shape
(..., dim) to (...,), vector specs to (..., dim).  Each spec knows its CLI
mini-language string, so configs embedded in reports round-trip through
the parsers at the bottom of this module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .streams import FIELDS, stream

__all__ = [
    "ScalarPotential",
    "ZeroPotential",
    "HarmonicPotential",
    "QuarticWell",
    "FiniteWell",
    "TabulatedPotential",
    "GaussianFieldPotential",
    "BFieldProfile",
    "ConstantField",
    "SinusoidalField",
    "TabulatedField",
    "VectorPotential",
    "ZeroVector",
    "UniformVector",
    "LandauVector",
    "QuadraticGaugeVector",
    "SquaredExponentialCovariance",
    "FieldRealization",
    "eval_scalar",
    "eval_vector",
    "landau_vector_from_b",
    "sample_gaussian_field",
    "field_stream",
    "laplace_moment",
    "parse_scalar",
    "parse_bfield",
    "parse_vector",
    "parse_covariance",
]


def _points(x) -> np.ndarray:
    p = np.asarray(x, dtype=float)
    if p.ndim == 0:
        raise ValueError("a point must have at least one coordinate")
    return p


# ---------------------------------------------------------------------------
# scalar potentials


class ScalarPotential:
    """Base class; subclasses implement evaluate() on (..., dim) arrays."""

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, x) -> np.ndarray:
        return self.evaluate(_points(x))

    def spec_string(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class ZeroPotential(ScalarPotential):
    def evaluate(self, x):
        return np.zeros(x.shape[:-1])

    def spec_string(self):
        return "zero"


@dataclass(frozen=True)
class HarmonicPotential(ScalarPotential):
    """v(q) = omega^2 |q|^2 / 2 (unit mass)."""

    omega: float = 1.0

    def evaluate(self, x):
        return 0.5 * self.omega**2 * np.sum(x * x, axis=-1)

    def spec_string(self):
        return f"harmonic:{self.omega:g}"


@dataclass(frozen=True)
class QuarticWell(ScalarPotential):
    """v(q) = g |q|^4."""

    strength: float = 1.0

    def evaluate(self, x):
        r2 = np.sum(x * x, axis=-1)
        return self.strength * r2 * r2

    def spec_string(self):
        return f"quartic:{self.strength:g}"


@dataclass(frozen=True)
class FiniteWell(ScalarPotential):
    """Square well of the given depth on |q| <= width/2, zero outside."""

    depth: float
    width: float

    def __post_init__(self):
        if self.width <= 0:
            raise ValueError("well width must be positive")

    def evaluate(self, x):
        r = np.sqrt(np.sum(x * x, axis=-1))
        return np.where(r <= 0.5 * self.width, -self.depth, 0.0)

    def spec_string(self):
        return f"well:{self.depth:g},{self.width:g}"


def _interp_clamped(xq, xs, ys):
    # linear interpolation, constant beyond the table ends
    return np.interp(xq, xs, ys)


@dataclass(frozen=True)
class TabulatedPotential(ScalarPotential):
    """Potential tabulated against the first coordinate.

    Linear interpolation between table points, boundary value outside.
    """

    xs: tuple
    vs: tuple
    source: str = ""

    def __post_init__(self):
        if len(self.xs) < 2 or len(self.xs) != len(self.vs):
            raise ValueError("tabulated potential needs >= 2 (x, v) rows")
        if not np.all(np.diff(self.xs) > 0):
            raise ValueError("tabulated abscissae must be strictly increasing")

    def evaluate(self, x):
        return _interp_clamped(x[..., 0], np.asarray(self.xs), np.asarray(self.vs))

    def spec_string(self):
        return f"tab:{self.source}" if self.source else "tab:<inline>"


@dataclass(frozen=True)
class GaussianFieldPotential(ScalarPotential):
    field: "FieldRealization"

    def evaluate(self, x):
        return self.field.evaluate(x)

    def spec_string(self):
        return self.field.source or "field:<inline>"


# ---------------------------------------------------------------------------
# perpendicular field profiles b(q1) and planar vector potentials


class BFieldProfile:
    """Field strength as a function of the first coordinate only."""

    def field(self, r: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def integral(self, r: np.ndarray) -> np.ndarray:
        """Running integral of the profile from 0 to r."""
        raise NotImplementedError

    def __call__(self, r) -> np.ndarray:
        return self.field(np.asarray(r, dtype=float))

    def spec_string(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class ConstantField(BFieldProfile):
    b0: float

    def field(self, r):
        return np.full_like(np.asarray(r, dtype=float), self.b0)

    def integral(self, r):
        return self.b0 * np.asarray(r, dtype=float)

    def spec_string(self):
        return f"const:{self.b0:g}"


@dataclass(frozen=True)
class SinusoidalField(BFieldProfile):
    """b(r) = b0 + b1 * sin(kappa * r), integrated in closed form."""

    b0: float
    b1: float
    kappa: float = 1.0

    def __post_init__(self):
        if self.kappa == 0:
            raise ValueError("kappa must be nonzero; use const for a flat profile")

    def field(self, r):
        r = np.asarray(r, dtype=float)
        return self.b0 + self.b1 * np.sin(self.kappa * r)

    def integral(self, r):
        r = np.asarray(r, dtype=float)
        return self.b0 * r + (self.b1 / self.kappa) * (1.0 - np.cos(self.kappa * r))

    def spec_string(self):
        return f"sin:{self.b0:g},{self.b1:g},{self.kappa:g}"


PANELS_PER_UNIT = 1000  # cumulative-trapezoid resolution for tabulated profiles


@dataclass(frozen=True)
class TabulatedField(BFieldProfile):
    """Profile tabulated on (r, b) rows; constant beyond the table ends.

    The running integral is precomputed on a dense trapezoid grid anchored
    at r = 0 and extended linearly outside (where b is constant).
    """

    rs: tuple
    bs: tuple
    source: str = ""

    def __post_init__(self):
        if len(self.rs) < 2 or len(self.rs) != len(self.bs):
            raise ValueError("tabulated profile needs >= 2 (r, b) rows")
        if not np.all(np.diff(self.rs) > 0):
            raise ValueError("tabulated abscissae must be strictly increasing")

    def field(self, r):
        return _interp_clamped(np.asarray(r, dtype=float), np.asarray(self.rs), np.asarray(self.bs))

    @cached_property
    def _dense(self):
        lo = min(0.0, self.rs[0])
        hi = max(0.0, self.rs[-1])
        n = max(2 * PANELS_PER_UNIT, int(math.ceil((hi - lo) * PANELS_PER_UNIT)))
        grid = np.linspace(lo, hi, n + 1)
        vals = self.field(grid)
        cum = np.concatenate([[0.0], np.cumsum(0.5 * (vals[1:] + vals[:-1]) * np.diff(grid))])
        cum -= np.interp(0.0, grid, cum)  # anchor the integral at r = 0
        return grid, cum

    def integral(self, r):
        r = np.asarray(r, dtype=float)
        grid, cum = self._dense
        inside = np.interp(r, grid, cum)
        below = cum[0] + self.bs[0] * (r - grid[0])
        above = cum[-1] + self.bs[-1] * (r - grid[-1])
        return np.where(r < grid[0], below, np.where(r > grid[-1], above, inside))

    def spec_string(self):
        return f"tab:{self.source}" if self.source else "tab:<inline>"


class VectorPotential:
    def evaluate(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, x) -> np.ndarray:
        return self.evaluate(_points(x))

    def spec_string(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class ZeroVector(VectorPotential):
    def evaluate(self, x):
        return np.zeros_like(x)

    def spec_string(self):
        return "zero"


@dataclass(frozen=True)
class UniformVector(VectorPotential):
    components: tuple

    def evaluate(self, x):
        c = np.asarray(self.components, dtype=float)
        if x.shape[-1] != c.shape[0]:
            raise ValueError(f"uniform vector of dim {c.shape[0]} on points of dim {x.shape[-1]}")
        return np.broadcast_to(c, x.shape).copy()

    def spec_string(self):
        return "const:" + ",".join(f"{c:g}" for c in self.components)


@dataclass(frozen=True)
class LandauVector(VectorPotential):
    """Gauge (0, integral of b up to q1) generating the profile's field."""

    profile: BFieldProfile

    def evaluate(self, x):
        if x.shape[-1] != 2:
            raise ValueError("landau gauge is defined on planar (dim 2) points")
        out = np.zeros_like(x)
        out[..., 1] = self.profile.integral(x[..., 0])
        return out

    def spec_string(self):
        return f"landau:{self.profile.spec_string()}"


@dataclass(frozen=True)
class QuadraticGaugeVector(VectorPotential):
    """Pure gauge term grad(chi) with chi(x) = coeff * x1^2."""

    coeff: float

    def evaluate(self, x):
        out = np.zeros_like(x)
        out[..., 0] = 2.0 * self.coeff * x[..., 0]
        return out

    def gauge_term(self, x) -> np.ndarray:
        x = _points(x)
        return self.coeff * x[..., 0] ** 2

    def spec_string(self):
        return f"gauge:{self.coeff:g}"


def eval_scalar(spec: ScalarPotential, x) -> np.ndarray:
    return spec(x)


def eval_vector(spec: VectorPotential, x) -> np.ndarray:
    return spec(x)


def landau_vector_from_b(profile: BFieldProfile) -> LandauVector:
    return LandauVector(profile)


# ---------------------------------------------------------------------------
# Gaussian random fields


@dataclass(frozen=True)
class SquaredExponentialCovariance:
    """C(q) = variance * exp(-|q|^2 / (2 length^2)).

    Continuous, even, decaying at infinity; its spectral density is
    Gaussian, so random-Fourier frequencies can be drawn exactly.
    """

    variance: float
    length: float

    def __post_init__(self):
        if not 0.0 < self.variance < math.inf:
            raise ValueError("variance must be positive and finite")
        if self.length <= 0:
            raise ValueError("correlation length must be positive")

    @property
    def cov0(self) -> float:
        return self.variance

    def at_lag(self, q) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        r2 = q * q if q.ndim == 0 else np.sum(q * q, axis=-1)
        return self.variance * np.exp(-r2 / (2.0 * self.length**2))

    def sample_frequencies(self, modes: int, dim: int, rng: np.random.Generator) -> np.ndarray:
        return rng.standard_normal((modes, dim)) / self.length

    def spec_string(self) -> str:
        return f"se:{self.variance:g},{self.length:g}"


@dataclass(frozen=True)
class FieldRealization:
    """One sampled field v(x) = amplitude * sum_m cos(k_m . x + phi_m).

    Smooth, stationary, mean zero; the ensemble covariance converges to the
    generating spec's C as the mode count grows.
    """

    frequencies: np.ndarray  # (modes, dim)
    phases: np.ndarray  # (modes,)
    amplitude: float
    source: str = ""

    @property
    def modes(self) -> int:
        return self.frequencies.shape[0]

    @property
    def dim(self) -> int:
        return self.frequencies.shape[1]

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise ValueError(f"field of dim {self.dim} evaluated at points of dim {x.shape[-1]}")
        # (..., modes) phase matrix; fine for desk-scale mode counts
        ph = x @ self.frequencies.T + self.phases
        return self.amplitude * np.cos(ph).sum(axis=-1)

    def __call__(self, x) -> np.ndarray:
        return self.evaluate(_points(x))


def field_stream(seed: int, index: int) -> np.random.Generator:
    """Stream for disorder realization `index` under master `seed`."""
    return stream(seed, FIELDS, index)


def sample_gaussian_field(
    cov, modes: int, rng: np.random.Generator, dim: int = 1
) -> FieldRealization:
    """Random-Fourier-feature synthesis of a stationary Gaussian field."""
    if modes < 1:
        raise ValueError("modes must be at least 1")
    if not isinstance(cov, SquaredExponentialCovariance):
        raise ValueError(f"unsupported covariance kind: {type(cov).__name__}")
    freqs = cov.sample_frequencies(modes, dim, rng)
    phases = rng.uniform(0.0, 2.0 * math.pi, modes)
    amp = math.sqrt(cov.variance) * math.sqrt(2.0 / modes)
    return FieldRealization(freqs, phases, amp)


def laplace_moment(cov, beta: float) -> float:
    """sup over positions of the disorder average of exp(-beta * v).

    For a centered stationary Gaussian field the average is position
    independent and equals exp(beta^2 C(0) / 2).
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    return math.exp(0.5 * beta**2 * cov.cov0)


# ---------------------------------------------------------------------------
# mini-language parsing (shared by the CLI)


def _floats(text: str, n: int, what: str) -> list[float]:
    parts = text.split(",")
    if len(parts) != n:
        raise ValueError(f"{what} expects {n} comma-separated numbers, got {text!r}")
    return [float(p) for p in parts]


def _load_table(path: str) -> tuple[tuple, tuple]:
    rows = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line:
            continue
        parts = line.replace(",", " ").split()
        try:
            rows.append((float(parts[0]), float(parts[1])))
        except (ValueError, IndexError):
            if not rows:
                continue  # tolerate one header line
            raise ValueError(f"bad table row in {path}: {line!r}")
    if len(rows) < 2:
        raise ValueError(f"table {path} needs at least 2 rows")
    xs, ys = zip(*rows)
    return xs, ys


def parse_scalar(text: str) -> ScalarPotential:
    """`zero`, `harmonic:OMEGA`, `quartic:G`, `well:DEPTH,WIDTH`,
    `field:SIGMA2,ELL,MODES,SEED[,DIM]`, `tab:PATH.csv`."""
    kind, _, rest = text.partition(":")
    if kind == "zero":
        return ZeroPotential()
    if kind == "harmonic":
        return HarmonicPotential(float(rest))
    if kind == "quartic":
        return QuarticWell(float(rest))
    if kind == "well":
        depth, width = _floats(rest, 2, "well")
        return FiniteWell(depth, width)
    if kind == "field":
        parts = rest.split(",")
        if len(parts) not in (4, 5):
            raise ValueError(f"field expects SIGMA2,ELL,MODES,SEED[,DIM], got {rest!r}")
        sigma2, ell = float(parts[0]), float(parts[1])
        modes, seed = int(parts[2]), int(parts[3])
        dim = int(parts[4]) if len(parts) == 5 else 1
        cov = SquaredExponentialCovariance(sigma2, ell)
        realization = sample_gaussian_field(cov, modes, field_stream(seed, 0), dim)
        realization = FieldRealization(
            realization.frequencies, realization.phases, realization.amplitude,
            source=f"field:{text.partition(':')[2]}",
        )
        return GaussianFieldPotential(realization)
    if kind == "tab":
        xs, vs = _load_table(rest)
        return TabulatedPotential(xs, vs, source=rest)
    raise ValueError(f"unknown scalar potential kind {kind!r}")


def parse_bfield(text: str) -> BFieldProfile:
    """`const:B0`, `sin:B0,B1,KAPPA`, `tab:PATH.csv`."""
    kind, _, rest = text.partition(":")
    if kind == "const":
        return ConstantField(float(rest))
    if kind == "sin":
        b0, b1, kappa = _floats(rest, 3, "sin")
        return SinusoidalField(b0, b1, kappa)
    if kind == "tab":
        rs, bs = _load_table(rest)
        return TabulatedField(rs, bs, source=rest)
    raise ValueError(f"unknown field profile kind {kind!r}")


def parse_vector(text: str) -> VectorPotential:
    """`zero`, `landau:<profile>`, `const:C1,C2,...`, `gauge:C`."""
    kind, _, rest = text.partition(":")
    if kind == "zero":
        return ZeroVector()
    if kind == "landau":
        return LandauVector(parse_bfield(rest))
    if kind == "const":
        return UniformVector(tuple(float(p) for p in rest.split(",")))
    if kind == "gauge":
        return QuadraticGaugeVector(float(rest))
    raise ValueError(f"unknown vector potential kind {kind!r}")


def parse_covariance(text: str) -> SquaredExponentialCovariance:
    """`se:SIGMA2,ELL`."""
    kind, _, rest = text.partition(":")
    if kind == "se":
        sigma2, ell = _floats(rest, 2, "se")
        return SquaredExponentialCovariance(sigma2, ell)
    raise ValueError(f"unsupported covariance kind {kind!r}")
