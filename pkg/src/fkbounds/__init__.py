"""fkbounds: path-integral Monte Carlo kernels and bound verification.

The package estimates Boltzmann-Gibbs kernels <q|exp(-beta H(a,v))|q'> by
averaging exponential path functionals over discretized Brownian bridges,
cross-checks the estimates against a dense lattice Hamiltonian, and uses
both routes to verify three inequalities at desk scale: the diamagnetic
inequality, the quasi-classical upper bound on the integrated density of
states, and the planar diamagnetic monotonicity for fields ordered by
|b| <= B.
"""

from .errors import EstimateOverflowError, HypothesisError, TooLargeError
from .ids import (
    BoundCurve,
    IdsCurve,
    bound_curves,
    compare_ids_to_bounds,
    estimate_ids,
    optimized_quasiclassical_bound,
    quasiclassical_bound,
    weyl_asymptote,
)
from .inequalities import (
    PathStats,
    VerificationReport,
    diamagnetic_check,
    effective_kernel_1d,
    monotonicity_check,
    path_mean_variance,
    variance_comparison_check,
)
from .kernel import (
    FkConfig,
    KernelEstimate,
    annealed_diagonal_kernel,
    annealed_weight,
    estimate_kernel,
    estimate_kernels,
    free_kernel,
    landau_abs_kernel,
    magnetic_phase,
    scalar_action,
)
from .lattice import (
    LatticeOperator,
    LatticeSpec,
    build_lattice_hamiltonian,
    count_states,
    oracle_kernel,
)
from .paths import (
    BridgePath,
    MomentReport,
    PathGrid,
    WienerPath,
    independence_report,
    make_grid,
    moment_report,
    path_stream,
    sample_wiener,
    sample_wiener_ensemble,
    to_bridge,
    to_bridge_ensemble,
)
from .potentials import (
    BFieldProfile,
    ConstantField,
    FieldRealization,
    FiniteWell,
    GaussianFieldPotential,
    HarmonicPotential,
    LandauVector,
    QuadraticGaugeVector,
    ScalarPotential,
    SinusoidalField,
    SquaredExponentialCovariance,
    TabulatedField,
    TabulatedPotential,
    UniformVector,
    VectorPotential,
    ZeroPotential,
    ZeroVector,
    eval_scalar,
    eval_vector,
    landau_vector_from_b,
    laplace_moment,
    sample_gaussian_field,
)

__version__ = "0.1.0"
