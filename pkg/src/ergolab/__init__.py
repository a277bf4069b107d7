"""Exact measure-preserving systems and multiple ergodic averages at desk scale."""

from .averages import (
    AverageSeries,
    Certificate,
    dyadic,
    l2_multicorrelation_defect,
    positivity_certificate,
    roth_average,
    scalar_multicorrelation,
)
from .correspondence import DensitySet, count_3aps, cyclic_roth_average
from .errors import (
    ClassMismatchError,
    CostGuardError,
    DomainError,
    ErgolabError,
    HorizonError,
    UnsupportedError,
    VerificationError,
)
from .joinings import (
    JoiningEstimate,
    empirical_joining_3,
    empirical_joining_6,
    invariance_defect,
    product_splitting_defect,
)
from .measure_algebra import (
    IntervalSet,
    PhaseSum,
    StepFunction,
    TrigPolynomial,
    indicator,
    integrate,
    intersect,
    l2_norm,
    l2_squared,
    multiply,
    normalize,
    sup_norm,
    union,
)
from .spectral import (
    KroneckerProjector,
    ReturnBound,
    continued_fraction,
    kronecker_projector,
    koopman_matrix,
    syndetic_return_bound,
    weak_mixing_defect,
)
from .systems import (
    CyclicShift,
    Identity,
    Product,
    RankOneTower,
    Rotation,
    TorusAutomorphism,
    apply_set,
    cat_map,
    chacon_stage,
    character_orbit,
    golden_approximant,
    koopman_apply,
)

__version__ = "0.1.0"
