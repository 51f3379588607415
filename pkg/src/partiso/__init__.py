"""Partial isometries over the truncated restricted Grassmannian.

Numerical realization of the groupoid of partial isometries on a polarized
space C^n = H₊ ⊕ H₋: graph charts on the Grassmannian, cross-sections,
groupoid charts with their coordinate structure maps, and verification suites.
"""

from .atlas import (
    CrossSection,
    GroupoidChart,
    GroupoidCoordinates,
    UnitaryChart,
    groupoid_chart_forward,
    groupoid_chart_inverse,
    groupoid_chart_transition,
    identity_in_chart,
    inversion_in_chart,
    kato_unitary,
    multiplication_in_chart,
    section_apply,
    unitary_chart_forward,
    unitary_chart_inverse,
)
from .grassmann import (
    ChartCoordinates,
    Polarization,
    RestrictedDefect,
    Subspace,
    chart_forward,
    chart_inverse,
    complement,
    in_chart_domain,
    restricted_defect,
    transition,
    transition_derivative,
)
from .groupoid import (
    ComposablePair,
    PartialIsometry,
    commutator_defect,
    compose,
    identity_arrow,
    invert,
    random_arrow,
    source,
    target,
)
from .matcore import (
    SvdResult,
    ToleranceConfig,
    herm_apply,
    orthonormal_frame,
    pinv,
    random_unitary,
    schatten_norm,
    svd,
)

__version__ = "0.1.0"
