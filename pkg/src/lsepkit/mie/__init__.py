"""Electromagnetic response of a homogeneous sphere: partial-wave
coefficients, cross-section efficiencies, near fields, and energy-flow
streamlines."""

from .fields import (
    DOMAIN_RADIUS_FACTOR,
    EvaluationTooFarOut,
    FieldGrid,
    FieldSample,
    Streamline,
    Termination,
    ZeroPoyntingVector,
    near_field,
    near_field_grid,
    poynting,
    poynting_streamlines,
)
from .scatter import (
    MAX_SIZE_PARAMETER,
    EfficiencySet,
    EfficiencySpectrum,
    MieCoefficients,
    QuasistaticResponse,
    RecurrenceUnstable,
    SizeParameterOutOfRange,
    SphereScene,
    efficiencies,
    mie_coefficients,
    multipole_cutoff,
    qabs_spectrum,
    qabs_transient,
    quasistatic_polarizability,
)

__all__ = [
    "DOMAIN_RADIUS_FACTOR",
    "MAX_SIZE_PARAMETER",
    "EfficiencySet",
    "EfficiencySpectrum",
    "EvaluationTooFarOut",
    "FieldGrid",
    "FieldSample",
    "MieCoefficients",
    "QuasistaticResponse",
    "RecurrenceUnstable",
    "SizeParameterOutOfRange",
    "SphereScene",
    "Streamline",
    "Termination",
    "ZeroPoyntingVector",
    "efficiencies",
    "mie_coefficients",
    "multipole_cutoff",
    "near_field",
    "near_field_grid",
    "poynting",
    "poynting_streamlines",
    "qabs_spectrum",
    "qabs_transient",
    "quasistatic_polarizability",
]
