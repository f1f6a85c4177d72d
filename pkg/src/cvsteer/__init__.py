"""Two-mode Gaussian entanglement toolkit.

Covariance-matrix simulation of squeezed-light sources, conditional-variance
steering and inseparability criteria, reconstruction from six-variance
measurement campaigns, seeded Monte Carlo homodyne sampling, and loss-model
fitting of the overall efficiency.
"""

from .gaussian import (
    CovarianceMatrix,
    LossChannel,
    SourceParams,
    SymplecticTransform,
    apply_loss,
    apply_symplectic,
    beamsplitter,
    build_epr_source,
    compose,
    is_physical,
    phase_shift,
    quadrature_variance,
    squeezer,
    symplectic_eigenvalues,
    symplectic_eigenvalues_two_mode,
    symplectic_form,
    vacuum_state,
)
from .criteria import (
    CriteriaReport,
    GainPair,
    UNIT_GAINS,
    conditional_variance,
    criteria_report,
    duan_sum,
    optimal_gain,
    reid_product,
)
from .reconstruction import (
    InconsistentDataError,
    MeasurementSet,
    PhysicalityWarning,
    covariance_from_sum,
    expected_measurements,
    propagate_errors,
    reconstruct,
)
from .sampler import (
    MeasurementSetting,
    SampleBatch,
    campaign_batches,
    canonical_settings,
    measure_campaign,
    sample_quadratures,
    sample_variance,
    samples_to_csv,
)
from .loss_model import (
    LossFit,
    budget_prep_efficiency,
    db_to_variance,
    detected_variance,
    efficiency_decomposition,
    fit_efficiency,
    forward_covariance,
    variance_to_db,
)

__version__ = "0.1.0"

__all__ = [
    "CovarianceMatrix",
    "SymplecticTransform",
    "LossChannel",
    "SourceParams",
    "vacuum_state",
    "squeezer",
    "phase_shift",
    "beamsplitter",
    "compose",
    "apply_symplectic",
    "apply_loss",
    "symplectic_eigenvalues",
    "symplectic_eigenvalues_two_mode",
    "symplectic_form",
    "is_physical",
    "quadrature_variance",
    "build_epr_source",
    "GainPair",
    "UNIT_GAINS",
    "CriteriaReport",
    "conditional_variance",
    "optimal_gain",
    "reid_product",
    "duan_sum",
    "criteria_report",
    "MeasurementSet",
    "InconsistentDataError",
    "PhysicalityWarning",
    "covariance_from_sum",
    "reconstruct",
    "propagate_errors",
    "expected_measurements",
    "MeasurementSetting",
    "SampleBatch",
    "canonical_settings",
    "sample_quadratures",
    "sample_variance",
    "measure_campaign",
    "campaign_batches",
    "samples_to_csv",
    "LossFit",
    "forward_covariance",
    "fit_efficiency",
    "efficiency_decomposition",
    "budget_prep_efficiency",
    "detected_variance",
    "db_to_variance",
    "variance_to_db",
]
