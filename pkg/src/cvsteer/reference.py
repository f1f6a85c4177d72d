"""Built-in reference dataset: a published six-measurement campaign on a
strongly two-mode-squeezed state, and the headline values the `repro`
command checks against.

All variances are in vacuum units, measured at a 5 MHz Fourier frequency
(RBW 300 kHz, VBW 300 Hz labels carried as metadata only).
"""

from __future__ import annotations

import numpy as np

from .gaussian import CovarianceMatrix
from .reconstruction import MeasurementSet

REFERENCE_MEASUREMENTS = MeasurementSet(
    var_xa=18.41,
    var_pa=35.49,
    var_xb=17.98,
    var_pb=34.61,
    var_x_diff=0.21,
    var_p_sum=0.20,
    relative_error=0.05,
    metadata={"fourier_frequency_hz": 5.0e6, "rbw_hz": 300.0e3, "vbw_hz": 300.0},
)

# Reconstructed from the six measurements above; X-P cross terms are zero by
# the experimental arrangement, not measured.
REFERENCE_COVARIANCE = np.array([
    [18.41,   0.00, 18.09,   0.00],
    [ 0.00,  35.49,  0.00, -34.95],
    [18.09,   0.00, 17.98,   0.00],
    [ 0.00, -34.95,  0.00,  34.61],
])

# Headline reference values with the tolerances the repro gate applies.
REID_B_GIVEN_A = 0.039
REID_A_GIVEN_B = 0.041
REID_TOL = 0.001
UNIT_GAIN_PRODUCT = 0.042
UNIT_GAIN_TOL = 0.001
DUAN_SUM = 0.41
DUAN_TOL = 0.01
OPTIMAL_GAIN_X_B_GIVEN_A = 0.98262
OPTIMAL_GAIN_P_B_GIVEN_A = -0.98478
OPTIMAL_GAIN_TOL = 0.001
CONDITIONAL_UNCERTAINTY_RATIO = 0.2
CONDITIONAL_UNCERTAINTY_TOL = 0.02
OVERALL_EFFICIENCY = 0.92
OVERALL_EFFICIENCY_TOL = 0.04
PREP_EFFICIENCY = 0.95
PREP_EFFICIENCY_TOL = 0.01
DETECTION_EFFICIENCY = 0.97
DETECTION_EFFICIENCY_TOL = 0.01

# Loss budget entering the preparation efficiency.
INTERNAL_LOSS = 0.025
PROPAGATION_LOSS = 0.01
FRINGE_VISIBILITY = 0.993

DARK_NOISE_CLEARANCE_DB = 22.0


def reference_state() -> CovarianceMatrix:
    """The reference covariance matrix as a state object."""
    return CovarianceMatrix(n_modes=2, entries=REFERENCE_COVARIANCE)
