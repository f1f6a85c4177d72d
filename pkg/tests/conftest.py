import numpy as np
import pytest

from cvsteer import (
    CovarianceMatrix,
    LossChannel,
    SourceParams,
    apply_loss,
    apply_symplectic,
    beamsplitter,
    build_epr_source,
    compose,
    phase_shift,
    squeezer,
    vacuum_state,
)
from cvsteer.reference import REFERENCE_MEASUREMENTS, reference_state


@pytest.fixture
def ref_ms():
    return REFERENCE_MEASUREMENTS


@pytest.fixture
def ref_state():
    return reference_state()


def random_transform(rng, n_modes=2):
    """Random symplectic built from a few squeezers, rotations and splitters.

    Squeezing is capped so covariance entries stay ~1e3; eigensolver noise on
    the symplectic spectrum then stays well below the 1e-9 physicality gate.
    """
    parts = []
    for _ in range(rng.integers(1, 4)):
        kind = rng.integers(0, 3)
        if kind == 0:
            parts.append(squeezer(rng.uniform(-1.2, 1.2), rng.integers(0, n_modes), n_modes))
        elif kind == 1:
            parts.append(phase_shift(rng.uniform(-np.pi, np.pi),
                                     rng.integers(0, n_modes), n_modes))
        elif n_modes >= 2:
            a, b = rng.choice(n_modes, size=2, replace=False)
            parts.append(beamsplitter(rng.uniform(0.0, 1.0), int(a), int(b), n_modes))
        else:
            parts.append(phase_shift(rng.uniform(-np.pi, np.pi), 0, n_modes))
    return compose(*parts)


def random_physical_state(rng, n_modes=2, with_loss=True):
    """Random physical state: symplectic on vacuum, optionally with loss."""
    state = apply_symplectic(vacuum_state(n_modes), random_transform(rng, n_modes))
    if with_loss:
        for mode in range(n_modes):
            if rng.random() < 0.7:
                state = apply_loss(state, LossChannel(mode, rng.uniform(0.3, 1.0),
                                                      rng.uniform(0.0, 0.05)))
    return state


def random_single_mode_state(rng):
    """Random physical single-mode state: squeezed, rotated, lossy."""
    state = apply_symplectic(vacuum_state(1), squeezer(rng.uniform(-2.0, 2.0), 0, 1))
    state = apply_symplectic(state, phase_shift(rng.uniform(-np.pi, np.pi), 0, 1))
    if rng.random() < 0.8:
        state = apply_loss(state, LossChannel(0, rng.uniform(0.2, 1.0), rng.uniform(0.0, 0.1)))
    return state


def random_product_state(rng):
    """Two independent single-mode states as one separable two-mode state."""
    g1 = random_single_mode_state(rng).entries
    g2 = random_single_mode_state(rng).entries
    m = np.zeros((4, 4))
    m[:2, :2] = g1
    m[2:, 2:] = g2
    return CovarianceMatrix(n_modes=2, entries=m)


def random_source_state(rng):
    """Random source-model output; relative phase pi/2 keeps X-P cross terms zero."""
    params = SourceParams(
        r1=rng.uniform(0.0, 2.0),
        r2=rng.uniform(0.0, 2.0),
        eta_prep=rng.uniform(0.5, 1.0),
        eta_det_a=rng.uniform(0.5, 1.0),
        eta_det_b=rng.uniform(0.5, 1.0),
        dark_noise=rng.uniform(0.0, 0.01),
    )
    return build_epr_source(params)
