"""Covariance-matrix representation of zero-mean Gaussian states.

States are 2n x 2n real symmetric second-moment matrices over the quadratures
(X1, P1, X2, P2, ...), normalized so the vacuum has unit variance in every
quadrature.  Lossless optics act as symplectic matrices (S @ gamma @ S.T),
loss as a vacuum admixture channel.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

SYMMETRY_RTOL = 1e-12
SYMPLECTIC_ATOL = 1e-12
PHYSICALITY_ATOL = 1e-9


@functools.lru_cache(maxsize=None)
def symplectic_form(n_modes: int) -> np.ndarray:
    """Block-diagonal symplectic form with [[0, 1], [-1, 0]] per mode.

    Cached and returned read-only; treat as a constant.
    """
    omega = np.array([[0.0, 1.0], [-1.0, 0.0]])
    m = np.kron(np.eye(n_modes), omega)
    m.setflags(write=False)
    return m


def _as_checked_matrix(entries, n_modes: int, what: str) -> np.ndarray:
    m = np.array(entries, dtype=float)
    if n_modes < 1:
        raise ValueError(f"{what}: n_modes must be >= 1, got {n_modes}")
    if m.shape != (2 * n_modes, 2 * n_modes):
        raise ValueError(
            f"{what}: expected shape {(2 * n_modes, 2 * n_modes)}, got {m.shape}"
        )
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{what}: entries must be finite")
    return m


@dataclass(frozen=True)
class CovarianceMatrix:
    """Second moments of the quadratures of an n-mode zero-mean Gaussian state.

    entries[2m] is the X quadrature of mode m, entries[2m+1] its P quadrature;
    vacuum is the identity.  Symmetry and positive definiteness are enforced at
    construction; physicality (symplectic eigenvalues >= 1) is checked on
    demand via :func:`is_physical`.
    """

    n_modes: int
    entries: np.ndarray

    def __post_init__(self):
        m = _as_checked_matrix(self.entries, self.n_modes, "CovarianceMatrix")
        asym = np.abs(m - m.T)
        tol = SYMMETRY_RTOL * np.maximum(1.0, np.abs(m))
        if np.any(asym > tol):
            i, j = np.unravel_index(np.argmax(asym - tol), m.shape)
            raise ValueError(
                f"CovarianceMatrix: not symmetric at ({i},{j}): "
                f"{m[i, j]!r} vs {m[j, i]!r}"
            )
        m = 0.5 * (m + m.T)
        try:
            np.linalg.cholesky(m)
        except np.linalg.LinAlgError:
            raise ValueError("CovarianceMatrix: matrix is not positive definite") from None
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    def to_dict(self) -> dict:
        return {
            "n_modes": self.n_modes,
            "ordering": "x1p1x2p2",
            "entries": self.entries.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CovarianceMatrix":
        try:
            n_modes = int(d["n_modes"])
            entries = d["entries"]
        except (KeyError, TypeError) as exc:
            raise ValueError(f"CovarianceMatrix JSON: missing field {exc}") from exc
        ordering = d.get("ordering", "x1p1x2p2")
        if ordering != "x1p1x2p2":
            raise ValueError(f"CovarianceMatrix JSON: unsupported ordering {ordering!r}")
        return cls(n_modes=n_modes, entries=np.array(entries, dtype=float))


@dataclass(frozen=True)
class SymplecticTransform:
    """Linear quadrature map S with S @ Omega @ S.T = Omega (lossless optics)."""

    n_modes: int
    matrix: np.ndarray

    def __post_init__(self):
        m = _as_checked_matrix(self.matrix, self.n_modes, "SymplecticTransform")
        omega = symplectic_form(self.n_modes)
        if np.max(np.abs(m @ omega @ m.T - omega)) > SYMPLECTIC_ATOL:
            raise ValueError("SymplecticTransform: S Omega S^T != Omega")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)


@dataclass(frozen=True)
class LossChannel:
    """Vacuum admixture with efficiency eta plus additive excess noise.

    excess_noise is an additive variance on the affected mode's diagonal
    block, e.g. homodyne detector dark noise in vacuum units.
    """

    mode_index: int
    efficiency: float
    excess_noise: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.efficiency <= 1.0:
            raise ValueError(f"LossChannel: efficiency must be in [0, 1], got {self.efficiency}")
        if self.excess_noise < 0.0:
            raise ValueError(f"LossChannel: excess_noise must be >= 0, got {self.excess_noise}")


def _check_mode(mode: int, n_modes: int):
    if not 0 <= mode < n_modes:
        raise ValueError(f"mode {mode} out of range for {n_modes} modes")


def vacuum_state(n_modes: int) -> CovarianceMatrix:
    """The n-mode vacuum: unit variance in every quadrature, no correlations."""
    if n_modes < 1:
        raise ValueError(f"vacuum_state: n_modes must be >= 1, got {n_modes}")
    return CovarianceMatrix(n_modes=n_modes, entries=np.eye(2 * n_modes))


def squeezer(r: float, mode: int, n_modes: int) -> SymplecticTransform:
    """Single-mode squeezer: X -> exp(-r) X, P -> exp(+r) P on `mode`.

    r > 0 squeezes the amplitude quadrature X (variance exp(-2r) on vacuum).
    """
    if not math.isfinite(r):
        raise ValueError(f"squeezer: r must be finite, got {r}")
    _check_mode(mode, n_modes)
    m = np.eye(2 * n_modes)
    m[2 * mode, 2 * mode] = math.exp(-r)
    m[2 * mode + 1, 2 * mode + 1] = math.exp(r)
    return SymplecticTransform(n_modes=n_modes, matrix=m)


def phase_shift(theta: float, mode: int, n_modes: int) -> SymplecticTransform:
    """Rotation by theta of the (X, P) plane of `mode`; pi/2 maps (X, P) -> (P, -X)."""
    _check_mode(mode, n_modes)
    c, s = math.cos(theta), math.sin(theta)
    m = np.eye(2 * n_modes)
    m[2 * mode: 2 * mode + 2, 2 * mode: 2 * mode + 2] = [[c, s], [-s, c]]
    return SymplecticTransform(n_modes=n_modes, matrix=m)


def beamsplitter(transmittance: float, mode_a: int, mode_b: int,
                 n_modes: int) -> SymplecticTransform:
    """Orthogonal two-mode mixing with t = sqrt(transmittance).

    Convention (applied identically to X and P):

        X_a' = t X_a + r X_b
        X_b' = r X_a - t X_b      with r = sqrt(1 - transmittance).

    The sign on the second output is what makes X_A - X_B and P_A + P_B the
    low-variance combinations in :func:`build_epr_source`.
    """
    if not 0.0 <= transmittance <= 1.0:
        raise ValueError(f"beamsplitter: transmittance must be in [0, 1], got {transmittance}")
    _check_mode(mode_a, n_modes)
    _check_mode(mode_b, n_modes)
    if mode_a == mode_b:
        raise ValueError("beamsplitter: modes must be distinct")
    t = math.sqrt(transmittance)
    r = math.sqrt(1.0 - transmittance)
    m = np.eye(2 * n_modes)
    for q in (0, 1):  # X row, P row
        a, b = 2 * mode_a + q, 2 * mode_b + q
        m[a, a] = t
        m[a, b] = r
        m[b, a] = r
        m[b, b] = -t
    return SymplecticTransform(n_modes=n_modes, matrix=m)


def compose(*transforms: SymplecticTransform) -> SymplecticTransform:
    """Matrix product of transforms; compose(S2, S1) applies S1 first, then S2."""
    if not transforms:
        raise ValueError("compose: need at least one transform")
    n = transforms[0].n_modes
    m = np.eye(2 * n)
    for s in transforms:
        if s.n_modes != n:
            raise ValueError("compose: mode-count mismatch")
        m = m @ s.matrix
    return SymplecticTransform(n_modes=n, matrix=m)


def apply_symplectic(state: CovarianceMatrix, s: SymplecticTransform) -> CovarianceMatrix:
    """Evolve the state through a lossless element: gamma -> S gamma S^T."""
    if state.n_modes != s.n_modes:
        raise ValueError(
            f"apply_symplectic: state has {state.n_modes} modes, transform {s.n_modes}"
        )
    out = s.matrix @ state.entries @ s.matrix.T
    return CovarianceMatrix(n_modes=state.n_modes, entries=0.5 * (out + out.T))


def apply_loss(state: CovarianceMatrix, channel: LossChannel) -> CovarianceMatrix:
    """Vacuum admixture on one mode: block -> eta block + (1 - eta) I + excess I.

    Cross terms with the other modes scale by sqrt(eta).
    """
    _check_mode(channel.mode_index, state.n_modes)
    scale = np.ones(2 * state.n_modes)
    sl = slice(2 * channel.mode_index, 2 * channel.mode_index + 2)
    scale[sl] = math.sqrt(channel.efficiency)
    out = state.entries * np.outer(scale, scale)
    add = (1.0 - channel.efficiency) + channel.excess_noise
    out[sl, sl] += add * np.eye(2)
    return CovarianceMatrix(n_modes=state.n_modes, entries=out)


def symplectic_eigenvalues(state: CovarianceMatrix) -> np.ndarray:
    """The n symplectic eigenvalues of gamma, descending.

    Computed from the spectrum of Omega @ gamma, whose eigenvalues come in
    pairs +-i nu; physical states have every nu >= 1.
    """
    ev = np.linalg.eigvals(symplectic_form(state.n_modes) @ state.entries)
    moduli = np.sort(np.abs(ev))[::-1]
    return moduli[::2].copy()


def symplectic_eigenvalues_two_mode(state: CovarianceMatrix) -> np.ndarray:
    """Two-mode symplectic eigenvalues via the invariant formula.

    For gamma = [[A, C], [C^T, B]] in 2x2 blocks, with
    Delta = det A + det B + 2 det C, the squared eigenvalues are
    (Delta +- sqrt(Delta^2 - 4 det gamma)) / 2.  Independent cross-check of
    :func:`symplectic_eigenvalues`.
    """
    if state.n_modes != 2:
        raise ValueError("symplectic_eigenvalues_two_mode: state must have exactly 2 modes")
    g = state.entries
    a = np.linalg.det(g[:2, :2])
    b = np.linalg.det(g[2:, 2:])
    c = np.linalg.det(g[:2, 2:])
    delta = a + b + 2.0 * c
    disc = delta * delta - 4.0 * np.linalg.det(g)
    root = math.sqrt(max(disc, 0.0))
    nu_hi = math.sqrt(max((delta + root) / 2.0, 0.0))
    nu_lo = math.sqrt(max((delta - root) / 2.0, 0.0))
    return np.array([nu_hi, nu_lo])


def is_physical(state: CovarianceMatrix, atol: float = PHYSICALITY_ATOL) -> bool:
    """Whether all symplectic eigenvalues satisfy nu >= 1 - atol (vacuum units)."""
    return bool(np.min(symplectic_eigenvalues(state)) >= 1.0 - atol)


def quadrature_variance(state: CovarianceMatrix, mode: int, angle: float) -> float:
    """Variance of cos(angle) X_mode + sin(angle) P_mode (generalized homodyne)."""
    _check_mode(mode, state.n_modes)
    v = np.zeros(2 * state.n_modes)
    v[2 * mode] = math.cos(angle)
    v[2 * mode + 1] = math.sin(angle)
    return float(v @ state.entries @ v)


@dataclass(frozen=True)
class SourceParams:
    """Physical knobs of the two-mode squeezed source model.

    r1 and r2 are the squeezing parameters of the two amplitude-squeezed
    inputs; one input is rotated by relative_phase before the combining
    beamsplitter.  eta_prep is the per-source state preparation efficiency,
    eta_det_a / eta_det_b the per-arm homodyne detection efficiencies, and
    dark_noise an additive variance per homodyne output.
    """

    r1: float = 0.0
    r2: float = 0.0
    relative_phase: float = math.pi / 2
    transmittance: float = 0.5
    eta_prep: float = 1.0
    eta_det_a: float = 1.0
    eta_det_b: float = 1.0
    dark_noise: float = 0.0

    def __post_init__(self):
        if self.r1 < 0 or self.r2 < 0:
            raise ValueError(f"SourceParams: r1, r2 must be >= 0, got {self.r1}, {self.r2}")
        for name in ("eta_prep", "eta_det_a", "eta_det_b"):
            val = getattr(self, name)
            if not 0.0 < val <= 1.0:
                raise ValueError(f"SourceParams: {name} must be in (0, 1], got {val}")
        if not 0.0 <= self.transmittance <= 1.0:
            raise ValueError(
                f"SourceParams: transmittance must be in [0, 1], got {self.transmittance}"
            )
        if self.dark_noise < 0.0:
            raise ValueError(f"SourceParams: dark_noise must be >= 0, got {self.dark_noise}")
        if not math.isfinite(self.relative_phase):
            raise ValueError("SourceParams: relative_phase must be finite")

    def to_dict(self) -> dict:
        return {
            "r1": self.r1,
            "r2": self.r2,
            "relative_phase": self.relative_phase,
            "transmittance": self.transmittance,
            "eta_prep": self.eta_prep,
            "eta_det_a": self.eta_det_a,
            "eta_det_b": self.eta_det_b,
            "dark_noise": self.dark_noise,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SourceParams":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"SourceParams JSON: unknown field(s) {sorted(unknown)}")
        return cls(**{k: float(v) for k, v in d.items()})


def build_epr_source(params: SourceParams) -> CovarianceMatrix:
    """Forward model of the entangled source chain.

    Two amplitude-squeezed modes -> preparation loss on each -> rotation of
    mode 1 by relative_phase -> combining beamsplitter -> per-arm detection
    loss with dark noise.  Alice is output mode 0, Bob mode 1.  The
    beamsplitter is wired (mode_a=1, mode_b=0) so that, at the defaults,
    X_A - X_B = -sqrt(2) X_source1 and P_A + P_B = sqrt(2) P_source2 are the
    squeezed combinations: lossless and symmetric, both have variance
    2 exp(-2r).
    """
    state = vacuum_state(2)
    state = apply_symplectic(state, squeezer(params.r1, 0, 2))
    state = apply_symplectic(state, squeezer(params.r2, 1, 2))
    state = apply_loss(state, LossChannel(0, params.eta_prep))
    state = apply_loss(state, LossChannel(1, params.eta_prep))
    state = apply_symplectic(state, phase_shift(params.relative_phase, 1, 2))
    state = apply_symplectic(state, beamsplitter(params.transmittance, 1, 0, 2))
    state = apply_loss(state, LossChannel(0, params.eta_det_a, params.dark_noise))
    state = apply_loss(state, LossChannel(1, params.eta_det_b, params.dark_noise))
    return state
