"""Seeded Monte Carlo homodyne sampling from a covariance matrix.

Serves as the statistical oracle for the analytic pipeline: draws finite
Gaussian sample sets for single quadratures or two-detector combinations,
estimates variances, and simulates the full six-measurement reconstruction
campaign including detector dark noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gaussian import CovarianceMatrix, is_physical, symplectic_eigenvalues
from .reconstruction import MeasurementSet

# Fixed internal chunk so campaign results never depend on n-dependent batching.
_CHUNK = 1 << 19

SINGLE = "single_quadrature"
JOINT = "joint_combination"


@dataclass(frozen=True)
class MeasurementSetting:
    """One homodyne acquisition: a single quadrature or a combination.

    For kind "single_quadrature", `mode` and `angle_a` select the quadrature
    cos(angle) X_mode + sin(angle) P_mode.  For "joint_combination" the
    sampled scalar is c_a * quad_A(angle_a) + c_b * quad_B(angle_b), the
    passively subtracted (or summed) output of the two detectors.
    """

    kind: str
    mode: int = 0
    angle_a: float = 0.0
    angle_b: float = 0.0
    coefficients: tuple = (1.0, 0.0)

    def __post_init__(self):
        if self.kind not in (SINGLE, JOINT):
            raise ValueError(f"MeasurementSetting: unknown kind {self.kind!r}")
        if self.kind == JOINT and self.coefficients[0] == 0.0 and self.coefficients[1] == 0.0:
            raise ValueError("MeasurementSetting: joint coefficients must not both be zero")

    @classmethod
    def single(cls, mode: int, angle: float = 0.0) -> "MeasurementSetting":
        return cls(kind=SINGLE, mode=mode, angle_a=angle)

    @classmethod
    def joint(cls, c_a: float, c_b: float, angle_a: float = 0.0,
              angle_b: float = 0.0) -> "MeasurementSetting":
        return cls(kind=JOINT, angle_a=angle_a, angle_b=angle_b,
                   coefficients=(float(c_a), float(c_b)))

    def projection_vector(self, n_modes: int = 2) -> np.ndarray:
        v = np.zeros(2 * n_modes)
        if self.kind == SINGLE:
            if not 0 <= self.mode < n_modes:
                raise ValueError(f"MeasurementSetting: mode {self.mode} out of range")
            v[2 * self.mode] = math.cos(self.angle_a)
            v[2 * self.mode + 1] = math.sin(self.angle_a)
        else:
            c_a, c_b = self.coefficients
            v[0] = c_a * math.cos(self.angle_a)
            v[1] = c_a * math.sin(self.angle_a)
            v[2] = c_b * math.cos(self.angle_b)
            v[3] = c_b * math.sin(self.angle_b)
        return v

    def dark_factor(self) -> float:
        """Dark-noise variance multiplier: one detector for single settings,
        both coefficient-weighted detectors for joint ones."""
        if self.kind == SINGLE:
            return 1.0
        c_a, c_b = self.coefficients
        return c_a * c_a + c_b * c_b

    def label(self) -> str:
        if self.kind == SINGLE:
            canonical = {
                (0, 0.0): "x_a",
                (0, math.pi / 2): "p_a",
                (1, 0.0): "x_b",
                (1, math.pi / 2): "p_b",
            }
            key = (self.mode, self.angle_a)
            if key in canonical:
                return canonical[key]
            return f"single(mode={self.mode},angle={self.angle_a:g})"
        c_a, c_b = self.coefficients
        if (c_a, c_b) == (1.0, -1.0) and self.angle_a == self.angle_b == 0.0:
            return "x_a-x_b"
        if (c_a, c_b) == (1.0, 1.0) and self.angle_a == self.angle_b == math.pi / 2:
            return "p_a+p_b"
        return (f"joint(ca={c_a:g},cb={c_b:g},"
                f"angle_a={self.angle_a:g},angle_b={self.angle_b:g})")


@dataclass(frozen=True)
class SampleBatch:
    """Finite sample set drawn for one setting, with its seed for replay."""

    setting: MeasurementSetting
    values: np.ndarray
    seed: int
    n: int

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", vals)
        if self.n != len(vals) or self.n < 2:
            raise ValueError(f"SampleBatch: need n == len(values) >= 2, got n={self.n}")


def canonical_settings() -> list[MeasurementSetting]:
    """The six campaign settings: X_A, P_A, X_B, P_B, X_A - X_B, P_A + P_B."""
    return [
        MeasurementSetting.single(0, 0.0),
        MeasurementSetting.single(0, math.pi / 2),
        MeasurementSetting.single(1, 0.0),
        MeasurementSetting.single(1, math.pi / 2),
        MeasurementSetting.joint(1.0, -1.0),
        MeasurementSetting.joint(1.0, 1.0, math.pi / 2, math.pi / 2),
    ]


def _sqrt_factor(state: CovarianceMatrix) -> np.ndarray:
    """Symmetric (spectral) square root of the covariance matrix.

    The factorization choice is an internal detail; it is deterministic for a
    given numpy version, which is what the fixed-seed replay contract needs.
    """
    lam, q = np.linalg.eigh(state.entries)
    return q @ np.diag(np.sqrt(lam)) @ q.T


def _check_sampleable(state: CovarianceMatrix):
    if state.n_modes != 2:
        raise ValueError("sampler: state must have exactly 2 modes")
    if not is_physical(state):
        nus = symplectic_eigenvalues(state)
        raise ValueError(f"sampler: state is unphysical (symplectic eigenvalues {nus.tolist()})")


def sample_quadratures(state: CovarianceMatrix, setting: MeasurementSetting,
                       n: int, seed: int, dark_noise: float = 0.0) -> SampleBatch:
    """Draw n independent scalar samples of the setting's linear form.

    Each sample projects a fresh correlated quadrature vector drawn through
    the symmetric square root of gamma, so equal seeds reuse the same latent
    vectors across settings; with dark_noise = 0 a joint combination agrees
    sample-by-sample with the same combination of the single-quadrature
    batches at that seed (up to float rounding).  Dark noise adds variance
    dark_noise per involved detector, drawn after the quadrature stream.
    """
    _check_sampleable(state)
    if n < 2:
        raise ValueError(f"sample_quadratures: n must be >= 2, got {n}")
    if dark_noise < 0.0:
        raise ValueError(f"sample_quadratures: dark_noise must be >= 0, got {dark_noise}")
    w = _sqrt_factor(state) @ setting.projection_vector(state.n_modes)
    rng = np.random.default_rng(np.random.SeedSequence([seed]))
    vals = rng.standard_normal((n, 2 * state.n_modes)) @ w
    if dark_noise > 0.0:
        vals = vals + math.sqrt(dark_noise * setting.dark_factor()) * rng.standard_normal(n)
    return SampleBatch(setting=setting, values=vals, seed=seed, n=n)


def sample_variance(batch: SampleBatch) -> float:
    """Unbiased estimator sum((x - mean)^2) / (n - 1)."""
    if batch.n < 2:
        raise ValueError("sample_variance: need at least 2 samples")
    return float(np.var(batch.values, ddof=1))


def _campaign_chunks(state: CovarianceMatrix, n_per_setting: int, seed: int,
                     dark_noise: float):
    """Yield (chunk_size, values) arrays of shape (chunk, 6), one column per
    canonical setting, all six projected from one shared quadrature stream.

    The shared stream models simultaneous acquisition of the commuting
    combinations: the reconstruction identity then cancels the common
    fluctuations, and downstream criterion values converge at the chi-squared
    rate of the variance estimator itself.  Dark noise stays independent per
    setting (fresh detector noise per acquisition), seeded as (seed, index+1).
    """
    settings = canonical_settings()
    sq = _sqrt_factor(state)
    weights = np.stack([sq @ s.projection_vector(state.n_modes) for s in settings], axis=1)
    dark_scale = np.array([math.sqrt(dark_noise * s.dark_factor()) for s in settings])
    rng = np.random.default_rng(np.random.SeedSequence([seed]))
    dark_rngs = [np.random.default_rng(np.random.SeedSequence([seed, i + 1]))
                 for i in range(len(settings))]
    remaining = n_per_setting
    while remaining > 0:
        c = min(remaining, _CHUNK)
        x = rng.standard_normal((c, 2 * state.n_modes)) @ weights
        if dark_noise > 0.0:
            for i, dr in enumerate(dark_rngs):
                x[:, i] += dark_scale[i] * dr.standard_normal(c)
        yield c, x
        remaining -= c


def measure_campaign(state: CovarianceMatrix, n_per_setting: int, seed: int,
                     dark_noise: float = 0.0) -> MeasurementSet:
    """Simulate the six-measurement campaign and return its variance estimates.

    The returned relative_error is sqrt(2 / n_per_setting), the relative
    one-sigma of a Gaussian variance estimate; seed and counts are recorded
    in the metadata.  Deterministic for fixed inputs, and independent of the
    internal chunking (fixed chunk size, fixed accumulation order).
    """
    _check_sampleable(state)
    if n_per_setting < 2:
        raise ValueError(f"measure_campaign: n_per_setting must be >= 2, got {n_per_setting}")
    if dark_noise < 0.0:
        raise ValueError(f"measure_campaign: dark_noise must be >= 0, got {dark_noise}")
    s1 = np.zeros(6)
    s2 = np.zeros(6)
    for c, x in _campaign_chunks(state, n_per_setting, seed, dark_noise):
        s1 += x.sum(axis=0)
        s2 += np.einsum("ij,ij->j", x, x)
    n = n_per_setting
    variances = (s2 - s1 * s1 / n) / (n - 1)
    return MeasurementSet(
        var_xa=float(variances[0]),
        var_pa=float(variances[1]),
        var_xb=float(variances[2]),
        var_pb=float(variances[3]),
        var_x_diff=float(variances[4]),
        var_p_sum=float(variances[5]),
        relative_error=math.sqrt(2.0 / n_per_setting),
        metadata={"seed": seed, "n_per_setting": n_per_setting, "dark_noise": dark_noise},
    )


def campaign_batches(state: CovarianceMatrix, n_per_setting: int, seed: int,
                     dark_noise: float = 0.0) -> list[SampleBatch]:
    """The raw per-setting samples behind :func:`measure_campaign`.

    Materializes the same shared-stream data the campaign accumulates, so
    exported samples reproduce the campaign's variance estimates exactly.
    """
    _check_sampleable(state)
    if n_per_setting < 2:
        raise ValueError(f"campaign_batches: n_per_setting must be >= 2, got {n_per_setting}")
    parts = [x for _, x in _campaign_chunks(state, n_per_setting, seed, dark_noise)]
    data = np.concatenate(parts, axis=0)
    return [
        SampleBatch(setting=s, values=data[:, i], seed=seed, n=n_per_setting)
        for i, s in enumerate(canonical_settings())
    ]


def samples_to_csv(batches: list[SampleBatch]) -> str:
    """Raw sample export: one `setting,value` row per sample."""
    lines = ["setting,value"]
    for b in batches:
        lab = b.setting.label()
        lines.extend(f"{lab},{v!r}" for v in b.values.tolist())
    return "\n".join(lines) + "\n"
