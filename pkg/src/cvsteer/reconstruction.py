"""Covariance reconstruction from the six-variance measurement campaign.

Four single-quadrature variances plus the two joint combinations
Var(X_A - X_B) and Var(P_A + P_B) determine the diagonal and the (X_A, X_B)
and (P_A, P_B) covariances of a two-mode state.  The remaining X-P cross
terms are not measured and are set to zero; that convention can only
underestimate the correlations actually present.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .gaussian import (
    PHYSICALITY_ATOL,
    CovarianceMatrix,
    symplectic_eigenvalues,
)

CSV_FIELDS = ("var_xa", "var_pa", "var_xb", "var_pb", "var_x_diff", "var_p_sum")


class InconsistentDataError(ValueError):
    """A reconstructed covariance exceeds its Cauchy-Schwarz bound beyond the error band."""

    def __init__(self, entry: str, value: float, bound: float, band: float):
        self.entry = entry
        self.value = value
        self.bound = bound
        self.band = band
        self.excess = abs(value) - (bound + band)
        super().__init__(
            f"measurement set inconsistent: |Cov_{entry}| = {abs(value):.6g} exceeds "
            f"sqrt(Var*Var) = {bound:.6g} by {self.excess:.6g} "
            f"(allowed error band {band:.6g})"
        )


class PhysicalityWarning(UserWarning):
    """Reconstructed matrix has a symplectic eigenvalue below 1 (rounding-level)."""


@dataclass(frozen=True)
class MeasurementSet:
    """The six scalar variances of a reconstruction campaign, in vacuum units.

    relative_error is the one-sigma relative uncertainty common to all six
    values; metadata carries acquisition labels (e.g. fourier_frequency_hz,
    rbw_hz, vbw_hz) that do not enter any computation.
    """

    var_xa: float
    var_pa: float
    var_xb: float
    var_pb: float
    var_x_diff: float
    var_p_sum: float
    relative_error: float = 0.05
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in CSV_FIELDS:
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0.0):
                raise ValueError(f"MeasurementSet: {name} must be positive, got {v}")
        if not 0.0 <= self.relative_error < 1.0:
            raise ValueError(
                f"MeasurementSet: relative_error must be in [0, 1), got {self.relative_error}"
            )

    def values(self) -> tuple[float, ...]:
        return tuple(getattr(self, name) for name in CSV_FIELDS)

    def to_dict(self) -> dict:
        d = {name: getattr(self, name) for name in CSV_FIELDS}
        d["relative_error"] = self.relative_error
        d["metadata"] = dict(self.metadata)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "MeasurementSet":
        missing = [name for name in CSV_FIELDS if name not in d]
        if missing:
            raise ValueError(f"MeasurementSet JSON: missing field(s) {missing}")
        return cls(
            **{name: float(d[name]) for name in CSV_FIELDS},
            relative_error=float(d.get("relative_error", 0.05)),
            metadata=dict(d.get("metadata", {})),
        )

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_FIELDS)
        w.writerow([repr(getattr(self, name)) for name in CSV_FIELDS])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, relative_error: float = 0.05) -> "MeasurementSet":
        rows = list(csv.reader(io.StringIO(text)))
        rows = [r for r in rows if r and any(cell.strip() for cell in r)]
        if len(rows) != 2 or tuple(h.strip() for h in rows[0]) != CSV_FIELDS:
            raise ValueError(
                f"MeasurementSet CSV: expected header {','.join(CSV_FIELDS)} and one data row"
            )
        vals = [float(cell) for cell in rows[1]]
        return cls(*vals, relative_error=relative_error)


def covariance_from_sum(var_sum: float, var_1: float, var_2: float) -> float:
    """Cov(O1, O2) = (Var(O1 + O2) - Var(O1) - Var(O2)) / 2.

    Stated for sums; for a measured difference Var(O1 - O2) this returns
    Cov(O1, -O2), i.e. minus the wanted covariance.  :func:`reconstruct`
    owns that sign flip.
    """
    for name, v in (("var_sum", var_sum), ("var_1", var_1), ("var_2", var_2)):
        if not math.isfinite(v):
            raise ValueError(f"covariance_from_sum: {name} must be finite")
    if var_1 <= 0.0 or var_2 <= 0.0:
        raise ValueError("covariance_from_sum: var_1 and var_2 must be positive")
    return 0.5 * (var_sum - var_1 - var_2)


def _covariance_sigma(rel: float, v1: float, v2: float, v_joint: float) -> float:
    # First-order propagation of independent relative errors through the identity.
    return 0.5 * math.sqrt((rel * v1) ** 2 + (rel * v2) ** 2 + (rel * v_joint) ** 2)


def reconstruct(ms: MeasurementSet) -> CovarianceMatrix:
    """Build the two-mode covariance matrix from a measurement set.

    Diagonal from the four single variances; Cov(X_A, X_B) from the measured
    difference (sign handled here), Cov(P_A, P_B) from the measured sum; all
    X-P cross terms set to zero.  Covariances breaching the Cauchy-Schwarz
    bound beyond the propagated error band raise InconsistentDataError;
    matrices that are merely below the symplectic physicality boundary emit a
    PhysicalityWarning but are returned.
    """
    cov_x = -covariance_from_sum(ms.var_x_diff, ms.var_xa, ms.var_xb)
    cov_p = covariance_from_sum(ms.var_p_sum, ms.var_pa, ms.var_pb)
    checks = (
        ("x", cov_x, ms.var_xa, ms.var_xb, ms.var_x_diff),
        ("p", cov_p, ms.var_pa, ms.var_pb, ms.var_p_sum),
    )
    for entry, cov, v1, v2, vj in checks:
        bound = math.sqrt(v1 * v2)
        band = _covariance_sigma(ms.relative_error, v1, v2, vj)
        if abs(cov) > bound + band:
            raise InconsistentDataError(entry, cov, bound, band)
    m = np.array([
        [ms.var_xa, 0.0, cov_x, 0.0],
        [0.0, ms.var_pa, 0.0, cov_p],
        [cov_x, 0.0, ms.var_xb, 0.0],
        [0.0, cov_p, 0.0, ms.var_pb],
    ])
    state = CovarianceMatrix(n_modes=2, entries=m)
    nus = symplectic_eigenvalues(state)
    if np.min(nus) < 1.0 - PHYSICALITY_ATOL:
        warnings.warn(
            PhysicalityWarning(
                f"reconstructed matrix is slightly unphysical: symplectic "
                f"eigenvalues {nus.tolist()}"
            ),
            stacklevel=2,
        )
    return state


def propagate_errors(ms: MeasurementSet) -> np.ndarray:
    """First-order one-sigma uncertainties of the reconstructed entries.

    Diagonal entries inherit relative_error * value; each covariance combines
    the three inputs of the reconstruction identity in quadrature (errors
    treated as independent).  Entries fixed to zero by convention carry zero
    uncertainty.
    """
    rel = ms.relative_error
    sig = np.zeros((4, 4))
    for i, name in enumerate(("var_xa", "var_pa", "var_xb", "var_pb")):
        sig[i, i] = rel * getattr(ms, name)
    sig[0, 2] = sig[2, 0] = _covariance_sigma(rel, ms.var_xa, ms.var_xb, ms.var_x_diff)
    sig[1, 3] = sig[3, 1] = _covariance_sigma(rel, ms.var_pa, ms.var_pb, ms.var_p_sum)
    return sig


def expected_measurements(state: CovarianceMatrix, relative_error: float = 0.0,
                          metadata: dict | None = None) -> MeasurementSet:
    """Noise-free campaign values read directly off a two-mode covariance matrix."""
    if state.n_modes != 2:
        raise ValueError("expected_measurements: state must have exactly 2 modes")
    g = state.entries
    return MeasurementSet(
        var_xa=float(g[0, 0]),
        var_pa=float(g[1, 1]),
        var_xb=float(g[2, 2]),
        var_pb=float(g[3, 3]),
        var_x_diff=float(g[0, 0] + g[2, 2] - 2.0 * g[0, 2]),
        var_p_sum=float(g[1, 1] + g[3, 3] + 2.0 * g[1, 3]),
        relative_error=relative_error,
        metadata=metadata or {},
    )
