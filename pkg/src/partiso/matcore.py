"""Dense complex linear algebra used by every other module.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``.  The
helpers here add the few things numpy does not give directly: Schatten norms,
a relative-cutoff pseudoinverse, Hermitian functional calculus, and the
unitary logarithm / skew-Hermitian exponential pair used by the unitary chart.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    InvalidOrder,
    NonConvergence,
    NotFinite,
    NotHermitian,
    RankDeficient,
    SingularSpectrum,
)

Matrix = np.ndarray


@dataclass(frozen=True)
class ToleranceConfig:
    tol_factor: float = 1e-10
    tol_rank: float = 1e-10
    tol_equal: float = 1e-9

    def __post_init__(self):
        for name in ("tol_factor", "tol_rank", "tol_equal"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {value!r}")


DEFAULT_TOL = ToleranceConfig()


@dataclass(frozen=True)
class SvdResult:
    u_factor: Matrix
    singular_values: np.ndarray
    v_factor: Matrix

    def reconstruct(self) -> Matrix:
        return (self.u_factor * self.singular_values) @ self.v_factor.conj().T


def as_matrix(m) -> Matrix:
    """Coerce to a 2-D complex array and reject NaN/Inf entries."""
    a = np.asarray(m, dtype=complex)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NotFinite("matrix has non-finite entries")
    return a


def dagger(m: Matrix) -> Matrix:
    return m.conj().T


def opnorm(m: Matrix) -> float:
    """Operator (spectral) norm, 0 for empty matrices."""
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


def svd(m) -> SvdResult:
    a = as_matrix(m)
    try:
        u, s, vh = np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NonConvergence(str(exc)) from exc
    return SvdResult(u, s, vh.conj().T)


def singular_values(m) -> np.ndarray:
    a = as_matrix(m)
    if a.size == 0:
        return np.zeros(0)
    try:
        return np.linalg.svd(a, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NonConvergence(str(exc)) from exc


def schatten_norm(m, p: float = 2) -> float:
    """Schatten p-norm ``(sum s_i**p)**(1/p)``; ``p = inf`` is the operator norm."""
    if np.isnan(p) or p < 1:
        raise InvalidOrder(f"Schatten order must be >= 1, got {p!r}")
    s = singular_values(m)
    if s.size == 0:
        return 0.0
    if np.isinf(p):
        return float(s[0])
    if p == 1:
        return float(s.sum())
    if p == 2:
        return float(np.sqrt(np.sum(s * s)))
    # scale by s_max to keep s**p in range for large p
    top = s[0]
    if top == 0.0:
        return 0.0
    return float(top * np.sum((s / top) ** p) ** (1.0 / p))


def pinv(m, tol: ToleranceConfig = DEFAULT_TOL) -> Matrix:
    """Moore-Penrose inverse with singular values below ``tol_rank * s_max`` dropped."""
    r = svd(m)
    s = r.singular_values
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((r.v_factor.shape[0], r.u_factor.shape[0]), dtype=complex)
    keep = s > tol.tol_rank * s[0]
    inv = np.zeros_like(s)
    inv[keep] = 1.0 / s[keep]
    return (r.v_factor * inv) @ dagger(r.u_factor)


_HERM_FUNCS = {
    "inverse": lambda w: 1.0 / w,
    "inverse_sqrt": lambda w: 1.0 / np.sqrt(w),
    "sqrt": np.sqrt,
}


def herm_apply(m, f: str, tol: ToleranceConfig = DEFAULT_TOL) -> Matrix:
    """Apply a scalar function to a Hermitian matrix through its eigendecomposition.

    ``f`` is one of ``"inverse"``, ``"inverse_sqrt"``, ``"sqrt"``.
    """
    if f not in _HERM_FUNCS:
        raise ValueError(f"unknown function tag {f!r}")
    a = as_matrix(m)
    asym = opnorm(a - dagger(a))
    if asym > tol.tol_equal:
        raise NotHermitian(f"||m - m*|| = {asym:.3e}", residual=asym)
    w, v = np.linalg.eigh(0.5 * (a + dagger(a)))
    lam_max = np.max(np.abs(w)) if w.size else 0.0
    if f == "sqrt":
        if w.size and w.min() < -tol.tol_rank * max(lam_max, 1.0):
            raise SingularSpectrum(f"negative eigenvalue {w.min():.3e} under sqrt")
        w = np.clip(w, 0.0, None)
    elif w.size and w.min() <= tol.tol_rank * lam_max:
        raise SingularSpectrum(f"eigenvalue {w.min():.3e} below cutoff for {f}")
    fw = _HERM_FUNCS[f](w)
    out = (v * fw) @ dagger(v)
    return 0.5 * (out + dagger(out))


def orthonormal_frame(m, tol: ToleranceConfig = DEFAULT_TOL) -> Matrix:
    """Orthonormal basis of the column span of ``m`` (same number of columns)."""
    r = svd(m)
    s = r.singular_values
    cols = r.v_factor.shape[0]
    rank = int(np.sum(s > tol.tol_rank * s[0])) if s.size and s[0] > 0 else 0
    if rank < cols:
        raise RankDeficient(f"numerical rank {rank} < {cols} columns")
    return r.u_factor[:, :cols]


def rng_from(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def ginibre(n: int, k: int, seed) -> Matrix:
    """n x k matrix of i.i.d. standard complex Gaussians."""
    rng = rng_from(seed)
    return (rng.standard_normal((n, k)) + 1j * rng.standard_normal((n, k))) / np.sqrt(2.0)


def random_unitary(n: int, seed) -> Matrix:
    """Haar-distributed n x n unitary (QR of a Ginibre matrix, phase-fixed)."""
    if n < 1:
        raise ValueError("dimension must be >= 1")
    q, r = np.linalg.qr(ginibre(n, n, seed))
    d = np.diag(r)
    phases = np.where(np.abs(d) > 0, d / np.where(np.abs(d) > 0, np.abs(d), 1.0), 1.0)
    return q * phases


def unitary_log(u) -> Matrix:
    """Principal logarithm of a unitary matrix, returned exactly skew-Hermitian.

    Uses the complex Schur form, which is diagonal for normal input.  Branch
    proximity is the caller's business (see :func:`unitary_spectrum`).
    """
    t, z = scipy.linalg.schur(as_matrix(u), output="complex")
    theta = np.angle(np.diag(t))
    x = (z * (1j * theta)) @ dagger(z)
    return 0.5 * (x - dagger(x))


def unitary_spectrum(u) -> np.ndarray:
    t, _ = scipy.linalg.schur(as_matrix(u), output="complex")
    return np.diag(t)


def skew_exp(x) -> Matrix:
    """exp(x) for skew-Hermitian x, via the Hermitian matrix i*x."""
    a = as_matrix(x)
    h = 1j * a
    w, v = np.linalg.eigh(0.5 * (h + dagger(h)))
    return (v * np.exp(-1j * w)) @ dagger(v)


def is_unitary(u, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    a = as_matrix(u)
    return a.shape[0] == a.shape[1] and opnorm(dagger(a) @ a - np.eye(a.shape[0])) <= tol.tol_equal
