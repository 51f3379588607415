"""Truncated restricted Grassmannian: subspaces, graph charts, transitions.

A subspace is stored as an orthonormal frame plus its projector.  Chart
coordinates at a base ``W`` are matrices in the bases ``frame(W)`` and
``perp_frame(W)``, so the operator ``A: W -> W⊥`` is ``perp @ coeff @ frame*``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DimensionMismatch, FullSpace, NotProjector, OutsideDomain
from .matcore import (
    DEFAULT_TOL,
    Matrix,
    ToleranceConfig,
    as_matrix,
    dagger,
    herm_apply,
    opnorm,
    orthonormal_frame,
    schatten_norm,
    singular_values,
)


@dataclass(frozen=True)
class Polarization:
    n_plus: int
    n_minus: int

    def __post_init__(self):
        if self.n_plus < 1 or self.n_minus < 1:
            raise ValueError("both halves of the polarization must be non-trivial")

    @property
    def n(self) -> int:
        return self.n_plus + self.n_minus

    @cached_property
    def p_plus(self) -> Matrix:
        return np.diag(np.r_[np.ones(self.n_plus), np.zeros(self.n_minus)]).astype(complex)

    @cached_property
    def p_minus(self) -> Matrix:
        return np.eye(self.n, dtype=complex) - self.p_plus

    def plus_space(self) -> Subspace:
        return coordinate_subspace(self.n, self.n_plus)

    def minus_space(self) -> Subspace:
        return complement(self.plus_space())

    def full_space(self) -> Subspace:
        return Subspace(np.eye(self.n, dtype=complex))

    def blocks(self, m: Matrix) -> tuple[Matrix, Matrix, Matrix, Matrix]:
        """(m_{++}, m_{+-}, m_{-+}, m_{--}) with m_{+-}: H₋ -> H₊."""
        k = self.n_plus
        return m[:k, :k], m[:k, k:], m[k:, :k], m[k:, k:]


@dataclass(frozen=True, eq=False)
class Subspace:
    """Subspace of C^n given by an orthonormal frame (n x k).

    ``projector`` defaults to ``frame @ frame*``; ``perp`` optionally fixes the
    frame of the orthogonal complement, otherwise one is derived by complete QR.
    """

    frame: Matrix
    projector: Matrix = None
    perp: Matrix = None

    def __post_init__(self):
        f = as_matrix(self.frame)
        object.__setattr__(self, "frame", f)
        if f.shape[1] < 1 or f.shape[1] > f.shape[0]:
            raise DimensionMismatch(f"frame shape {f.shape} is not n x k with 1 <= k <= n")
        if self.projector is None:
            p = f @ dagger(f)
            object.__setattr__(self, "projector", 0.5 * (p + dagger(p)))
        if self.perp is not None:
            object.__setattr__(self, "perp", as_matrix(self.perp))

    @property
    def n(self) -> int:
        return self.frame.shape[0]

    @property
    def dim(self) -> int:
        return self.frame.shape[1]

    @cached_property
    def perp_frame(self) -> Matrix:
        if self.perp is not None:
            return self.perp
        q, _ = np.linalg.qr(self.frame, mode="complete")
        return q[:, self.dim:]

    @cached_property
    def basis(self) -> Matrix:
        """Unitary ``[frame | perp_frame]``: maps the first-k coordinates onto this subspace."""
        return np.hstack([self.frame, self.perp_frame])

    @classmethod
    def span(cls, m, tol: ToleranceConfig = DEFAULT_TOL) -> Subspace:
        return cls(orthonormal_frame(m, tol))

    @classmethod
    def from_projector(cls, p, tol: ToleranceConfig = DEFAULT_TOL) -> Subspace:
        """Subspace onto which ``p`` projects; ``p`` must be a projector within tol_equal."""
        p = as_matrix(p)
        resid = max(opnorm(p - dagger(p)), opnorm(p @ p - p))
        if resid > tol.tol_equal:
            raise NotProjector(f"projector residual {resid:.3e}", residual=resid)
        w, v = np.linalg.eigh(0.5 * (p + dagger(p)))
        keep = w > 0.5
        # eigh sorts ascending; keep the 1-eigenspace in descending order
        frame = v[:, keep][:, ::-1]
        perp = v[:, ~keep][:, ::-1]
        return cls(frame, p, perp)


@dataclass(frozen=True)
class ChartCoordinates:
    base: Subspace
    coeff: Matrix

    def __post_init__(self):
        c = as_matrix(self.coeff)
        object.__setattr__(self, "coeff", c)
        expected = (self.base.n - self.base.dim, self.base.dim)
        if c.shape != expected:
            raise DimensionMismatch(f"coeff shape {c.shape}, expected {expected}")

    def operator(self) -> Matrix:
        """A as an n x n operator (zero on W⊥, range in W⊥)."""
        return self.base.perp_frame @ self.coeff @ dagger(self.base.frame)


@dataclass(frozen=True)
class RestrictedDefect:
    hs_defect: float
    p_defect: float
    offdiag_plus_minus: float
    offdiag_minus_plus: float


def coordinate_subspace(n: int, k: int) -> Subspace:
    """span(e_1, ..., e_k) with the standard complement frame."""
    eye = np.eye(n, dtype=complex)
    return Subspace(eye[:, :k], perp=eye[:, k:])


def complement(w: Subspace) -> Subspace:
    if w.dim == w.n:
        raise FullSpace("the full space has no non-trivial complement")
    return Subspace(w.perp_frame, np.eye(w.n) - w.projector, w.frame)


def in_chart_domain(w: Subspace, v: Subspace, tol: ToleranceConfig = DEFAULT_TOL) -> tuple[bool, float]:
    """Whether V ⊕ W⊥ = H, judged by the smallest singular value of frame(W)* frame(V)."""
    if v.dim != w.dim or v.n != w.n:
        raise DimensionMismatch(f"dim(v)={v.dim}, dim(w)={w.dim}")
    s = singular_values(dagger(w.frame) @ v.frame)
    s_min = float(s[-1])
    return s_min > tol.tol_rank, s_min


def chart_forward(w: Subspace, v: Subspace, tol: ToleranceConfig = DEFAULT_TOL) -> ChartCoordinates:
    """Graph coordinate of V over W, the matrix of ``P_{W⊥} (P_W|_V)^{-1}``."""
    ok, s_min = in_chart_domain(w, v, tol)
    if not ok:
        raise OutsideDomain(f"V is not a graph over W (s_min = {s_min:.3e})")
    pv_w = v.projector @ w.frame
    upper = dagger(w.frame) @ pv_w
    lower = dagger(w.perp_frame) @ pv_w
    # A = lower @ upper^{-1}
    coeff = np.linalg.solve(upper.T, lower.T).T
    return ChartCoordinates(w, coeff)


def chart_inverse(coords: ChartCoordinates, tol: ToleranceConfig = DEFAULT_TOL) -> Subspace:
    """Graph of A over its base, with the projector assembled block by block."""
    w = coords.base
    a = coords.coeff
    k = w.dim
    g = herm_apply(np.eye(k) + dagger(a) @ a, "inverse", tol)
    ga = g @ dagger(a)
    blocks = np.block([[g, ga], [a @ g, a @ ga]])
    basis = w.basis
    proj = basis @ blocks @ dagger(basis)
    proj = 0.5 * (proj + dagger(proj))
    frame = (w.frame + w.perp_frame @ a) @ herm_apply(np.eye(k) + dagger(a) @ a, "inverse_sqrt", tol)
    return Subspace(frame, proj)


def _fractional_parts(w_from: Subspace, w_to: Subspace, coeff: Matrix):
    graph = w_from.frame + w_from.perp_frame @ coeff
    m = dagger(w_to.frame) @ graph
    top = dagger(w_to.perp_frame) @ graph
    return m, top


def _check_middle(m: Matrix, tol: ToleranceConfig):
    s = singular_values(m)
    if s[0] == 0.0 or s[-1] <= tol.tol_rank * s[0]:
        raise OutsideDomain(f"middle factor is singular (s_min/s_max = {s[-1] / max(s[0], 1e-300):.3e})")


def transition(
    w_from: Subspace,
    w_to: Subspace,
    coords: ChartCoordinates,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> ChartCoordinates:
    """Change of graph coordinates from base ``w_from`` to base ``w_to``.

    Closed fractional form ``P₋(1_W + A)(P₊(P_W + A))^{-1}`` written in the
    rotated frame where ``w_to`` plays the role of H₊.
    """
    if coords.base is not w_from and not np.allclose(coords.base.projector, w_from.projector):
        raise DimensionMismatch("coordinates are not based at w_from")
    if w_to.dim != w_from.dim or w_to.n != w_from.n:
        raise DimensionMismatch("transition between different strata")
    m, top = _fractional_parts(w_from, w_to, coords.coeff)
    _check_middle(m, tol)
    return ChartCoordinates(w_to, np.linalg.solve(m.T, top.T).T)


def transition_derivative(
    w_from: Subspace,
    w_to: Subspace,
    coords: ChartCoordinates,
    direction,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> Matrix:
    """Directional derivative of :func:`transition` at ``coords`` along ``direction``.

    With ``M(A) = P₊(P_W + A)`` the derivative is
    ``P₋ H M^{-1} - P₋ (1_W + A) M^{-1} (P₊ H) M^{-1}``.
    """
    h = as_matrix(direction)
    if h.shape != coords.coeff.shape:
        raise DimensionMismatch(f"direction shape {h.shape} != {coords.coeff.shape}")
    m, top = _fractional_parts(w_from, w_to, coords.coeff)
    _check_middle(m, tol)
    dh = w_from.perp_frame @ h
    dm = dagger(w_to.frame) @ dh
    dtop = dagger(w_to.perp_frame) @ dh
    m_inv = np.linalg.inv(m)
    return dtop @ m_inv - top @ m_inv @ dm @ m_inv


def restricted_defect(pol: Polarization, v: Subspace, p: float = 2) -> RestrictedDefect:
    if v.n != pol.n:
        raise DimensionMismatch(f"subspace lives in C^{v.n}, polarization in C^{pol.n}")
    d = v.projector - pol.p_plus
    _, pm, mp, _ = pol.blocks(v.projector)
    return RestrictedDefect(
        hs_defect=schatten_norm(d, 2),
        p_defect=schatten_norm(d, p),
        offdiag_plus_minus=schatten_norm(pm, 2),
        offdiag_minus_plus=schatten_norm(mp, 2),
    )
