"""Partial isometries as arrows of a groupoid over the Grassmannian."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from .errors import DimensionMismatch, NotComposable, NotPartialIsometry
from .grassmann import Polarization, Subspace
from .matcore import (
    DEFAULT_TOL,
    Matrix,
    ToleranceConfig,
    as_matrix,
    dagger,
    opnorm,
    random_unitary,
    schatten_norm,
)


@dataclass(frozen=True, eq=False)
class PartialIsometry:
    """Arrow ``u`` with ``u u* u = u``.

    ``check=False`` skips validation; the verification harness uses it to
    feed deliberately broken arrows through the axiom checks.
    """

    op: Matrix
    tol: ToleranceConfig = DEFAULT_TOL
    check: bool = True

    def __post_init__(self):
        u = as_matrix(self.op)
        if u.shape[0] != u.shape[1]:
            raise DimensionMismatch(f"arrow must be square, got {u.shape}")
        object.__setattr__(self, "op", u)
        if self.check:
            resid = partial_isometry_residual(u)
            if resid > self.tol.tol_equal:
                raise NotPartialIsometry(f"||u u* u - u|| = {resid:.3e}", residual=resid)

    @property
    def n(self) -> int:
        return self.op.shape[0]

    @cached_property
    def source_proj(self) -> Matrix:
        p = dagger(self.op) @ self.op
        return 0.5 * (p + dagger(p))

    @cached_property
    def target_proj(self) -> Matrix:
        p = self.op @ dagger(self.op)
        return 0.5 * (p + dagger(p))


@dataclass(frozen=True)
class ComposablePair:
    left: PartialIsometry
    right: PartialIsometry
    mismatch: float


def partial_isometry_residual(u: Matrix) -> float:
    return opnorm(u @ dagger(u) @ u - u)


def source(u: PartialIsometry) -> Subspace:
    return Subspace.from_projector(u.source_proj, u.tol)


def target(u: PartialIsometry) -> Subspace:
    return Subspace.from_projector(u.target_proj, u.tol)


def composable(g: PartialIsometry, h: PartialIsometry, tol: ToleranceConfig = DEFAULT_TOL) -> ComposablePair:
    if g.n != h.n:
        raise DimensionMismatch(f"arrows act on C^{g.n} and C^{h.n}")
    mismatch = opnorm(g.source_proj - h.target_proj)
    if mismatch > tol.tol_equal:
        raise NotComposable(mismatch)
    return ComposablePair(g, h, mismatch)


def compose(g: PartialIsometry, h: PartialIsometry, tol: ToleranceConfig = DEFAULT_TOL) -> PartialIsometry:
    """The product ``g h``, defined only when ``s(g) = t(h)``."""
    composable(g, h, tol)
    return PartialIsometry(g.op @ h.op, tol, check=g.check and h.check)


def invert(u: PartialIsometry) -> PartialIsometry:
    return PartialIsometry(dagger(u.op), u.tol, check=u.check)


def identity_arrow(v: Subspace, tol: ToleranceConfig = DEFAULT_TOL) -> PartialIsometry:
    return PartialIsometry(v.projector, tol)


def commutator_defect(pol: Polarization, u: PartialIsometry, p: float = 2) -> float:
    """Schatten p-norm of ``[u, P₊]``."""
    pp = pol.p_plus
    return schatten_norm(u.op @ pp - pp @ u.op, p)


def random_arrow(src: Subspace, tgt: Subspace, seed, tol: ToleranceConfig = DEFAULT_TOL) -> PartialIsometry:
    """``frame(tgt) V frame(src)*`` with V a Haar unitary on C^k."""
    if src.dim != tgt.dim or src.n != tgt.n:
        raise DimensionMismatch(f"dim(src)={src.dim}, dim(tgt)={tgt.dim}")
    v = random_unitary(src.dim, seed)
    return PartialIsometry(tgt.frame @ v @ dagger(src.frame), tol)


def arrow_distance(a: PartialIsometry, b: PartialIsometry) -> float:
    return opnorm(a.op - b.op)
