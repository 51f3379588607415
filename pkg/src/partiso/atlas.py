"""Cross-sections, unitary charts and groupoid charts with coordinate structure maps.

The reference subspace plays the role of H₊: it is the span of the first ``k``
coordinate vectors, where ``k`` is the dimension of the subspaces in play.
For the index-zero stratum ``k = n_plus`` it coincides with H₊.  A groupoid
chart sends an arrow ``u`` to ``(A, B, X)``: the graph coordinate of ``t(u)``,
that of ``s(u)``, and the logarithm of the unitary ``σ_γ(t(u))* u σ_β(s(u))``
restricted to the reference subspace.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BranchCut,
    ChartMismatch,
    DimensionMismatch,
    DomainTooFar,
    NotComposable,
    NotProjector,
    NotSkewHermitian,
    OutsideChartDomain,
    OutsideDomain,
    OutsideSectionDomain,
)
from .grassmann import ChartCoordinates, Subspace, chart_forward, chart_inverse, transition
from .groupoid import PartialIsometry, source, target
from .matcore import (
    DEFAULT_TOL,
    Matrix,
    ToleranceConfig,
    as_matrix,
    dagger,
    herm_apply,
    is_unitary,
    opnorm,
    skew_exp,
    unitary_log,
    unitary_spectrum,
)


def reference_projector(n: int, k: int) -> Matrix:
    return np.diag(np.r_[np.ones(k), np.zeros(n - k)]).astype(complex)


def _projector_residual(p: Matrix) -> float:
    return max(opnorm(p - dagger(p)), opnorm(p @ p - p))


def kato_unitary(p, q, tol: ToleranceConfig = DEFAULT_TOL) -> Matrix:
    """Direct-rotation unitary ``u`` with ``u q u* = p``.

    ``u = (pq + (1-p)(1-q)) (1 - (p-q)^2)^{-1/2}``, defined for ``||p - q|| < 1``.
    """
    p = as_matrix(p)
    q = as_matrix(q)
    for name, m in (("p", p), ("q", q)):
        resid = _projector_residual(m)
        if resid > tol.tol_equal:
            raise NotProjector(f"{name} is not a projector (residual {resid:.3e})", residual=resid)
    dist = opnorm(p - q)
    if dist >= 1.0 - tol.tol_rank:
        raise DomainTooFar(f"||p - q|| = {dist:.6f} is not below 1")
    eye = np.eye(p.shape[0], dtype=complex)
    d = p - q
    return (p @ q + (eye - p) @ (eye - q)) @ herm_apply(eye - d @ d, "inverse_sqrt", tol)


@dataclass(frozen=True, eq=False)
class CrossSection:
    """Local section ``V -> σ(V)`` with ``σ(V) R σ(V)* = P_V`` near ``base_subspace``.

    ``R`` is the reference projector onto the first ``dim`` coordinates.
    """

    base_subspace: Subspace
    base_unitary: Matrix
    domain_radius: float = 0.99
    tol: ToleranceConfig = field(default=DEFAULT_TOL)

    def __post_init__(self):
        g = as_matrix(self.base_unitary)
        object.__setattr__(self, "base_unitary", g)
        if not 0.0 < self.domain_radius <= 1.0:
            raise ValueError(f"domain_radius must lie in (0, 1], got {self.domain_radius}")
        if not is_unitary(g, self.tol):
            raise ValueError("base_unitary is not unitary")
        gr = g @ reference_projector(self.n, self.dim)
        if opnorm(self.base_subspace.projector @ gr - gr) > self.tol.tol_equal:
            raise ValueError("base_unitary does not carry the reference subspace onto base_subspace")

    @property
    def n(self) -> int:
        return self.base_subspace.n

    @property
    def dim(self) -> int:
        return self.base_subspace.dim

    @classmethod
    def at(cls, w: Subspace, domain_radius: float = 0.99, tol: ToleranceConfig = DEFAULT_TOL) -> CrossSection:
        """Section centred at ``w`` with ``g = [frame(W) | frame(W⊥)]``."""
        return cls(w, w.basis, domain_radius, tol)


def section_apply(sec: CrossSection, v: Subspace) -> Matrix:
    if v.dim != sec.dim or v.n != sec.n:
        raise DimensionMismatch(f"dim(v)={v.dim}, section dimension {sec.dim}")
    dist = opnorm(v.projector - sec.base_subspace.projector)
    if dist >= sec.domain_radius:
        raise OutsideSectionDomain(f"||P_V - P_W|| = {dist:.6f} >= {sec.domain_radius}")
    return kato_unitary(v.projector, sec.base_subspace.projector, sec.tol) @ sec.base_unitary


@dataclass(frozen=True, eq=False)
class UnitaryChart:
    """Principal-logarithm chart on U(k) centred at ``base_point``."""

    base_point: Matrix
    branch_margin: float = 1e-6
    tol: ToleranceConfig = field(default=DEFAULT_TOL)

    def __post_init__(self):
        b = as_matrix(self.base_point)
        object.__setattr__(self, "base_point", b)
        if not is_unitary(b, self.tol):
            raise ValueError("base_point is not unitary")
        if self.branch_margin <= 0:
            raise ValueError("branch_margin must be positive")

    @property
    def dim(self) -> int:
        return self.base_point.shape[0]

    @classmethod
    def identity(cls, k: int, branch_margin: float = 1e-6, tol: ToleranceConfig = DEFAULT_TOL) -> UnitaryChart:
        return cls(np.eye(k, dtype=complex), branch_margin, tol)


def skew_residual(x: Matrix) -> float:
    return opnorm(x + dagger(x))


def unitary_chart_forward(ch: UnitaryChart, u) -> Matrix:
    w = dagger(ch.base_point) @ as_matrix(u)
    gap = float(np.min(np.abs(unitary_spectrum(w) + 1.0)))
    if gap < ch.branch_margin:
        raise BranchCut(f"eigenvalue within {gap:.3e} of -1")
    return unitary_log(w)


def unitary_chart_inverse(ch: UnitaryChart, x) -> Matrix:
    x = as_matrix(x)
    resid = skew_residual(x)
    if resid > ch.tol.tol_equal:
        raise NotSkewHermitian(f"||X + X*|| = {resid:.3e}", residual=resid)
    return ch.base_point @ skew_exp(x)


@dataclass(frozen=True, eq=False)
class GroupoidChart:
    target_section: CrossSection
    source_section: CrossSection
    unitary_chart: UnitaryChart

    def __post_init__(self):
        dims = {self.target_section.dim, self.source_section.dim, self.unitary_chart.dim}
        if len(dims) != 1 or self.target_section.n != self.source_section.n:
            raise DimensionMismatch("chart components disagree on dimensions")

    @property
    def n(self) -> int:
        return self.target_section.n

    @property
    def dim(self) -> int:
        return self.unitary_chart.dim

    @property
    def tol(self) -> ToleranceConfig:
        return self.target_section.tol

    @classmethod
    def at(
        cls,
        target_base: Subspace,
        source_base: Subspace,
        base_point=None,
        domain_radius: float = 0.99,
        branch_margin: float = 1e-6,
        tol: ToleranceConfig = DEFAULT_TOL,
    ) -> GroupoidChart:
        k = target_base.dim
        if base_point is None:
            base_point = np.eye(k, dtype=complex)
        return cls(
            CrossSection.at(target_base, domain_radius, tol),
            CrossSection.at(source_base, domain_radius, tol),
            UnitaryChart(base_point, branch_margin, tol),
        )


@dataclass(frozen=True)
class GroupoidCoordinates:
    target_coord: ChartCoordinates
    source_coord: ChartCoordinates
    algebra_coord: Matrix


def _embed(block: Matrix, n: int) -> Matrix:
    """Extend an operator on the reference subspace by zero."""
    k = block.shape[0]
    out = np.zeros((n, n), dtype=complex)
    out[:k, :k] = block
    return out


def _section_at(sec: CrossSection, v: Subspace, which: str) -> Matrix:
    try:
        return section_apply(sec, v)
    except (OutsideSectionDomain, DomainTooFar) as exc:
        raise OutsideChartDomain(which, str(exc)) from exc


def _grassmann_coord(sec: CrossSection, v: Subspace, which: str) -> ChartCoordinates:
    try:
        return chart_forward(sec.base_subspace, v, sec.tol)
    except OutsideDomain as exc:
        raise OutsideChartDomain(which, str(exc)) from exc


def _same_section(a: CrossSection, b: CrossSection, tol: ToleranceConfig) -> bool:
    if a is b:
        return True
    return (
        a.n == b.n
        and a.dim == b.dim
        and opnorm(a.base_subspace.projector - b.base_subspace.projector) <= tol.tol_equal
        and opnorm(a.base_unitary - b.base_unitary) <= tol.tol_equal
    )


def _same_base(coords: ChartCoordinates, sec: CrossSection, tol: ToleranceConfig) -> bool:
    w = coords.base
    s = sec.base_subspace
    if w is s:
        return True
    return (
        opnorm(w.frame - s.frame) <= tol.tol_equal
        and opnorm(w.perp_frame - s.perp_frame) <= tol.tol_equal
    )


def transported_unitary(ch: GroupoidChart, u: PartialIsometry) -> Matrix:
    """``σ_γ(t(u))* u σ_β(s(u))`` as an n x n matrix (unitary on the reference block)."""
    sig_t = _section_at(ch.target_section, target(u), "target")
    sig_s = _section_at(ch.source_section, source(u), "source")
    return dagger(sig_t) @ u.op @ sig_s


def groupoid_chart_forward(ch: GroupoidChart, u: PartialIsometry) -> GroupoidCoordinates:
    if u.n != ch.n:
        raise DimensionMismatch(f"arrow acts on C^{u.n}, chart on C^{ch.n}")
    t_sub = target(u)
    s_sub = source(u)
    if t_sub.dim != ch.dim or s_sub.dim != ch.dim:
        raise OutsideChartDomain("stratum", f"rank {t_sub.dim} arrow in a rank {ch.dim} chart")
    a = _grassmann_coord(ch.target_section, t_sub, "target")
    b = _grassmann_coord(ch.source_section, s_sub, "source")
    sig_t = _section_at(ch.target_section, t_sub, "target")
    sig_s = _section_at(ch.source_section, s_sub, "source")
    moved = dagger(sig_t) @ u.op @ sig_s
    k = ch.dim
    x = unitary_chart_forward(ch.unitary_chart, moved[:k, :k])
    return GroupoidCoordinates(a, b, x)


def groupoid_chart_inverse(ch: GroupoidChart, c: GroupoidCoordinates) -> PartialIsometry:
    tol = ch.tol
    resid = skew_residual(as_matrix(c.algebra_coord))
    if resid > tol.tol_equal:
        raise NotSkewHermitian(f"||X + X*|| = {resid:.3e}", residual=resid)
    if not _same_base(c.target_coord, ch.target_section, tol):
        raise ChartMismatch("target coordinate is not based at the chart's target section")
    if not _same_base(c.source_coord, ch.source_section, tol):
        raise ChartMismatch("source coordinate is not based at the chart's source section")
    v_a = chart_inverse(c.target_coord, tol)
    v_b = chart_inverse(c.source_coord, tol)
    sig_t = _section_at(ch.target_section, v_a, "target")
    sig_s = _section_at(ch.source_section, v_b, "source")
    core = _embed(unitary_chart_inverse(ch.unitary_chart, c.algebra_coord), ch.n)
    return PartialIsometry(sig_t @ core @ dagger(sig_s), tol)


def inversion_in_chart(ch_in: GroupoidChart, ch_out: GroupoidChart, c: GroupoidCoordinates) -> GroupoidCoordinates:
    """Inversion ``u -> u*`` in coordinates: ``(A, B, X) -> (B, A, ψ'(ψ^{-1}(X)*))``.

    ``ch_out`` must carry ``ch_in``'s sections swapped; its unitary chart is free.
    """
    tol = ch_in.tol
    if not (
        _same_section(ch_out.target_section, ch_in.source_section, tol)
        and _same_section(ch_out.source_section, ch_in.target_section, tol)
    ):
        raise ChartMismatch("ch_out must swap the source and target sections of ch_in")
    u = unitary_chart_inverse(ch_in.unitary_chart, c.algebra_coord)
    x = unitary_chart_forward(ch_out.unitary_chart, dagger(u))
    return GroupoidCoordinates(c.source_coord, c.target_coord, x)


def multiplication_in_chart(
    ch_left: GroupoidChart,
    ch_right: GroupoidChart,
    ch_out: GroupoidChart,
    c_left: GroupoidCoordinates,
    c_right: GroupoidCoordinates,
) -> GroupoidCoordinates:
    """Product in coordinates: ``(A, B, X)·(B, C, X') = (A, C, ψ''(ψ^{-1}(X) ψ'^{-1}(X')))``."""
    tol = ch_left.tol
    if not _same_section(ch_left.source_section, ch_right.target_section, tol):
        raise ChartMismatch("left source section and right target section differ")
    if not (
        _same_section(ch_out.target_section, ch_left.target_section, tol)
        and _same_section(ch_out.source_section, ch_right.source_section, tol)
    ):
        raise ChartMismatch("output chart must use the left target and right source sections")
    mismatch = opnorm(c_left.source_coord.coeff - c_right.target_coord.coeff)
    if mismatch > tol.tol_equal:
        raise NotComposable(mismatch)
    u = unitary_chart_inverse(ch_left.unitary_chart, c_left.algebra_coord)
    v = unitary_chart_inverse(ch_right.unitary_chart, c_right.algebra_coord)
    x = unitary_chart_forward(ch_out.unitary_chart, u @ v)
    return GroupoidCoordinates(c_left.target_coord, c_right.source_coord, x)


def identity_in_chart(ch: GroupoidChart, b: ChartCoordinates) -> GroupoidCoordinates:
    tol = ch.tol
    if not _same_section(ch.target_section, ch.source_section, tol):
        raise ChartMismatch("identity section needs a chart with equal source and target sections")
    if opnorm(ch.unitary_chart.base_point - np.eye(ch.dim)) > tol.tol_equal:
        raise ChartMismatch("identity section needs the unitary chart centred at the identity")
    if not _same_base(b, ch.source_section, tol):
        raise ChartMismatch("coordinate is not based at the chart's section")
    v = chart_inverse(b, tol)
    _section_at(ch.source_section, v, "source")
    return GroupoidCoordinates(b, b, np.zeros((ch.dim, ch.dim), dtype=complex))


def groupoid_chart_transition(ch_from: GroupoidChart, ch_to: GroupoidChart, c: GroupoidCoordinates) -> GroupoidCoordinates:
    """Change of groupoid chart assembled from closed-form pieces.

    The Grassmann components move by :func:`transition`; the unitary
    component is ``ψ(σ_γ(V_A)* σ_γ'(V_A) ψ'^{-1}(X) σ_β'(V_B)* σ_β(V_B))``.
    """
    tol = ch_to.tol
    w_tgt_from = ch_from.target_section.base_subspace
    w_src_from = ch_from.source_section.base_subspace
    try:
        a_new = transition(w_tgt_from, ch_to.target_section.base_subspace, c.target_coord, tol)
    except OutsideDomain as exc:
        raise OutsideChartDomain("target", str(exc)) from exc
    try:
        b_new = transition(w_src_from, ch_to.source_section.base_subspace, c.source_coord, tol)
    except OutsideDomain as exc:
        raise OutsideChartDomain("source", str(exc)) from exc
    v_a = chart_inverse(c.target_coord, tol)
    v_b = chart_inverse(c.source_coord, tol)
    left = dagger(_section_at(ch_to.target_section, v_a, "target")) @ _section_at(ch_from.target_section, v_a, "target")
    right = dagger(_section_at(ch_from.source_section, v_b, "source")) @ _section_at(ch_to.source_section, v_b, "source")
    core = _embed(unitary_chart_inverse(ch_from.unitary_chart, c.algebra_coord), ch_from.n)
    k = ch_to.dim
    x = unitary_chart_forward(ch_to.unitary_chart, (left @ core @ right)[:k, :k])
    return GroupoidCoordinates(a_new, b_new, x)
