"""Property suites for the groupoid axioms and the chart atlases.

Each trial draws its instances from an independent stream, evaluates a fixed
list of checks, and yields one residual per check.  A trial whose samples fall
outside a chart or section domain is skipped with a recorded reason.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from ..atlas import (
    CrossSection,
    GroupoidChart,
    GroupoidCoordinates,
    UnitaryChart,
    groupoid_chart_forward,
    groupoid_chart_inverse,
    groupoid_chart_transition,
    identity_in_chart,
    inversion_in_chart,
    multiplication_in_chart,
    reference_projector,
    section_apply,
    transported_unitary,
)
from ..errors import DOMAIN_ERRORS, ConfigError, NotComposable, PartisoError
from ..grassmann import (
    ChartCoordinates,
    Polarization,
    chart_forward,
    chart_inverse,
    restricted_defect,
    transition,
    transition_derivative,
)
from ..groupoid import (
    PartialIsometry,
    commutator_defect,
    compose,
    identity_arrow,
    invert,
    random_arrow,
    source,
    target,
)
from ..matcore import DEFAULT_TOL, ToleranceConfig, dagger, opnorm, random_unitary
from .sampling import (
    nearby_subspace,
    random_coords,
    random_skew,
    random_subspace,
    trial_rng,
    unit_direction,
)

GROUPOID_TAG = 1
CHART_TAG = 2

# Fixed acceptance thresholds; every other check uses tol_equal.
COORD_ORACLE_TOL = 1e-10
COCYCLE_TOL = 1e-8
DERIVATIVE_TOL = 1e-6
BLOCK_IDENTITY_TOL = 1e-12
MONOTONICITY_TOL = 1e-12
SECTION_BASE_TOL = 1e-12

SCHATTEN_ORDERS = (1.0, 2.0, 4.0, math.inf)

SCALED_ARROW_FACTOR = 1.01
NON_SKEW_SHIFT = 1e-3


@dataclass(frozen=True)
class SuiteConfig:
    n_plus: int = 4
    n_minus: int = 4
    k: int | None = None
    trials: int = 100
    seed: int = 7
    tolerances: ToleranceConfig = field(default=DEFAULT_TOL)
    schatten_order: float = 2.0

    def __post_init__(self):
        if self.n_plus < 1 or self.n_minus < 1:
            raise ConfigError("n_plus and n_minus must be >= 1")
        if self.k is None:
            object.__setattr__(self, "k", self.n_plus)
        if not 1 <= self.k <= self.n:
            raise ConfigError(f"k must lie in [1, {self.n}], got {self.k}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")
        if math.isnan(self.schatten_order) or self.schatten_order < 1:
            raise ConfigError(f"Schatten order must be >= 1, got {self.schatten_order}")

    @property
    def n(self) -> int:
        return self.n_plus + self.n_minus

    @property
    def polarization(self) -> Polarization:
        return Polarization(self.n_plus, self.n_minus)

    def to_dict(self) -> dict:
        return {
            "n_plus": self.n_plus,
            "n_minus": self.n_minus,
            "k": self.k,
            "trials": self.trials,
            "seed": self.seed,
            "tol_factor": self.tolerances.tol_factor,
            "tol_rank": self.tolerances.tol_rank,
            "tol_equal": self.tolerances.tol_equal,
            "schatten_order": "inf" if math.isinf(self.schatten_order) else self.schatten_order,
        }


@dataclass
class CheckStats:
    name: str
    threshold: float
    max_residual: float
    mean_residual: float
    passes: int
    failures: int


@dataclass
class TrialReport:
    suite_name: str
    trials: int
    passes: int
    failures: int
    skipped: int
    worst_residual: float
    checks: list[CheckStats]
    skip_reasons: dict[str, int] = field(default_factory=dict)
    # per-trial names of failed checks, in trial order (None for skipped trials)
    failed_checks: list[frozenset | None] = field(default_factory=list, repr=False)
    wall_time: float = 0.0

    @property
    def ok(self) -> bool:
        return self.failures == 0

    def check(self, name: str) -> CheckStats:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def _build_tol(cfg: SuiteConfig) -> ToleranceConfig:
    """Tolerances for constructing trial objects.

    ``tol_equal`` doubles as the pass threshold of every check.  Tightening it
    below the library default must make checks fail, not make the inputs
    unconstructible, so construction never uses a smaller value.
    """
    t = cfg.tolerances
    return replace(t, tol_equal=max(t.tol_equal, DEFAULT_TOL.tol_equal))


class _Skip(Exception):
    def __init__(self, reason: str):
        self.reason = reason


class _Trial:
    def __init__(self):
        self.residuals: dict[str, float] = {}

    def record(self, name: str, fn: Callable[[], float]) -> None:
        try:
            value = float(fn())
        except DOMAIN_ERRORS as exc:
            which = getattr(exc, "which", None)
            raise _Skip(f"{type(exc).__name__}:{which}" if which else type(exc).__name__) from exc
        except PartisoError as exc:
            value = exc.residual if exc.residual is not None else math.inf
        self.residuals[name] = value


def _run_suite(
    name: str,
    tag: int,
    cfg: SuiteConfig,
    trial_fn: Callable[[np.random.Generator], dict[str, float]],
    thresholds: dict[str, float],
) -> TrialReport:
    start = time.perf_counter()
    outcomes: list[dict[str, float] | None] = []
    skip_reasons: dict[str, int] = {}
    for i in range(cfg.trials):
        try:
            outcomes.append(trial_fn(trial_rng(cfg.seed, tag, i)))
        except _Skip as skip:
            outcomes.append(None)
            skip_reasons[skip.reason] = skip_reasons.get(skip.reason, 0) + 1

    checks = []
    failed_checks: list[frozenset | None] = []
    for res in outcomes:
        if res is None:
            failed_checks.append(None)
        else:
            failed_checks.append(frozenset(c for c, v in res.items() if not v <= thresholds[c]))
    for check_name, threshold in thresholds.items():
        values = np.array([res[check_name] for res in outcomes if res is not None])
        fails = int(np.sum(~(values <= threshold)))
        checks.append(
            CheckStats(
                name=check_name,
                threshold=threshold,
                max_residual=float(values.max()) if values.size else 0.0,
                mean_residual=float(values.mean()) if values.size else 0.0,
                passes=int(values.size) - fails,
                failures=fails,
            )
        )
    done = [f for f in failed_checks if f is not None]
    failures = sum(1 for f in done if f)
    return TrialReport(
        suite_name=name,
        trials=cfg.trials,
        passes=len(done) - failures,
        failures=failures,
        skipped=cfg.trials - len(done),
        worst_residual=max((c.max_residual for c in checks), default=0.0),
        checks=checks,
        skip_reasons=dict(sorted(skip_reasons.items())),
        failed_checks=failed_checks,
        wall_time=time.perf_counter() - start,
    )


# -- groupoid axioms --------------------------------------------------------

GROUPOID_CHECKS = (
    "partial_isometry",
    "transitivity",
    "unit_right",
    "unit_left",
    "inverse_right",
    "inverse_left",
    "associativity",
    "anti_homomorphism",
    "composition_closure",
    "non_composable_rejected",
    "commutator_block_identity",
    "schatten_monotonicity",
)

# checks whose inputs include the arrow g that the scaled-arrow injection corrupts
SCALED_ARROW_CONSUMERS = frozenset(GROUPOID_CHECKS) - {"non_composable_rejected"}


def _pi_residual(u: PartialIsometry) -> float:
    a = u.op
    return max(opnorm(a @ dagger(a) @ a - a), opnorm(dagger(a) @ a @ dagger(a) - dagger(a)))


def block_identity_residual(pol: Polarization, u: PartialIsometry) -> float:
    """Relative gap in ``||[u,P₊]||₂² = ||u₊₋||₂² + ||u₋₊||₂²``."""
    lhs = commutator_defect(pol, u, 2) ** 2
    _, pm, mp, _ = pol.blocks(u.op)
    rhs = float(np.sum(np.abs(pm) ** 2) + np.sum(np.abs(mp) ** 2))
    return abs(lhs - rhs) / max(lhs, rhs, 1e-300) if max(lhs, rhs) > 0 else 0.0


def monotonicity_violation(norms: dict[float, float]) -> float:
    """Largest violation of ``||M||_p`` being non-increasing in p."""
    orders = sorted(norms)
    return max([0.0] + [norms[hi] - norms[lo] for lo, hi in zip(orders, orders[1:])])


def defect_reports(pol: Polarization, u: PartialIsometry, orders) -> list[dict[float, float]]:
    """Schatten norms of P_s - P₊, P_t - P₊ and [u, P₊] for each order."""
    s, t = source(u), target(u)
    return [
        {p: restricted_defect(pol, s, p).p_defect for p in orders},
        {p: restricted_defect(pol, t, p).p_defect for p in orders},
        {p: commutator_defect(pol, u, p) for p in orders},
    ]


def _groupoid_trial(cfg: SuiteConfig, inject: str | None):
    n, k, tol = cfg.n, cfg.k, _build_tol(cfg)
    pol = cfg.polarization
    orders = tuple(sorted(set(SCHATTEN_ORDERS) | {float(cfg.schatten_order)}))

    def trial(rng):
        w1, w2, w3, w4, w5 = (random_subspace(n, k, rng) for _ in range(5))
        g = random_arrow(w2, w1, rng, tol)
        h = random_arrow(w3, w2, rng, tol)
        kk = random_arrow(w4, w3, rng, tol)
        stray = random_arrow(w3, w5, rng, tol)
        if inject == "scaled_arrow":
            g = PartialIsometry(SCALED_ARROW_FACTOR * g.op, tol, check=False)
        t = _Trial()
        t.record("partial_isometry", lambda: max(_pi_residual(x) for x in (g, h, kk)))
        t.record(
            "transitivity",
            lambda: max(
                opnorm(source(g).projector - w2.projector),
                opnorm(target(g).projector - w1.projector),
            ),
        )
        t.record("unit_right", lambda: opnorm(compose(g, identity_arrow(source(g), tol), tol).op - g.op))
        t.record("unit_left", lambda: opnorm(compose(identity_arrow(target(g), tol), g, tol).op - g.op))
        t.record(
            "inverse_right",
            lambda: opnorm(compose(g, invert(g), tol).op - identity_arrow(target(g), tol).op),
        )
        t.record(
            "inverse_left",
            lambda: opnorm(compose(invert(g), g, tol).op - identity_arrow(source(g), tol).op),
        )
        t.record(
            "associativity",
            lambda: opnorm(compose(compose(g, h, tol), kk, tol).op - compose(g, compose(h, kk, tol), tol).op),
        )
        t.record(
            "anti_homomorphism",
            lambda: opnorm(invert(compose(g, h, tol)).op - compose(invert(h), invert(g), tol).op),
        )

        def closure():
            gh = compose(g, h, tol)
            return max(
                _pi_residual(gh),
                opnorm(gh.source_proj - h.source_proj),
                opnorm(gh.target_proj - g.target_proj),
            )

        t.record("composition_closure", closure)

        def rejected():
            try:
                compose(g, stray, tol)
            except NotComposable:
                return 0.0
            return 1.0

        t.record("non_composable_rejected", rejected)
        t.record("commutator_block_identity", lambda: max(block_identity_residual(pol, x) for x in (g, h, kk)))
        t.record(
            "schatten_monotonicity",
            lambda: max(monotonicity_violation(r) for x in (g, h, kk) for r in defect_reports(pol, x, orders)),
        )
        return t.residuals

    return trial


def _groupoid_thresholds(cfg: SuiteConfig) -> dict[str, float]:
    th = {name: cfg.tolerances.tol_equal for name in GROUPOID_CHECKS}
    th["non_composable_rejected"] = 0.0
    th["commutator_block_identity"] = BLOCK_IDENTITY_TOL
    th["schatten_monotonicity"] = MONOTONICITY_TOL
    return th


def run_groupoid_axiom_suite(cfg: SuiteConfig, inject: str | None = None) -> TrialReport:
    """Unit, inverse, associativity and anti-homomorphism laws on random arrows.

    ``inject="scaled_arrow"`` multiplies one arrow per trial by 1.01 so that
    the detectors can be exercised.
    """
    if inject not in (None, "scaled_arrow"):
        raise ConfigError(f"unknown injection {inject!r}")
    name = "groupoid_axioms" if inject is None else f"groupoid_axioms[{inject}]"
    return _run_suite(name, GROUPOID_TAG, cfg, _groupoid_trial(cfg, inject), _groupoid_thresholds(cfg))


# -- charts -----------------------------------------------------------------

CHART_CHECKS = (
    "chart_roundtrip",
    "reverse_roundtrip",
    "coord_oracle",
    "projector_residual",
    "transition_formula",
    "cocycle",
    "transition_derivative",
    "section_property",
    "section_base",
    "product_image",
    "groupoid_inverse_forward",
    "source_target_projection",
    "transported_block",
    "inversion_in_chart",
    "multiplication_in_chart",
    "identity_in_chart",
    "identity_algebra_zero",
    "groupoid_transition",
)

NON_SKEW_CONSUMERS = frozenset(
    {
        "product_image",
        "source_target_projection",
        "transported_block",
        "inversion_in_chart",
        "multiplication_in_chart",
        "groupoid_transition",
    }
)


def graph_projector_oracle(coords: ChartCoordinates):
    """F (F*F)^{-1} F* for the graph frame F = frame(W) + frame(W⊥) A."""
    f = coords.base.frame + coords.base.perp_frame @ coords.coeff
    return f @ np.linalg.solve(dagger(f) @ f, dagger(f))


def richardson_derivative(fn: Callable[[float], np.ndarray], h: float) -> np.ndarray:
    """Central differences at steps h and h/2 combined by Richardson extrapolation."""

    def central(step):
        return (fn(step) - fn(-step)) / (2 * step)

    return (4 * central(h / 2) - central(h)) / 3


def coords_distance(a: GroupoidCoordinates, b: GroupoidCoordinates) -> float:
    return max(
        opnorm(a.target_coord.coeff - b.target_coord.coeff),
        opnorm(a.source_coord.coeff - b.source_coord.coeff),
        opnorm(a.algebra_coord - b.algebra_coord),
    )


def _chart_trial(cfg: SuiteConfig, inject: str | None):
    n, k, tol = cfg.n, cfg.k, _build_tol(cfg)

    def trial(rng):
        # all random draws first, in a fixed order
        w = random_subspace(n, k, rng)
        v = nearby_subspace(w, rng)
        a = random_coords(w, rng)
        w2 = nearby_subspace(w, rng, 0.2)
        w3 = nearby_subspace(w, rng, 0.2)
        direction = unit_direction(a.coeff.shape, rng)
        v_sec = nearby_subspace(w, rng)
        wb = random_subspace(n, k, rng)
        wc = random_subspace(n, k, rng)
        b = random_coords(wb, rng)
        c_coord = random_coords(wc, rng)
        x = random_skew(k, rng)
        x2 = random_skew(k, rng)
        bases = [random_unitary(k, rng) for _ in range(5)]
        arrow_src = nearby_subspace(wb, rng)
        arrow_tgt = nearby_subspace(w, rng)
        arrow_seed = int(rng.integers(2**32))
        a_small = random_coords(w, rng, 0.3)
        b_small = random_coords(wb, rng, 0.3)
        x_small = random_skew(k, rng, 1.0)
        w_shift = nearby_subspace(w, rng, 0.1)
        wb_shift = nearby_subspace(wb, rng, 0.1)

        if inject == "non_skew_x":
            x = x + NON_SKEW_SHIFT * np.eye(k)

        t = _Trial()
        va = chart_inverse(a, tol)

        # Grassmann charts
        t.record("chart_roundtrip", lambda: opnorm(chart_inverse(chart_forward(w, v, tol), tol).projector - v.projector))
        t.record("reverse_roundtrip", lambda: opnorm(chart_forward(w, va, tol).coeff - a.coeff))
        t.record("coord_oracle", lambda: opnorm(va.projector - graph_projector_oracle(a)))
        t.record(
            "projector_residual",
            lambda: max(opnorm(va.projector @ va.projector - va.projector), opnorm(va.projector - dagger(va.projector))),
        )
        t.record("transition_formula", lambda: opnorm(transition(w, w2, a, tol).coeff - chart_forward(w2, va, tol).coeff))
        t.record(
            "cocycle",
            lambda: opnorm(transition(w2, w3, transition(w, w2, a, tol), tol).coeff - transition(w, w3, a, tol).coeff),
        )

        def derivative():
            exact = transition_derivative(w, w2, a, direction, tol)
            approx = richardson_derivative(
                lambda s: transition(w, w2, ChartCoordinates(w, a.coeff + s * direction), tol).coeff, 1e-3
            )
            return opnorm(exact - approx) / max(opnorm(exact), 1e-300)

        t.record("transition_derivative", derivative)

        # cross-sections
        sec = CrossSection.at(w, tol=tol)
        ref = reference_projector(n, k)

        def section_property():
            s = section_apply(sec, v_sec)
            return opnorm(s @ ref @ dagger(s) - v_sec.projector)

        t.record("section_property", section_property)
        t.record("section_base", lambda: opnorm(section_apply(sec, w) - sec.base_unitary))

        # groupoid charts
        ch = GroupoidChart(sec, CrossSection.at(wb, tol=tol), UnitaryChart(bases[0], tol=tol))
        coords = GroupoidCoordinates(a, b, x)

        t.record("product_image", lambda: coords_distance(groupoid_chart_forward(ch, groupoid_chart_inverse(ch, coords)), coords))

        def inverse_forward():
            u = random_arrow(arrow_src, arrow_tgt, arrow_seed, tol)
            return opnorm(groupoid_chart_inverse(ch, groupoid_chart_forward(ch, u)).op - u.op)

        t.record("groupoid_inverse_forward", inverse_forward)

        def source_target():
            u = groupoid_chart_inverse(ch, coords)
            return max(
                opnorm(chart_forward(w, target(u), tol).coeff - a.coeff),
                opnorm(chart_forward(wb, source(u), tol).coeff - b.coeff),
                opnorm(u.target_proj - va.projector),
                opnorm(u.source_proj - chart_inverse(b, tol).projector),
            )

        t.record("source_target_projection", source_target)

        def transported_block():
            moved = transported_unitary(ch, groupoid_chart_inverse(ch, coords))
            blk = moved[:k, :k]
            off = moved.copy()
            off[:k, :k] = 0
            return max(opnorm(off), opnorm(dagger(blk) @ blk - np.eye(k)))

        t.record("transported_block", transported_block)

        ch_swap = GroupoidChart(ch.source_section, ch.target_section, UnitaryChart(bases[1], tol=tol))

        def inversion():
            formula = inversion_in_chart(ch, ch_swap, coords)
            oracle = groupoid_chart_forward(ch_swap, invert(groupoid_chart_inverse(ch, coords)))
            return coords_distance(formula, oracle)

        t.record("inversion_in_chart", inversion)

        ch_right = GroupoidChart(ch.source_section, CrossSection.at(wc, tol=tol), UnitaryChart(bases[2], tol=tol))
        ch_out = GroupoidChart(ch.target_section, ch_right.source_section, UnitaryChart(bases[3], tol=tol))
        coords_right = GroupoidCoordinates(b, c_coord, x2)

        def multiplication():
            formula = multiplication_in_chart(ch, ch_right, ch_out, coords, coords_right)
            product = compose(groupoid_chart_inverse(ch, coords), groupoid_chart_inverse(ch_right, coords_right), tol)
            return coords_distance(formula, groupoid_chart_forward(ch_out, product))

        t.record("multiplication_in_chart", multiplication)

        ch_id = GroupoidChart(ch.source_section, ch.source_section, UnitaryChart.identity(k, tol=tol))

        def identity_oracle():
            return groupoid_chart_forward(ch_id, identity_arrow(chart_inverse(b, tol), tol))

        t.record("identity_in_chart", lambda: coords_distance(identity_in_chart(ch_id, b), identity_oracle()))
        t.record("identity_algebra_zero", lambda: opnorm(identity_oracle().algebra_coord))

        ch_moved = GroupoidChart.at(w_shift, wb_shift, bases[4], tol=tol)
        small = GroupoidCoordinates(a_small, b_small, x_small if inject is None else x_small + NON_SKEW_SHIFT * np.eye(k))

        def chart_change():
            formula = groupoid_chart_transition(ch, ch_moved, small)
            oracle = groupoid_chart_forward(ch_moved, groupoid_chart_inverse(ch, small))
            return coords_distance(formula, oracle)

        t.record("groupoid_transition", chart_change)
        return t.residuals

    return trial


def _chart_thresholds(cfg: SuiteConfig) -> dict[str, float]:
    th = {name: cfg.tolerances.tol_equal for name in CHART_CHECKS}
    th["coord_oracle"] = COORD_ORACLE_TOL
    th["projector_residual"] = COORD_ORACLE_TOL
    th["cocycle"] = COCYCLE_TOL
    th["transition_derivative"] = DERIVATIVE_TOL
    th["section_base"] = SECTION_BASE_TOL
    return th


def run_chart_suite(cfg: SuiteConfig, inject: str | None = None) -> TrialReport:
    """Grassmann charts, transitions, cross-sections and groupoid charts.

    ``inject="non_skew_x"`` adds a Hermitian part to the algebra coordinate
    fed to the groupoid chart checks.
    """
    if inject not in (None, "non_skew_x"):
        raise ConfigError(f"unknown injection {inject!r}")
    if cfg.k >= cfg.n:
        raise ConfigError("chart suite needs k < n (charts live in L(W, W⊥))")
    name = "charts" if inject is None else f"charts[{inject}]"
    return _run_suite(name, CHART_TAG, cfg, _chart_trial(cfg, inject), _chart_thresholds(cfg))


# -- self-test ----------------------------------------------------------------

@dataclass
class SelfTestResult:
    injection: str
    report: TrialReport
    expected: frozenset
    detected: int
    misattributed: int

    @property
    def ok(self) -> bool:
        ran = self.report.trials - self.report.skipped
        return ran > 0 and self.detected == ran and self.misattributed == 0


def _attribution(report: TrialReport, expected: frozenset) -> tuple[int, int]:
    detected = sum(1 for f in report.failed_checks if f)
    misattributed = sum(1 for f in report.failed_checks if f is not None and (not f or not f <= expected))
    return detected, misattributed


def run_selftest(cfg: SuiteConfig) -> list[SelfTestResult]:
    """Run both suites with injected violations; every trial must fail, on the expected checks only."""
    results = []
    for runner, injection, expected in (
        (run_groupoid_axiom_suite, "scaled_arrow", SCALED_ARROW_CONSUMERS),
        (run_chart_suite, "non_skew_x", NON_SKEW_CONSUMERS),
    ):
        report = runner(cfg, inject=injection)
        detected, mis = _attribution(report, expected)
        results.append(SelfTestResult(injection, report, expected, detected, mis))
    return results

