"""Acceptance criteria, one test per criterion.

Each test appends a PASS/FAIL line that is printed in the terminal summary.
"""

import math
import subprocess
import sys
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from partiso.grassmann import ChartCoordinates, Subspace, chart_inverse, transition
from partiso.harness.sampling import random_subspace
from partiso.harness.scaling import DEFAULT_DIMS, run_scaling_experiment
from partiso.harness.suites import (
    SCHATTEN_ORDERS,
    SuiteConfig,
    graph_projector_oracle,
    monotonicity_violation,
    run_chart_suite,
    run_groupoid_axiom_suite,
)
from partiso.matcore import dagger, ginibre, opnorm

TRIALS = 200
SEED = 7


def report(label, ok, detail):
    ACCEPTANCE_LINES.append((label, bool(ok), detail))
    assert ok, f"{label}: {detail}"


def worst(rep, *names):
    return max(rep.check(n).max_residual for n in names)


@pytest.fixture(scope="session")
def groupoid_run():
    cfg = SuiteConfig(n_plus=8, n_minus=8, k=8, trials=TRIALS, seed=SEED)
    start = time.perf_counter()
    rep = run_groupoid_axiom_suite(cfg)
    return rep, time.perf_counter() - start


@pytest.fixture(scope="session")
def chart_run():
    return run_chart_suite(SuiteConfig(n_plus=8, n_minus=8, k=8, trials=TRIALS, seed=SEED))


@pytest.fixture(scope="session")
def scaling_runs():
    start = time.perf_counter()
    tables = {p: run_scaling_experiment(DEFAULT_DIMS, "all", p, SEED) for p in SCHATTEN_ORDERS}
    return tables, time.perf_counter() - start


def test_c01_groupoid_axioms(groupoid_run):
    rep, elapsed = groupoid_run
    laws = ("unit_left", "unit_right", "inverse_left", "inverse_right", "associativity", "anti_homomorphism")
    res = worst(rep, *laws)
    ok = res <= 1e-9 and rep.skipped == 0 and rep.trials == TRIALS and rep.ok and elapsed < 30
    report("1 groupoid axioms", ok, f"max residual {res:.2e} over {rep.passes} trials, {elapsed:.1f} s")


def test_c02_coordinate_oracle():
    rng = np.random.default_rng(2)
    n, k = 16, 8
    oracle_res = proj_res = 0.0
    count = 0
    for _ in range(5):
        w = random_subspace(n, k, rng)
        for scale in np.geomspace(0.1, 3.0, 40):
            g = ginibre(n - k, k, rng)
            a = ChartCoordinates(w, scale * g / opnorm(g))
            p = chart_inverse(a).projector
            oracle_res = max(oracle_res, opnorm(p - graph_projector_oracle(a)))
            proj_res = max(proj_res, opnorm(p @ p - p), opnorm(p - dagger(p)))
            count += 1
    ok = count == 200 and oracle_res <= 1e-10 and proj_res <= 1e-10
    report("2 graph coordinate oracle", ok, f"{count} instances, oracle {oracle_res:.2e}, projector {proj_res:.2e}")


def test_c03_transition(chart_run):
    formula = chart_run.check("transition_formula")
    cocycle = chart_run.check("cocycle")
    deriv = chart_run.check("transition_derivative")
    ok = (
        formula.passes >= 200
        and formula.max_residual <= 1e-9
        and cocycle.passes >= 50
        and cocycle.max_residual <= 1e-8
        and deriv.max_residual <= 1e-6
        and formula.failures == cocycle.failures == deriv.failures == 0
    )
    detail = f"formula {formula.max_residual:.2e}, cocycle {cocycle.max_residual:.2e}, derivative rel {deriv.max_residual:.2e}"
    report("3 chart transitions", ok, detail)


def test_c03_transition_large_coordinates():
    # transitions far from the chart centre, where the fractional form is least trivial
    rng = np.random.default_rng(3)
    n, k = 16, 8
    res = 0.0
    for _ in range(200):
        w = random_subspace(n, k, rng)
        g = ginibre(n, k, rng)
        w2 = Subspace.span(w.frame + 0.2 * g / math.sqrt(n))
        a = ChartCoordinates(w, 2.0 * ginibre(n - k, k, rng) / math.sqrt(n))
        v = chart_inverse(a)
        # coefficient of V over w2, read off any frame of V
        oracle = dagger(w2.perp_frame) @ v.frame @ np.linalg.inv(dagger(w2.frame) @ v.frame)
        res = max(res, opnorm(transition(w, w2, a).coeff - oracle))
    report("3 chart transitions (wide)", res <= 1e-9, f"200 instances, max residual {res:.2e}")


def test_c04_cross_section(chart_run):
    prop = chart_run.check("section_property")
    base = chart_run.check("section_base")
    ok = prop.passes >= 200 and prop.max_residual <= 1e-9 and base.max_residual <= 1e-12 and base.failures == 0
    report("4 cross-section", ok, f"section {prop.max_residual:.2e}, base {base.max_residual:.2e}")


def test_c05_groupoid_charts(chart_run):
    names = ("product_image", "groupoid_inverse_forward", "source_target_projection")
    res = worst(chart_run, *names)
    ran = min(chart_run.check(n).passes for n in names)
    ok = chart_run.skipped == 0 and ran == TRIALS and res <= 1e-9
    report("5 groupoid charts", ok, f"max residual {res:.2e} over {ran} trials, {chart_run.skipped} skipped")


def test_c06_structure_maps(chart_run):
    names = ("inversion_in_chart", "multiplication_in_chart", "identity_in_chart")
    res = worst(chart_run, *names)
    ran = min(chart_run.check(n).passes for n in names)
    ident = chart_run.check("identity_algebra_zero").max_residual
    ok = ran >= 100 and res <= 1e-9 and ident <= 1e-9
    report("6 coordinate structure maps", ok, f"max residual {res:.2e} over {ran} trials, identity ||X|| {ident:.2e}")


def test_c07_block_identity(groupoid_run):
    rep, _ = groupoid_run
    c = rep.check("commutator_block_identity")
    ok = c.passes == TRIALS and c.max_residual <= 1e-12
    report("7 commutator block identity", ok, f"relative gap {c.max_residual:.2e} over {3 * c.passes} arrows")


def test_c08_scaling(scaling_runs):
    tables, elapsed = scaling_runs
    t = tables[2.0]
    ns, ident = t.series("identity")
    _, rank1 = t.series("rank1")
    exact = max(abs(d - math.sqrt(n / 2)) for n, d in zip(ns, ident))
    increasing = all(b > a for a, b in zip(ident, ident[1:]))
    spread = max(rank1) - min(rank1)
    ok = list(ns) == list(DEFAULT_DIMS) and exact <= 1e-12 and increasing and spread <= 1e-12 and elapsed < 120
    report("8 truncation scaling", ok, f"identity gap {exact:.1e}, rank-one spread {spread:.1e}, {elapsed:.1f} s")


def test_c09_monotonicity(groupoid_run, scaling_runs):
    rep, _ = groupoid_run
    suite = rep.check("schatten_monotonicity").max_residual
    tables, _ = scaling_runs
    scaling = 0.0
    base = tables[SCHATTEN_ORDERS[0]]
    for i, row in enumerate(base.rows):
        for col in ("defect", "commutator_defect"):
            norms = {p: tables[p].rows[i][col] for p in SCHATTEN_ORDERS}
            scaling = max(scaling, monotonicity_violation(norms))
    ok = suite <= 1e-12 and scaling <= 1e-12 and rep.check("schatten_monotonicity").failures == 0
    report("9 Schatten monotonicity", ok, f"suite {suite:.1e}, scaling tables {scaling:.1e}")


def test_c10_determinism(tmp_path):
    outs = []
    for i in range(2):
        path = tmp_path / f"run{i}.json"
        cmd = [sys.executable, "-m", "partiso", "all", "--trials", "20", "--seed", "11", "--out", str(path)]
        proc = subprocess.run(cmd, capture_output=True, text=True, check=False)
        assert proc.returncode == 0, proc.stderr
        outs.append(path.read_bytes())
    ok = outs[0] == outs[1] and len(outs[0]) > 0
    report("10 determinism", ok, f"two CLI runs, {len(outs[0])} bytes, identical={outs[0] == outs[1]}")
