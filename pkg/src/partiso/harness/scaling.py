"""Truncation-scaling experiment for restricted defects.

In finite dimension every subspace is "restricted", so membership in the
restricted classes is read off from how defects behave as n grows:

* ``identity``: the unit operator.  Its commutator with P₊ vanishes, yet its
  source projector 1 sits at Schatten distance ``(n/2)**(1/p)`` from P₊.
* ``rank1``: identity arrow of the graph of a fixed rank-one tilt
  ``A = a e₁ ⊗ e₁``; both defects are independent of n.
* ``random-arrow``: Haar arrow between two fixed low-rank tilts of H₊.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError
from ..grassmann import ChartCoordinates, Polarization, chart_inverse, restricted_defect
from ..groupoid import PartialIsometry, commutator_defect, identity_arrow, random_arrow, source
from ..matcore import ginibre
from .sampling import trial_rng

PROBES = ("identity", "rank1", "random-arrow")
SCALING_TAG = 3
DEFAULT_DIMS = (8, 16, 32, 64, 128, 256)

RANK1_TILT = 0.75
RANDOM_ARROW_RANK = 2
CLOSED_FORM_TOL = 1e-12
DIVERGENCE_SLOPE = 0.25


def identity_defect(n: int, p: float) -> float:
    """||1 - P₊||_p = (n/2)**(1/p): n/2 unit singular values."""
    return 1.0 if math.isinf(p) else (n / 2) ** (1.0 / p)


def rank1_defect(p: float, a: float = RANK1_TILT) -> float:
    """Schatten p-norm of P_V - P₊ for the graph V of a rank-one tilt ``a``.

    The difference lives on span(e₁, e_{n₊+1}) and has the two singular
    values ``a / sqrt(1 + a²)``, so the norm is ``2**(1/p) a / sqrt(1 + a²)``.
    """
    s = a / math.sqrt(1.0 + a * a)
    return s if math.isinf(p) else 2.0 ** (1.0 / p) * s


@dataclass
class ScalingTable:
    p: float
    seed: int
    rows: list[dict] = field(default_factory=list)
    classification: dict[str, dict[str, str]] = field(default_factory=dict)
    closed_form_residuals: dict[str, float] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(r <= CLOSED_FORM_TOL for r in self.closed_form_residuals.values())

    def series(self, probe: str, column: str = "defect") -> tuple[list[int], list[float]]:
        rows = [r for r in self.rows if r["probe"] == probe]
        return [r["n"] for r in rows], [r[column] for r in rows]


def classify(ns, values) -> str:
    """``constant``, ``divergent`` (strictly increasing, log-log slope >= 0.25) or ``bounded``."""
    v = np.asarray(values, dtype=float)
    top = float(np.max(np.abs(v)))
    if float(np.max(v) - np.min(v)) <= CLOSED_FORM_TOL * max(1.0, top):
        return "constant"
    if len(v) >= 2 and np.all(np.diff(v) > 0) and np.all(v > 0):
        slope = np.polyfit(np.log(np.asarray(ns, dtype=float)), np.log(v), 1)[0]
        if slope >= DIVERGENCE_SLOPE:
            return "divergent"
    return "bounded"


def _tilt(pol: Polarization, block: np.ndarray) -> ChartCoordinates:
    coeff = np.zeros((pol.n_minus, pol.n_plus), dtype=complex)
    r, c = block.shape
    coeff[:r, :c] = block
    return ChartCoordinates(pol.plus_space(), coeff)


def _probe_arrow(probe: str, pol: Polarization, seed: int, src_block, tgt_block) -> PartialIsometry:
    if probe == "identity":
        return PartialIsometry(np.eye(pol.n, dtype=complex))
    if probe == "rank1":
        return identity_arrow(chart_inverse(_tilt(pol, np.array([[RANK1_TILT]]))))
    src = chart_inverse(_tilt(pol, src_block))
    tgt = chart_inverse(_tilt(pol, tgt_block))
    return random_arrow(src, tgt, trial_rng(seed, SCALING_TAG, pol.n))


def run_scaling_experiment(dims=DEFAULT_DIMS, probes="all", p: float = 2.0, seed: int = 7) -> ScalingTable:
    dims = [int(d) for d in dims]
    if not dims or any(d < 2 or d % 2 for d in dims):
        raise ConfigError("dims must be even integers >= 2")
    if any(b <= a for a, b in zip(dims, dims[1:])):
        raise ConfigError("dims must be strictly ascending")
    if math.isnan(p) or p < 1:
        raise ConfigError(f"Schatten order must be >= 1, got {p}")
    if probes == "all":
        probes = PROBES
    elif isinstance(probes, str):
        probes = (probes,)
    unknown = set(probes) - set(PROBES)
    if unknown:
        raise ConfigError(f"unknown probes {sorted(unknown)}")
    if "random-arrow" in probes and dims[0] < 2 * RANDOM_ARROW_RANK:
        raise ConfigError(f"random-arrow probe needs n >= {2 * RANDOM_ARROW_RANK}")

    # tilt blocks are drawn once so the probe subspaces do not depend on n
    rng = trial_rng(seed, SCALING_TAG, 0)
    src_block = 0.5 * ginibre(RANDOM_ARROW_RANK, RANDOM_ARROW_RANK, rng)
    tgt_block = 0.5 * ginibre(RANDOM_ARROW_RANK, RANDOM_ARROW_RANK, rng)

    table = ScalingTable(p=p, seed=seed)
    for n in dims:
        pol = Polarization(n // 2, n // 2)
        for probe in probes:
            u = _probe_arrow(probe, pol, seed, src_block, tgt_block)
            table.rows.append(
                {
                    "n": n,
                    "probe": probe,
                    "defect": restricted_defect(pol, source(u), p).p_defect,
                    "commutator_defect": commutator_defect(pol, u, p),
                }
            )

    for probe in probes:
        ns, defects = table.series(probe)
        _, comm = table.series(probe, "commutator_defect")
        table.classification[probe] = {
            "defect": classify(ns, defects),
            "commutator_defect": classify(ns, comm),
        }
        if probe == "identity":
            table.closed_form_residuals["identity_defect"] = max(
                abs(d - identity_defect(m, p)) for m, d in zip(ns, defects)
            )
            table.closed_form_residuals["identity_commutator"] = max(comm)
        elif probe == "rank1":
            table.closed_form_residuals["rank1_defect"] = max(abs(d - rank1_defect(p)) for d in defects)
    return table
