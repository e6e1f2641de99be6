"""Initial-data classification, decay-rate fitting, and trajectory audits.

This module sits on top of the integrator and answers the scientific
questions: *where* does a given initial state sit relative to the potential
well (stable set, unstable set by radius, unstable set by energy), *what*
long-time behaviour does the theory predict there, and *did the computed
trajectory actually behave that way*.

The classifier is a pure function of the comparison operands
(E(0), a(u0,u0), the well bound M and the safe radius r_*); every operand is
recorded on the result so an audit can re-derive the verdict.  Decay fitting
is plain linear least squares on transformed energies over a tail window.
The audit re-checks, record by record, the structural inequalities a correct
run must satisfy and reports a worst-case margin for each.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .dynamics import Trajectory
from .errors import ConfigurationError, InapplicableError
from .field import CoefficientField, DomainGrid, ModalState, bilinear_a
from .functionals import Exponents, total_E
from .varconst import WellGeometry, epsilon_prime, h1, theta_bound

__all__ = [
    "MEMBERSHIP_FLAGS",
    "PREDICTION_FLAGS",
    "Classification",
    "DecayFit",
    "AuditCheck",
    "AuditReport",
    "classify",
    "verify_thm52_hypothesis",
    "fit_decay",
    "audit",
]

MEMBERSHIP_FLAGS = ("W", "V_by_radius", "V_by_energy", "neither")

PREDICTION_FLAGS = (
    "global_decay_exponential",
    "global_decay_algebraic",
    "global_subcritical",
    "blowup_thm51",
    "blowup_thm52",
    "no_prediction",
)

FIT_MODELS = ("exponential", "algebraic_2_over_p", "algebraic_2_over_p_plus_2")


@dataclass(frozen=True)
class Classification:
    """Verdict on one initial state, with every comparison operand recorded.

    ``set_membership`` is decided purely by the stated comparisons:

    * ``V_by_energy``  — E(0) <= 0;
    * ``W``            — otherwise, a(u0,u0) < r_*^2 and E(0) < M;
    * ``V_by_radius``  — otherwise, a(u0,u0) > r_*^2 and 0 < E(0) < M;
    * ``neither``      — everything else (boundary cases included).

    ``predicted`` is the regime the governing statements claim for that
    membership; ``no_prediction`` is a valid verdict, not an error.  The two
    ``thm52_*`` operands are populated whenever the positive-energy blow-up
    hypothesis was evaluated (membership by radius with supercritical source),
    regardless of whether it held.
    """

    set_membership: str
    E0: float
    a_u0u0: float
    M: float
    r_star_sq: float
    predicted: str
    thm52_lhs: Optional[float] = None
    thm52_rhs: Optional[float] = None

    def __post_init__(self) -> None:
        if self.set_membership not in MEMBERSHIP_FLAGS:
            raise ConfigurationError(f"unknown membership {self.set_membership!r}")
        if self.predicted not in PREDICTION_FLAGS:
            raise ConfigurationError(f"unknown prediction {self.predicted!r}")
        if self.predicted == "blowup_thm52":
            ok = (
                self.set_membership == "V_by_radius"
                and self.thm52_lhs is not None
                and self.thm52_rhs is not None
                and self.thm52_lhs > self.thm52_rhs
            )
            if not ok:
                raise ConfigurationError(
                    "positive-energy blow-up prediction without its hypothesis"
                )

    @property
    def predicts_global(self) -> bool:
        return self.predicted in (
            "global_decay_exponential",
            "global_decay_algebraic",
            "global_subcritical",
        )

    @property
    def predicts_blowup(self) -> bool:
        return self.predicted in ("blowup_thm51", "blowup_thm52")

    def to_json_dict(self) -> dict:
        return {
            "set_membership": self.set_membership,
            "E0": self.E0,
            "a_u0u0": self.a_u0u0,
            "M": self.M,
            "r_star_sq": self.r_star_sq,
            "predicted": self.predicted,
            "thm52_lhs": self.thm52_lhs,
            "thm52_rhs": self.thm52_rhs,
        }


def _thm52_sides(
    state0: ModalState,
    geometry: WellGeometry,
    exponents: Exponents,
    coeff: CoefficientField,
    e0: float,
) -> tuple[float, float]:
    """Both sides of the positive-energy blow-up hypothesis at the balanced eps."""
    eps = epsilon_prime(exponents.q, exponents.p, coeff.a0, coeff.mu0, geometry.B7)
    lhs = float(state0.u_coeffs @ state0.v_coeffs)
    rhs = h1(eps, exponents.p, coeff.a0, coeff.mu0, geometry.B7) * e0
    return lhs, rhs


def classify(
    state0: ModalState,
    geometry: WellGeometry,
    exponents: Exponents,
    coeff: CoefficientField,
    *,
    grid: DomainGrid,
    stiffness: np.ndarray,
) -> Classification:
    """Place an initial state in the well geometry and name the predicted regime.

    ``grid`` and ``stiffness`` must be the discretization ``geometry`` was
    computed on; they are needed to evaluate E(0) and a(u0,u0).  Deterministic:
    identical inputs give an identical Classification.
    """
    a_u0u0 = bilinear_a(state0.u_coeffs, stiffness)
    e0 = total_E(state0, grid, stiffness, coeff, exponents)
    m_depth = geometry.M
    r_star_sq = geometry.r_star**2

    if e0 <= 0.0:
        membership = "V_by_energy"
    elif a_u0u0 < r_star_sq and e0 < m_depth:
        membership = "W"
    elif a_u0u0 > r_star_sq and e0 < m_depth:
        membership = "V_by_radius"
    else:
        membership = "neither"

    supercritical = exponents.q > exponents.p + 2.0
    nonzero_u0 = bool(np.any(state0.u_coeffs != 0.0))
    lhs: Optional[float] = None
    rhs: Optional[float] = None

    if exponents.subcritical:
        predicted = "global_subcritical"
    elif membership == "W":
        predicted = (
            "global_decay_exponential" if exponents.p == 0.0 else "global_decay_algebraic"
        )
    elif membership == "V_by_energy" and supercritical and nonzero_u0:
        predicted = "blowup_thm51"
    elif membership == "V_by_radius" and supercritical:
        lhs, rhs = _thm52_sides(state0, geometry, exponents, coeff, e0)
        predicted = "blowup_thm52" if lhs > rhs else "no_prediction"
    else:
        predicted = "no_prediction"

    return Classification(
        set_membership=membership,
        E0=e0,
        a_u0u0=a_u0u0,
        M=m_depth,
        r_star_sq=r_star_sq,
        predicted=predicted,
        thm52_lhs=lhs,
        thm52_rhs=rhs,
    )


def verify_thm52_hypothesis(
    state0: ModalState,
    geometry: WellGeometry,
    exponents: Exponents,
    coeff: CoefficientField,
    *,
    grid: DomainGrid,
    stiffness: np.ndarray,
) -> tuple[float, float, bool]:
    """Evaluate the pairing hypothesis of the positive-energy blow-up statement.

    Returns ``(lhs, rhs, holds)`` where lhs is the modal inner product
    <u0, u1>, rhs is the balanced threshold factor times E(0), and
    ``holds = lhs > rhs``.  Raises :class:`InapplicableError` when the
    statement's preconditions (supercritical source, 0 < E(0) < M,
    a(u0,u0) > r_*^2) are not met.
    """
    if not exponents.q > exponents.p + 2.0:
        raise InapplicableError(
            f"hypothesis needs q > p + 2, got q={exponents.q}, p={exponents.p}"
        )
    e0 = total_E(state0, grid, stiffness, coeff, exponents)
    if not (0.0 < e0 < geometry.M):
        raise InapplicableError(f"hypothesis needs 0 < E(0) < M, got E(0)={e0}, M={geometry.M}")
    a_u0u0 = bilinear_a(state0.u_coeffs, stiffness)
    if not a_u0u0 > geometry.r_star**2:
        raise InapplicableError(
            f"hypothesis needs a(u0,u0) > r_*^2, got {a_u0u0} <= {geometry.r_star**2}"
        )
    lhs, rhs = _thm52_sides(state0, geometry, exponents, coeff, e0)
    return lhs, rhs, lhs > rhs


# ---------------------------------------------------------------------------
# decay fitting
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DecayFit:
    """One fitted decay law over a tail window.

    ``rate_or_slope`` is the exponential rate k (fit of log E ~ -k t) for the
    exponential model, and the least-squares slope of the transformed energy
    (E^{-p/2} or E^{-(p+2)/2} versus t) for the algebraic models; positive
    values mean decay in every model.  ``goodness`` is the coefficient of
    determination of the underlying linear fit.
    """

    model: str
    rate_or_slope: float
    window: tuple[float, float]
    goodness: float

    def __post_init__(self) -> None:
        if self.model not in FIT_MODELS:
            raise ConfigurationError(f"unknown fit model {self.model!r}")
        if not 0.0 <= self.goodness <= 1.0:
            raise ConfigurationError(f"goodness must lie in [0,1], got {self.goodness}")
        if not self.window[0] <= self.window[1]:
            raise ConfigurationError(f"window endpoints out of order: {self.window}")

    def to_json_dict(self) -> dict:
        return {
            "model": self.model,
            "rate_or_slope": self.rate_or_slope,
            "window": [self.window[0], self.window[1]],
            "goodness": self.goodness,
        }


def _linear_fit(t: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Slope and R^2 of the least-squares line through (t, y).

    Constant data is a perfect fit by convention (R^2 = 1), matching the
    degenerate-variance limit.
    """
    slope, intercept = np.polyfit(t, y, 1)
    resid = y - (slope * t + intercept)
    ss_res = float(resid @ resid)
    centered = y - np.mean(y)
    ss_tot = float(centered @ centered)
    if ss_tot <= 1e-300:
        return float(slope), 1.0
    r2 = 1.0 - ss_res / ss_tot
    return float(slope), float(min(1.0, max(0.0, r2)))


def fit_decay(
    trajectory: Trajectory,
    p: float,
    window_fraction: float = 0.5,
) -> list[DecayFit]:
    """Fit the predicted decay law(s) to a trajectory's energy tail.

    The window is the last ``window_fraction`` of [1, t_end] (transients
    before t = 1 never enter).  For p = 0 a single exponential fit is
    returned; for p > 0 both algebraic transform variants are fitted and
    returned in the order (2/p exponent first).

    Raises
    ------
    InapplicableError
        If the trajectory ends at or before t = 1, the window holds fewer
        than two records, or the energy is not strictly positive throughout
        the window.
    """
    if p < 0:
        raise ConfigurationError(f"damping exponent must be nonnegative, got {p}")
    if not 0.0 < window_fraction <= 1.0:
        raise ConfigurationError(f"window_fraction must lie in (0,1], got {window_fraction}")
    records = trajectory.records
    if not records:
        raise InapplicableError("no records to fit")
    t_end = records[-1].t
    if t_end <= 1.0:
        raise InapplicableError(f"tail window needs t_end > 1, got t_end={t_end}")
    t0 = t_end - window_fraction * (t_end - 1.0)
    window = (t0, t_end)
    tail = [r for r in records if r.t >= t0 - 1e-12 * max(1.0, abs(t0))]
    if len(tail) < 2:
        raise InapplicableError(f"only {len(tail)} records in the fit window {window}")
    t = np.array([r.t for r in tail])
    e = np.array([r.E for r in tail])
    if np.any(e <= 0.0):
        raise InapplicableError("energy is not positive on the fit window")

    fits: list[DecayFit] = []
    if p == 0:
        slope, r2 = _linear_fit(t, np.log(e))
        fits.append(
            DecayFit(model="exponential", rate_or_slope=-slope, window=window, goodness=r2)
        )
    else:
        for model, expo in (
            ("algebraic_2_over_p", -p / 2.0),
            ("algebraic_2_over_p_plus_2", -(p + 2.0) / 2.0),
        ):
            slope, r2 = _linear_fit(t, e**expo)
            fits.append(
                DecayFit(model=model, rate_or_slope=slope, window=window, goodness=r2)
            )
    return fits


# ---------------------------------------------------------------------------
# auditing
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AuditCheck:
    """One audited invariant: whether it applied, held, and by what margin.

    ``margin`` is the worst-case slack in the invariant's natural units
    (nonnegative means the inequality held with room to spare); checks that
    are pure pass/fail carry ``margin=None``.
    """

    name: str
    applicable: bool
    passed: bool
    margin: Optional[float] = None

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "applicable": self.applicable,
            "passed": self.passed,
            "margin": self.margin,
        }


@dataclass(frozen=True)
class AuditReport:
    checks: tuple[AuditCheck, ...]

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks if c.applicable)

    def to_json_dict(self) -> dict:
        return {
            "all_passed": self.all_passed,
            "checks": [c.to_json_dict() for c in self.checks],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True)

    def table(self) -> str:
        """Human-readable fixed-width summary, one line per check."""
        lines = ["check                      applicable  passed  margin"]
        for c in self.checks:
            margin = "-" if c.margin is None else f"{c.margin:.3e}"
            lines.append(
                f"{c.name:<26} {str(c.applicable):<11} {str(c.passed):<7} {margin}"
            )
        lines.append(f"overall: {'PASS' if self.all_passed else 'FAIL'}")
        return "\n".join(lines)


def _superlinear_growth(times: Sequence[float], values: Sequence[float]) -> bool:
    """Monotone, accelerating growth of ``values`` over its final decade.

    The final decade is the tail where values exceed a tenth of the final
    value; growth is accelerating when the second half of that tail has a
    strictly larger mean slope than the first half.
    """
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    if v.size < 3 or not np.all(np.isfinite(v)):
        return False
    floor = v[-1] / 10.0
    below = np.nonzero(v < floor)[0]
    start = int(below[-1]) + 1 if below.size else 0
    t, v = t[start:], v[start:]
    if v.size < 3:
        return False
    if np.any(np.diff(v) < -1e-12 * abs(v[-1])):
        return False
    mid = v.size // 2
    if t[mid] <= t[0] or t[-1] <= t[mid]:
        return False
    first = (v[mid] - v[0]) / (t[mid] - t[0])
    second = (v[-1] - v[mid]) / (t[-1] - t[mid])
    return second > first


def audit(
    trajectory: Trajectory,
    classification: Classification,
    geometry: WellGeometry,
) -> AuditReport:
    """Re-check the structural invariants of a finished trajectory.

    Every check reports pass/fail with its worst-case margin; inapplicable
    checks (wrong membership, no prediction) are recorded as such rather than
    skipped silently, so a report always has the same shape.

    Checks, in order:

    * ``energy_monotone``      — E nonincreasing across records, slack
      10 * rel_tol * max(1, |E(0)|);
    * ``balance_residual``     — |E + W1 - W2/2 - E(0)| within
      100 * rel_tol * max(1, t) * max(1, |E(0)|, running max |E|) at every
      record;
    * ``stable_confinement``   — a(u,u) < r_*^2 throughout (stable starts);
    * ``unstable_persistence`` — F < 0 and I < 0 throughout (positive-energy
      blow-up predictions);
    * ``theta_lower_bound``    — I >= theta * mu(t) * a(u,u) with 1e-8
      absolute slack (stable starts with 0 < E(0) < M);
    * ``outcome_consistency``  — the observed outcome matches the predicted
      regime; the positive-energy prediction also accepts monotone
      super-linear growth of the squared norm when the horizon ends first.
    """
    records = trajectory.records
    rel_tol = trajectory.config.rel_tol
    checks: list[AuditCheck] = []
    if not records:
        raise InapplicableError("cannot audit an empty trajectory")
    e0 = records[0].E
    e_scale = max(1.0, abs(e0))

    e_vals = np.array([r.E for r in records])
    rises = np.diff(e_vals) if len(records) > 1 else np.zeros(1)
    allowed = 10.0 * rel_tol * e_scale
    worst_rise = float(np.max(rises)) if rises.size else 0.0
    checks.append(
        AuditCheck(
            name="energy_monotone",
            applicable=True,
            passed=worst_rise <= allowed,
            margin=allowed - worst_rise,
        )
    )

    # The residual is a difference of accumulated functionals, so its
    # achievable precision scales with the largest |E| seen so far (equal to
    # |E(0)| on decaying runs, but vastly larger approaching a blow-up).
    e_running = np.maximum.accumulate(np.abs(e_vals))
    margins = [
        100.0 * rel_tol * max(1.0, r.t) * max(e_scale, e_running[i])
        - abs(r.balance_residual)
        for i, r in enumerate(records)
    ]
    worst_balance = float(min(margins))
    checks.append(
        AuditCheck(
            name="balance_residual",
            applicable=True,
            passed=worst_balance >= 0.0,
            margin=worst_balance,
        )
    )

    confined = classification.set_membership == "W"
    if confined:
        margin = float(min(classification.r_star_sq - r.a_uu for r in records))
        checks.append(
            AuditCheck("stable_confinement", True, margin > 0.0, margin)
        )
    else:
        checks.append(AuditCheck("stable_confinement", False, True, None))

    persistent = classification.predicted == "blowup_thm52"
    if persistent:
        margin = float(min(min(-r.F, -r.I) for r in records))
        checks.append(
            AuditCheck("unstable_persistence", True, margin > 0.0, margin)
        )
    else:
        checks.append(AuditCheck("unstable_persistence", False, True, None))

    theta_ok = confined and 0.0 < classification.E0 < classification.M
    if theta_ok:
        theta = theta_bound(classification.M, classification.E0, trajectory.exponents.q)
        margin = float(
            min(r.I - theta * trajectory.coeff.mu(r.t) * r.a_uu for r in records)
        )
        checks.append(
            AuditCheck("theta_lower_bound", True, margin >= -1e-8, margin)
        )
    else:
        checks.append(AuditCheck("theta_lower_bound", False, True, None))

    blew_up = trajectory.blowup_report is not None
    if classification.predicts_global:
        checks.append(
            AuditCheck(
                name="outcome_consistency",
                applicable=True,
                passed=trajectory.outcome_flag == "completed" and not blew_up,
                margin=None,
            )
        )
    elif classification.predicted == "blowup_thm51":
        checks.append(AuditCheck("outcome_consistency", True, blew_up, None))
    elif classification.predicted == "blowup_thm52":
        growing = _superlinear_growth([r.t for r in records], [r.l2_u for r in records])
        checks.append(
            AuditCheck("outcome_consistency", True, blew_up or growing, None)
        )
    else:
        checks.append(AuditCheck("outcome_consistency", False, True, None))

    return AuditReport(checks=tuple(checks))
