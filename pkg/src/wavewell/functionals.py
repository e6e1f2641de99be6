"""Energy-type functionals of the semi-discrete flow and per-record diagnostics.

All spatial integrals use the grid's quadrature rule; squared L2 norms of
modal vectors are plain coefficient sums (the basis is L2-orthonormal).  The
central identities, which hold exactly for the assembled quantities and are
enforced by the record builder, are::

    I = mu(t) a(u,u) - integral |u|^q log|u|
    J = 1/2 mu(t) a(u,u) - (1/q) integral |u|^q log|u| + (1/q^2) ||u||_q^q
    E = 1/2 ||u_t||_2^2 + J
    F = (1/q) ||u||_q^q + I
    dE/dt = 1/2 mu'(t) a(u,u) - integral g(u_t) u_t   (never positive)
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ConfigurationError, InapplicableError, NonFiniteFunctionalError
from .field import CoefficientField, DomainGrid, ModalState, bilinear_a

__all__ = [
    "CSV_COLUMNS",
    "EnergyRecord",
    "Exponents",
    "StateScalars",
    "auxiliary_Y",
    "balance_residual",
    "blowup_F",
    "csv_header",
    "damping_term",
    "dissipation_rate",
    "log_source_term",
    "nehari_I",
    "nehari_on_ray",
    "potential_J",
    "potential_on_ray",
    "ray_scalars",
    "state_scalars",
    "total_E",
]

#: Column order of trajectory CSV output.  ``Y`` is left empty on rows where
#: the auxiliary blow-up functional is not defined for the run.
CSV_COLUMNS = (
    "t",
    "E",
    "I",
    "J",
    "F",
    "Y",
    "l2_u",
    "l2_v",
    "lq_u",
    "a_uu",
    "log_moment",
    "damping_power",
    "balance_residual",
)


@dataclass(frozen=True)
class Exponents:
    """Nonlinearity exponents: source power q > 2 and friction power p >= 0.

    ``c1``/``c2`` are the two-sided comparison constants of the friction law
    (g(s)s between c1|s|^(p+2) and c2|s|^(p+2)); the built-in law
    g(s) = |s|^p s has both equal to one.  ``c1`` must exceed 1/(p+2).
    """

    q: float
    p: float = 0.0
    c1: float = 1.0
    c2: float = 1.0

    def __post_init__(self) -> None:
        if not (np.isfinite(self.q) and self.q > 2.0):
            raise ConfigurationError(f"source exponent q must satisfy q > 2, got {self.q}")
        if not (np.isfinite(self.p) and self.p >= 0.0):
            raise ConfigurationError(f"friction exponent p must satisfy p >= 0, got {self.p}")
        if not (self.c1 > 1.0 / (self.p + 2.0)):
            raise ConfigurationError(
                f"lower friction constant must exceed 1/(p+2) = {1.0 / (self.p + 2.0)}, got {self.c1}"
            )
        if not (self.c2 >= self.c1):
            raise ConfigurationError("upper friction constant must be >= lower friction constant")

    @property
    def subcritical(self) -> bool:
        """True when the friction power dominates the source power (q < p+2)."""
        return self.q < self.p + 2.0

    @property
    def alpha(self) -> float:
        """Auxiliary-functional exponent (q-p-2)/(q(p+1)); meaningful when q > p+2."""
        return (self.q - self.p - 2.0) / (self.q * (self.p + 1.0))


def log_source_term(u, q: float):
    """Pointwise source |u|^(q-2) u log|u| (0 at u = 0); scalar in, scalar out."""
    arr = np.atleast_1d(np.asarray(u, dtype=np.float64))
    res = _kernels.log_source(arr, float(q))
    return float(res[0]) if np.isscalar(u) or np.ndim(u) == 0 else res


def damping_term(v, p: float):
    """Pointwise friction |v|^p v; scalar in, scalar out."""
    arr = np.atleast_1d(np.asarray(v, dtype=np.float64))
    res = _kernels.damping(arr, float(p))
    return float(res[0]) if np.isscalar(v) or np.ndim(v) == 0 else res


@dataclass(frozen=True)
class StateScalars:
    """All quadrature scalars of one state, evaluated in a single basis sweep."""

    mu: float
    dmu: float
    l2_u: float
    l2_v: float
    lq_u: float
    a_uu: float
    log_moment: float
    damping_power: float
    pairing: float


def state_scalars(
    state: ModalState,
    grid: DomainGrid,
    stiffness: np.ndarray,
    coeff: CoefficientField,
    exponents: Exponents,
    *,
    include_source: bool = True,
    include_damping: bool = True,
) -> StateScalars:
    """Evaluate every scalar the functionals need at one state.

    The ``include_*`` switches zero out the corresponding physics terms; they
    exist so that diagnostics of reduced test systems (pure linear waves,
    undamped runs) stay consistent with what was actually integrated.

    Raises
    ------
    NonFiniteFunctionalError
        If any quadrature accumulation overflows.
    """
    u = state.u_coeffs
    v = state.v_coeffs
    if include_source:
        u_nodes = grid.evaluate_at_nodes(u)
        lq_u = grid.integrate(_kernels.abs_pow(u_nodes, exponents.q))
        log_moment = grid.integrate(_kernels.abs_pow_log(u_nodes, exponents.q))
    else:
        lq_u = 0.0
        log_moment = 0.0
    if include_damping:
        v_nodes = grid.evaluate_at_nodes(v)
        damping_power = grid.integrate(_kernels.abs_pow(v_nodes, exponents.p + 2.0))
    else:
        damping_power = 0.0
    with np.errstate(over="ignore", invalid="ignore"):
        scalars = StateScalars(
            mu=float(coeff.mu(state.t)),
            dmu=float(coeff.dmu(state.t)),
            l2_u=float(u @ u),
            l2_v=float(v @ v),
            lq_u=float(lq_u),
            a_uu=bilinear_a(u, stiffness),
            log_moment=float(log_moment),
            damping_power=float(damping_power),
            pairing=float(u @ v),
        )
    for name in ("l2_u", "l2_v", "lq_u", "a_uu", "log_moment", "damping_power", "pairing"):
        if not math.isfinite(getattr(scalars, name)):
            raise NonFiniteFunctionalError(f"{name} overflowed at t={state.t}")
    return scalars


def _scalars(state, grid, stiffness, coeff, exponents) -> StateScalars:
    return state_scalars(state, grid, stiffness, coeff, exponents)


def nehari_I(state, grid, stiffness, coeff, exponents) -> float:
    """Stability indicator I(u) = mu(t) a(u,u) - integral |u|^q log|u| dx."""
    s = _scalars(state, grid, stiffness, coeff, exponents)
    return s.mu * s.a_uu - s.log_moment


def potential_J(state, grid, stiffness, coeff, exponents) -> float:
    """Potential part of the energy; see the module identities."""
    s = _scalars(state, grid, stiffness, coeff, exponents)
    q = exponents.q
    return 0.5 * s.mu * s.a_uu - s.log_moment / q + s.lq_u / q**2


def total_E(state, grid, stiffness, coeff, exponents) -> float:
    """Total energy E = kinetic + potential."""
    s = _scalars(state, grid, stiffness, coeff, exponents)
    q = exponents.q
    return 0.5 * s.l2_v + 0.5 * s.mu * s.a_uu - s.log_moment / q + s.lq_u / q**2


def dissipation_rate(state, grid, stiffness, coeff, exponents) -> float:
    """Instantaneous dE/dt = 1/2 mu'(t) a(u,u) - integral g(u_t) u_t dx (<= 0)."""
    s = _scalars(state, grid, stiffness, coeff, exponents)
    return 0.5 * s.dmu * s.a_uu - s.damping_power


def blowup_F(state, grid, stiffness, coeff, exponents) -> float:
    """Unstable-set persistence functional F = (1/q)||u||_q^q + I(u)."""
    s = _scalars(state, grid, stiffness, coeff, exponents)
    return s.lq_u / exponents.q + s.mu * s.a_uu - s.log_moment


def auxiliary_Y(state: ModalState, G_val: float, eps: float, alpha: float) -> float:
    """Blow-up witness Y = G^(1-alpha) + eps * <u, u_t> for runs with E < 0.

    ``G_val`` must be the (positive) negated energy and ``alpha`` must lie
    strictly inside (0, 1/2); outside that regime the functional is not part
    of any valid argument and :class:`InapplicableError` is raised.
    """
    if not (np.isfinite(G_val) and G_val > 0.0):
        raise InapplicableError(f"auxiliary functional needs G = -E > 0, got G={G_val}")
    if not (0.0 < alpha < 0.5):
        raise InapplicableError(f"auxiliary functional needs 0 < alpha < 1/2, got alpha={alpha}")
    pairing = float(state.u_coeffs @ state.v_coeffs)
    return G_val ** (1.0 - alpha) + eps * pairing


def ray_scalars(
    u_coeffs: np.ndarray,
    grid: DomainGrid,
    stiffness: np.ndarray,
    exponents: Exponents,
) -> tuple[float, float, float]:
    """(a(u,u), integral |u|^q log|u|, ||u||_q^q) for scaling-ray formulas.

    Everything I and J do along the ray ``lam -> lam*u`` is determined by
    these three numbers, which makes one-dimensional root finding on rays
    cheap; see :func:`nehari_on_ray` and :func:`potential_on_ray`.
    """
    u = np.asarray(u_coeffs, dtype=np.float64)
    u_nodes = grid.evaluate_at_nodes(u)
    a_uu = bilinear_a(u, stiffness)
    log_moment = grid.integrate(_kernels.abs_pow_log(u_nodes, exponents.q))
    lq_u = grid.integrate(_kernels.abs_pow(u_nodes, exponents.q))
    if not all(map(math.isfinite, (a_uu, log_moment, lq_u))):
        raise NonFiniteFunctionalError("ray scalars overflowed")
    return a_uu, log_moment, lq_u


def nehari_on_ray(lam: float, mu: float, a_uu: float, log_moment: float, lq_u: float, q: float) -> float:
    """I(lam*u) from the ray scalars of u: lam^2 mu a - lam^q (logmom + log(lam) lq)."""
    return lam**2 * mu * a_uu - lam**q * (log_moment + math.log(lam) * lq_u)


def potential_on_ray(lam: float, mu: float, a_uu: float, log_moment: float, lq_u: float, q: float) -> float:
    """J(lam*u) from the ray scalars of u."""
    return (
        0.5 * lam**2 * mu * a_uu
        - lam**q * (log_moment + math.log(lam) * lq_u) / q
        + lam**q * lq_u / q**2
    )


@dataclass(frozen=True)
class EnergyRecord:
    """One output row of a trajectory: functional values and audit columns.

    ``balance_residual`` is E(t) + (accumulated friction work)
    - 1/2 (accumulated modulation drift) - E(0); it vanishes for the exact
    flow, so its size measures integrator consistency end to end.
    """

    t: float
    E: float
    I: float
    J: float
    F: float
    Y_available: bool
    Y: float
    l2_u: float
    l2_v: float
    lq_u: float
    a_uu: float
    log_moment: float
    damping_power: float
    balance_residual: float

    @classmethod
    def build(
        cls,
        state: ModalState,
        grid: DomainGrid,
        stiffness: np.ndarray,
        coeff: CoefficientField,
        exponents: Exponents,
        *,
        e0: float | None = None,
        cum_damping_work: float = 0.0,
        cum_modulation_drift: float = 0.0,
        y_params: tuple[float, float] | None = None,
        include_source: bool = True,
        include_damping: bool = True,
    ) -> "EnergyRecord":
        """Assemble a record from one state plus the integrator's running integrals.

        ``e0`` is the initial total energy (defaults to this record's own E,
        which makes the residual of a single-instant record exactly zero).
        ``y_params = (eps, alpha)`` enables the auxiliary column.
        """
        s = state_scalars(
            state,
            grid,
            stiffness,
            coeff,
            exponents,
            include_source=include_source,
            include_damping=include_damping,
        )
        q = exponents.q
        i_val = s.mu * s.a_uu - s.log_moment
        j_val = 0.5 * s.mu * s.a_uu - s.log_moment / q + s.lq_u / q**2
        e_val = 0.5 * s.l2_v + j_val
        f_val = s.lq_u / q + i_val
        if e0 is None:
            e0 = e_val
        if y_params is not None and -e_val > 0.0:
            eps, alpha = y_params
            y_available = True
            y_val = auxiliary_Y(state, -e_val, eps, alpha)
        else:
            y_available = False
            y_val = math.nan
        residual = e_val + cum_damping_work - 0.5 * cum_modulation_drift - e0
        return cls(
            t=float(state.t),
            E=e_val,
            I=i_val,
            J=j_val,
            F=f_val,
            Y_available=y_available,
            Y=y_val,
            l2_u=s.l2_u,
            l2_v=s.l2_v,
            lq_u=s.lq_u,
            a_uu=s.a_uu,
            log_moment=s.log_moment,
            damping_power=s.damping_power,
            balance_residual=residual,
        )

    def csv_row(self) -> str:
        """Serialize in :data:`CSV_COLUMNS` order; Y is blank when unavailable."""
        vals = []
        for name in CSV_COLUMNS:
            if name == "Y":
                vals.append(repr(self.Y) if self.Y_available else "")
            else:
                vals.append(repr(getattr(self, name)))
        return ",".join(vals)


def csv_header() -> str:
    return ",".join(CSV_COLUMNS)


def balance_residual(records) -> float:
    """Terminal energy-balance defect of a record sequence.

    For records produced by the integrator this is just the stored residual of
    the last record; a single-instant sequence gives exactly zero.
    """
    seq = list(records)
    if not seq:
        raise InapplicableError("no records to balance")
    return float(seq[-1].balance_residual)


def recomputed_balance_series(records, coeff: CoefficientField) -> np.ndarray:
    """Re-derive the balance residual from record columns alone (trapezoid rule).

    Independent of the integrator's internal accumulators, hence useful for
    auditing reimported CSV data; agreement with the stored column is limited
    by the record spacing, not by the step size.
    """
    seq = list(records)
    t = np.array([r.t for r in seq])
    e = np.array([r.E for r in seq])
    friction = np.array([r.damping_power for r in seq])
    drift = np.array([coeff.dmu(r.t) * r.a_uu for r in seq])
    if t.size == 1:
        return np.zeros(1)
    cum_friction = np.concatenate(([0.0], np.cumsum(np.diff(t) * 0.5 * (friction[1:] + friction[:-1]))))
    cum_drift = np.concatenate(([0.0], np.cumsum(np.diff(t) * 0.5 * (drift[1:] + drift[:-1]))))
    return e + cum_friction - 0.5 * cum_drift - e[0]
