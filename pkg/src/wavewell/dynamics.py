"""Adaptive time integration of the modal wave system.

The semi-discrete system for the modal coefficients ``u`` (displacement) and
``v = du/dt`` is

    du/dt = v
    dv/dt = -mu(t) S u + P[f(u)] - P[g(v)]

with ``S`` the stiffness matrix, ``P`` the quadrature projection onto the
basis, ``f`` the logarithmic source, and ``g`` the power-law friction.  Two
running integrals ride along with the state so the energy balance can be
audited at the integrator's own order of accuracy:

    W1(t) = int_0^t int g(v) v dx dt     (friction work, nondecreasing)
    W2(t) = int_0^t mu'(t) a(u, u) dt    (modulation drift, nonpositive)

Scheme
------
An embedded Dormand-Prince 5(4) pair is applied in integrating-factor form:
the stiffness is diagonalized once (``S = Q diag(d) Q^T``) and each step
propagates the linear oscillation ``(x_j, y_j)`` with frequency
``omega_j = sqrt(mu_n d_j)`` exactly through a per-mode rotation, with
``mu_n = mu(t_n)`` frozen over the step.  Only the projected nonlinearity and
the small remainder ``-(mu(t) - mu_n) d x`` are treated by the Runge-Kutta
stages, so the step size is limited by the nonlinear dynamics alone, never by
the fastest linear mode.  Because the linear part is exact, no stability cap
tied to ``sqrt(mu(0) lambda_max(S))`` is needed or imposed.

Step acceptance uses an error-per-unit-step test (scaled error norm at most
``h``), which makes the accumulated balance residual scale linearly with
``rel_tol``.  Stage one is reused from the previous step's last stage (FSAL);
the reuse is exact because the frozen-coefficient remainder always vanishes at
the start of a step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.linalg

from ._kernels import damping, log_source, rhs_pointwise
from .errors import ConfigurationError, NonFiniteFunctionalError
from .field import CoefficientField, DomainGrid, ModalState, assemble_stiffness
from .functionals import EnergyRecord, Exponents

__all__ = [
    "IntegratorConfig",
    "BlowupReport",
    "Trajectory",
    "galerkin_rhs",
    "detect_blowup",
    "integrate",
]


# Dormand-Prince 5(4) tableau.  The last A row equals the 5th-order weights
# (first-same-as-last), and ERR = b5 - b4 feeds the embedded error estimate.
_C = (0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0)
_A = (
    (),
    (1.0 / 5.0,),
    (3.0 / 40.0, 9.0 / 40.0),
    (44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0),
    (19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0),
    (9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0),
    (35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0),
)
_ERR = (
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
)

_MAX_FACTOR = 5.0
_MIN_FACTOR = 0.2
_SAFETY = 0.9
# A final rejection at least this far above the acceptance line marks the
# local error as exploding (versus a merely tight dt_min).
_EXPLODING_RATIO = 1e3


@dataclass(frozen=True)
class IntegratorConfig:
    """Adaptive-step settings and output cadence.

    ``t_end`` is the absolute horizon.  ``record_every`` is the output cadence
    in simulation time (``None`` resolves to ``t_end / 100``).  ``dt_init``
    defaults to a conservative fraction of the horizon and cadence.
    ``blowup_l2_threshold`` bounds the squared L2 norm of the displacement;
    crossing it stops the run with a blow-up report.
    """

    t_end: float
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    dt_init: Optional[float] = None
    dt_min: float = 1e-12
    dt_max: float = 0.25
    blowup_l2_threshold: float = 1e8
    record_every: Optional[float] = None

    def __post_init__(self) -> None:
        for name in ("t_end", "rel_tol", "abs_tol", "dt_min", "dt_max", "blowup_l2_threshold"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ConfigurationError(f"{name} must be a positive finite number, got {value!r}")
        if not self.dt_min < self.dt_max:
            raise ConfigurationError(
                f"dt_min ({self.dt_min}) must be smaller than dt_max ({self.dt_max})"
            )
        if self.dt_init is not None:
            if not (math.isfinite(self.dt_init) and self.dt_min < self.dt_init <= self.dt_max):
                raise ConfigurationError(
                    f"dt_init ({self.dt_init}) must satisfy dt_min < dt_init <= dt_max"
                )
        if self.record_every is not None:
            if not (math.isfinite(self.record_every) and self.record_every > 0):
                raise ConfigurationError(
                    f"record_every must be positive, got {self.record_every!r}"
                )

    @property
    def resolved_record_every(self) -> float:
        return self.record_every if self.record_every is not None else self.t_end / 100.0

    def resolved_dt_init(self, t_start: float) -> float:
        if self.dt_init is not None:
            return self.dt_init
        span = self.t_end - t_start
        h0 = min(self.dt_max, span / 100.0, self.resolved_record_every)
        return min(self.dt_max, max(h0, 1.5 * self.dt_min))

    def to_json_dict(self) -> dict:
        return {
            "t_end": self.t_end,
            "rel_tol": self.rel_tol,
            "abs_tol": self.abs_tol,
            "dt_init": self.dt_init,
            "dt_min": self.dt_min,
            "dt_max": self.dt_max,
            "blowup_l2_threshold": self.blowup_l2_threshold,
            "record_every": self.record_every,
        }


@dataclass(frozen=True)
class BlowupReport:
    """Finite-time singularity evidence gathered while stepping.

    ``t_detect`` is the time of the last accepted step and hence a lower bound
    on the true singularity time.  ``growth_exponent`` is the effective
    exponential rate of the squared L2 norm over its final factor-of-ten rise
    (``None`` when the history is too short to measure one).  ``trigger`` is
    ``"threshold"`` or ``"step_underflow"``.
    """

    t_detect: float
    l2_sq_at_detect: float
    growth_exponent: Optional[float]
    trigger: str


@dataclass(frozen=True)
class Trajectory:
    """Immutable result of one integration run."""

    records: tuple[EnergyRecord, ...]
    states_sampled: Optional[tuple[ModalState, ...]]
    outcome_flag: str
    config: IntegratorConfig
    blowup_report: Optional[BlowupReport]
    exponents: Exponents
    coeff: CoefficientField
    include_source: bool = True
    include_damping: bool = True
    n_steps: int = 0
    n_rejected: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "records", tuple(self.records))
        if self.states_sampled is not None:
            object.__setattr__(self, "states_sampled", tuple(self.states_sampled))
        if self.outcome_flag not in ("completed", "blowup_detected", "step_underflow"):
            raise ConfigurationError(f"unknown outcome flag {self.outcome_flag!r}")
        times = [r.t for r in self.records]
        if any(t2 <= t1 for t1, t2 in zip(times, times[1:])):
            raise ConfigurationError("records must be strictly increasing in t")

    @property
    def t_final(self) -> float:
        return self.records[-1].t if self.records else math.nan


def galerkin_rhs(
    state: ModalState,
    grid: DomainGrid,
    stiffness: np.ndarray,
    coeff: CoefficientField,
    exponents: Exponents,
    *,
    include_source: bool = True,
    include_damping: bool = True,
) -> tuple[np.ndarray, np.ndarray]:
    """Time derivative (du/dt, dv/dt) of the modal system at one state.

    The linear part is exact on the span; source and friction are evaluated
    pseudo-spectrally (evaluate at the quadrature nodes, apply pointwise,
    project back).  Raises :class:`NonFiniteFunctionalError` if any node value
    or projection fails to be finite.
    """
    u = state.u_coeffs
    v = state.v_coeffs
    dv = -coeff.mu(state.t) * (stiffness @ u)
    if include_source or include_damping:
        u_nodes = grid.evaluate_at_nodes(u)
        v_nodes = grid.evaluate_at_nodes(v)
        if include_source and include_damping:
            force, _ = rhs_pointwise(u_nodes, v_nodes, exponents.q, exponents.p)
        elif include_source:
            force = log_source(u_nodes, exponents.q)
        else:
            force = -damping(v_nodes, exponents.p)
        dv = dv + grid.basis.T @ (grid.weights * force)
    if not (np.all(np.isfinite(dv)) and np.all(np.isfinite(v))):
        raise NonFiniteFunctionalError("non-finite value in the modal time derivative")
    return v.copy(), dv


def detect_blowup(
    times: Sequence[float],
    l2_sq_values: Sequence[float],
    threshold: float,
    *,
    step_underflow: bool = False,
    error_exploding: bool = False,
) -> Optional[BlowupReport]:
    """Decide whether a step history constitutes finite-time blow-up.

    Triggered when the final squared L2 norm exceeds ``threshold``, or when
    the run died of step underflow while the local error estimate was
    exploding.  Returns ``None`` for bounded histories.
    """
    if len(times) == 0:
        return None
    if l2_sq_values[-1] > threshold:
        trigger = "threshold"
    elif step_underflow and error_exploding:
        trigger = "step_underflow"
    else:
        return None
    return BlowupReport(
        t_detect=float(times[-1]),
        l2_sq_at_detect=float(l2_sq_values[-1]),
        growth_exponent=_growth_exponent(times, l2_sq_values),
        trigger=trigger,
    )


def _growth_exponent(times, values) -> Optional[float]:
    """Effective exponential rate over the final factor-of-ten rise."""
    v_final = values[-1]
    if not (v_final > 0.0 and math.isfinite(v_final)):
        return None
    idx = None
    for i in range(len(values) - 2, -1, -1):
        if values[i] <= v_final / 10.0:
            idx = i
            break
    if idx is None:
        return None
    dt = times[-1] - times[idx]
    v_start = values[idx]
    if dt <= 0.0 or not v_start > 0.0:
        return None
    return (math.log(v_final) - math.log(v_start)) / dt


class _StepWorkspace:
    """Per-run precomputation: eigenbasis, node maps, and stage buffers."""

    def __init__(self, grid, stiffness, coeff, exponents, include_source, include_damping):
        d, modes = scipy.linalg.eigh(stiffness)
        self.d = np.maximum(d, 0.0)
        self.modes = modes
        self.node_map = grid.basis @ modes  # nodes x k, eigen coords -> node values
        self.weights = grid.weights
        self.coeff = coeff
        self.q = exponents.q
        self.p = exponents.p
        self.include_source = include_source
        self.include_damping = include_damping
        self.k = stiffness.shape[0]

    def nonlinear(self, t: float, z: np.ndarray, mu_frozen: float):
        """Stage derivative of the non-propagated part.

        Returns the full stage vector (with the frozen-coefficient remainder)
        plus the remainder-free pieces ``(force_proj, dW1, dW2)`` that stay
        valid for first-stage reuse after the step is accepted.
        """
        k = self.k
        x = z[:k]
        y = z[k : 2 * k]
        if self.include_source or self.include_damping:
            u_nodes = self.node_map @ x
            v_nodes = self.node_map @ y
        d_w1 = 0.0
        force = None
        if self.include_source and self.include_damping:
            force, power = rhs_pointwise(u_nodes, v_nodes, self.q, self.p)
            d_w1 = float(self.weights @ power)
        elif self.include_source:
            force = log_source(u_nodes, self.q)
        elif self.include_damping:
            g_nodes = damping(v_nodes, self.p)
            d_w1 = float(self.weights @ (g_nodes * v_nodes))
            force = -g_nodes
        if force is not None:
            proj = self.node_map.T @ (self.weights * force)
        else:
            proj = np.zeros(k)
        stiff_x = self.d * x
        d_w2 = float(self.coeff.dmu(t) * (stiff_x @ x))
        out = np.zeros(2 * k + 2)
        out[k : 2 * k] = proj - (self.coeff.mu(t) - mu_frozen) * stiff_x
        out[2 * k] = d_w1
        out[2 * k + 1] = d_w2
        return out, (proj, d_w1, d_w2)

    def stage_one(self, pure) -> np.ndarray:
        """Rebuild the first-stage vector from stored remainder-free pieces."""
        proj, d_w1, d_w2 = pure
        out = np.zeros(2 * self.k + 2)
        out[self.k : 2 * self.k] = proj
        out[2 * self.k] = d_w1
        out[2 * self.k + 1] = d_w2
        return out

    def propagate(self, z: np.ndarray, tau: float, omega: np.ndarray) -> np.ndarray:
        """Exact linear flow over time ``tau`` at per-mode frequencies ``omega``.

        Safe at omega = 0, where the rotation degenerates to a shear.
        """
        k = self.k
        phase = omega * tau
        cos_p = np.cos(phase)
        shear = tau * np.sinc(phase / np.pi)  # sin(omega tau)/omega
        rate = omega * np.sin(phase)
        out = np.empty_like(z)
        out[:k] = cos_p * z[:k] + shear * z[k : 2 * k]
        out[k : 2 * k] = -rate * z[:k] + cos_p * z[k : 2 * k]
        out[2 * k :] = z[2 * k :]
        return out


def integrate(
    state0: ModalState,
    grid: DomainGrid,
    coeff: CoefficientField,
    exponents: Exponents,
    config: IntegratorConfig,
    *,
    stiffness: Optional[np.ndarray] = None,
    include_source: bool = True,
    include_damping: bool = True,
    y_params: Optional[tuple[float, float]] = None,
    on_record: Optional[Callable[[EnergyRecord], None]] = None,
    keep_states: bool = False,
) -> Trajectory:
    """Advance ``state0`` to ``config.t_end`` and return the full run result.

    Records are emitted at ``t = t0, t0 + cadence, ...`` plus a final record at
    the horizon or at the last accepted step before detection; ``on_record``
    (if given) sees each record as soon as it is accepted, which supports
    incremental CSV writing.  ``y_params = (eps, alpha)`` populates the
    auxiliary blow-up column on records with negative energy.
    """
    t = float(state0.t)
    if config.t_end <= t:
        raise ConfigurationError(f"t_end ({config.t_end}) must exceed the initial time ({t})")
    if stiffness is None:
        stiffness = assemble_stiffness(grid, coeff)
    ws = _StepWorkspace(grid, stiffness, coeff, exponents, include_source, include_damping)
    k = ws.k

    z = np.concatenate([ws.modes.T @ state0.u_coeffs, ws.modes.T @ state0.v_coeffs, [0.0, 0.0]])
    cadence = config.resolved_record_every
    t0 = t
    h_ctrl = config.resolved_dt_init(t)

    records: list[EnergyRecord] = []
    states: list[ModalState] = []
    hist_t: list[float] = [t]
    hist_l2: list[float] = [float(z[:k] @ z[:k])]

    e0_holder: list[float] = []

    def emit(z_now: np.ndarray, t_now: float) -> None:
        state = ModalState(
            t=t_now, u_coeffs=ws.modes @ z_now[:k], v_coeffs=ws.modes @ z_now[k : 2 * k]
        )
        rec = EnergyRecord.build(
            state,
            grid,
            stiffness,
            coeff,
            exponents,
            e0=e0_holder[0] if e0_holder else None,
            cum_damping_work=float(z_now[2 * k]),
            cum_modulation_drift=float(z_now[2 * k + 1]),
            y_params=y_params,
            include_source=include_source,
            include_damping=include_damping,
        )
        if not e0_holder:
            e0_holder.append(rec.E)
        records.append(rec)
        if keep_states:
            states.append(state)
        if on_record is not None:
            on_record(rec)

    def emit_final(z_now: np.ndarray, t_now: float) -> None:
        """Best-effort terminal record; skipped if the state is too large to evaluate."""
        if records and t_now <= records[-1].t:
            return
        try:
            emit(z_now, t_now)
        except NonFiniteFunctionalError:
            pass

    emit(z, t)
    n_record = 1
    next_record = t0 + cadence

    outcome = "completed"
    report: Optional[BlowupReport] = None
    n_steps = 0
    n_rejected = 0
    fsal_pure = None
    stages: list[Optional[np.ndarray]] = [None] * 7
    horizon_slack = 1e-12 * max(1.0, abs(config.t_end))

    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        while t < config.t_end - horizon_slack:
            mu_n = coeff.mu(t)
            omega = np.sqrt(mu_n * ws.d)
            if fsal_pure is None:
                stages[0], fsal_pure = ws.nonlinear(t, z, mu_n)
            else:
                stages[0] = ws.stage_one(fsal_pure)

            t_target = min(next_record, config.t_end)
            accepted = False
            exploding = False
            while True:
                h = min(h_ctrl, t_target - t)
                for i in range(1, 7):
                    acc = z.copy()
                    for j, a_ij in enumerate(_A[i]):
                        if a_ij != 0.0:
                            acc += (h * a_ij) * stages[j]
                    z_stage = ws.propagate(acc, _C[i] * h, omega)
                    n_full, pure = ws.nonlinear(t + _C[i] * h, z_stage, mu_n)
                    stages[i] = ws.propagate(n_full, -_C[i] * h, omega)
                z_new = z_stage  # stage 7 sits at c = 1 with the 5th-order weights
                # Error estimate in the integrating-factor frame (the linear
                # propagator is an isometry in the oscillation energy norm, so
                # skipping it only reweights modes by a bounded factor).  The
                # weighted stage sum cancels to O(h^5), which leaves a machine
                # roundoff residue proportional to the raw stage magnitudes;
                # subtract that floor so the estimate stays meaningful when the
                # derivatives are huge (late stages of a blow-up), instead of
                # stalling the controller on unmeasurable noise.
                err_acc = np.zeros_like(z)
                noise_acc = np.zeros_like(z)
                for j, e_j in enumerate(_ERR):
                    if e_j != 0.0:
                        err_acc += e_j * stages[j]
                        noise_acc += abs(e_j) * np.abs(stages[j])
                err_vec = h * err_acc
                noise_floor = (16.0 * np.finfo(float).eps * h) * noise_acc

                finite = bool(np.all(np.isfinite(z_new)) and np.all(np.isfinite(err_vec)))
                if finite:
                    span = np.maximum(np.abs(z), np.abs(z_new))
                    # Tolerance is relative to the dynamical block's RMS, not
                    # only to each component: spectral tails whose true value
                    # is zero sit at the quadrature roundoff of the force
                    # projection, and holding them to abs_tol alone would fail
                    # steps over noise no refinement can reduce.  Block-
                    # relative scaling is exactly a relative tolerance on the
                    # quadratic functionals the records report.
                    block = span[: 2 * k]
                    block_rms = math.sqrt(float(np.mean(block**2)))
                    np.maximum(block, block_rms, out=block)
                    scale = config.abs_tol + config.rel_tol * span
                    err_eff = np.maximum(np.abs(err_vec) - noise_floor, 0.0)
                    err_norm = float(np.sqrt(np.mean((err_eff / scale) ** 2)))
                else:
                    err_norm = math.inf

                if finite and err_norm <= h:
                    accepted = True
                    break
                n_rejected += 1
                exploding = (not finite) or err_norm > _EXPLODING_RATIO * h
                factor = (
                    _MIN_FACTOR
                    if not finite
                    else max(_MIN_FACTOR, _SAFETY * (h / err_norm) ** 0.25)
                )
                h_ctrl = h * factor
                if min(h_ctrl, t_target - t) < config.dt_min:
                    break

            if not accepted:
                outcome = "step_underflow"
                # "Exploding" means the underflow looks like a singularity
                # rather than a merely tight dt_min: the last attempt was
                # non-finite or far over the acceptance line, or the norm
                # history shows strong accelerating growth.
                grew = hist_l2[-1] > 100.0 * max(hist_l2[0], 1e-300)
                rate = _growth_exponent(hist_t, hist_l2)
                report = detect_blowup(
                    hist_t,
                    hist_l2,
                    config.blowup_l2_threshold,
                    step_underflow=True,
                    error_exploding=exploding or (grew and rate is not None and rate > 0.0),
                )
                emit_final(z, t)
                break

            t += h
            w1_floor = float(z[2 * k])
            z = z_new
            # Friction work is an integral of a nonnegative density; clamp out
            # the integrator's own O(err) wiggle so the running value never dips.
            z[2 * k] = max(float(z[2 * k]), w1_floor)
            fsal_pure = pure
            n_steps += 1
            hist_t.append(t)
            hist_l2.append(float(z[:k] @ z[:k]))

            if err_norm == 0.0:
                factor = _MAX_FACTOR
            else:
                factor = min(_MAX_FACTOR, max(_MIN_FACTOR, _SAFETY * (h / err_norm) ** 0.25))
            h_ctrl = min(config.dt_max, max(h * factor, config.dt_min))

            if hist_l2[-1] > config.blowup_l2_threshold:
                outcome = "blowup_detected"
                report = detect_blowup(hist_t, hist_l2, config.blowup_l2_threshold)
                emit_final(z, t)
                break

            if t >= next_record - 1e-9 * cadence:
                emit(z, t)
                n_record += 1
                next_record = t0 + n_record * cadence

    if outcome == "completed" and (not records or records[-1].t < t - 1e-12):
        emit_final(z, t)

    return Trajectory(
        records=tuple(records),
        states_sampled=tuple(states) if keep_states else None,
        outcome_flag=outcome,
        config=config,
        blowup_report=report,
        exponents=exponents,
        coeff=coeff,
        include_source=include_source,
        include_damping=include_damping,
        n_steps=n_steps,
        n_rejected=n_rejected,
    )
