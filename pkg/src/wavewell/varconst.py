"""Variational constants of the potential well on the discrete space.

Everything here is a supremum/infimum over the Galerkin subspace with the
grid's quadrature measure, so all computed "best constants" are lower bounds
of their continuum counterparts and every inequality between them (the
Hoelder chain, the two-radius comparison, the well-depth bound) is a genuine
inequality of the discrete model.  Suprema of smooth scale-invariant ratios
are found by Sobolev-gradient ascent with multi-start; one-dimensional roots
by bracketing bisection.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field as _field

import numpy as np
import scipy.linalg

from . import _kernels
from .errors import ConfigurationError, InapplicableError
from .field import CoefficientField, DomainGrid, assemble_stiffness, bilinear_a, make_coefficient_field
from .functionals import Exponents, nehari_on_ray, potential_on_ray, ray_scalars

__all__ = [
    "EmbeddingResult",
    "WellGeometry",
    "blowup_time_bound",
    "case2_g",
    "compute_well_geometry",
    "d_estimate",
    "embedding_b6",
    "embedding_k",
    "epsilon_prime",
    "h1",
    "h2",
    "h3",
    "mountain_pass_lambda",
    "poincare_b7",
    "radius_r",
    "rho_radius",
    "r_star_search",
    "theta_bound",
    "well_depth_m",
    "xi1_estimate",
]


def poincare_b7(grid: DomainGrid) -> float:
    """Best discrete constant in ||u||_2^2 <= B7 ||grad u||_2^2.

    Equal to the reciprocal of the smallest eigenvalue of the unit-profile
    stiffness matrix; (length/pi)^2 up to quadrature rounding.
    """
    unit = make_coefficient_field(length=grid.length, mu_family="exp_decay", mu_params=(1.0, 0.0, 0.0))
    s1 = assemble_stiffness(grid, unit)
    lam = scipy.linalg.eigvalsh(s1)
    return 1.0 / float(lam[0])


def _log_lr_norm_and_grad(grid: DomainGrid, coeffs: np.ndarray, r: float):
    """log ||u||_r and its modal gradient, overflow-safe for large r.

    Node values are rescaled by their max magnitude so that powers like
    |u|^r stay in range even for r of order hundreds.
    """
    u_nodes = grid.evaluate_at_nodes(coeffs)
    m = float(np.max(np.abs(u_nodes)))
    if m == 0.0 or not math.isfinite(m):
        raise InapplicableError("direction with vanishing or non-finite trace")
    z = u_nodes / m
    powers = _kernels.abs_pow(z, r)
    s = float(grid.weights @ powers)
    log_norm = math.log(m) + math.log(s) / r
    density = _kernels.damping(z, r - 2.0)  # |z|^(r-2) z
    grad = grid.basis.T @ (grid.weights * density) / (m * s)
    return log_norm, grad


@dataclass(frozen=True)
class EmbeddingResult:
    """Outcome of a ratio-supremum search: value, maximizer, convergence flag."""

    value: float
    maximizer: np.ndarray
    converged: bool


def _ascend(value_and_grad, normalize, start, *, max_iter=400, tol=1e-13):
    """Backtracking gradient ascent on a scale-invariant objective.

    ``value_and_grad(c) -> (phi, grad)`` and ``normalize`` maps iterates back
    to the chosen sphere.  Returns (phi, c, converged).
    """
    c = normalize(start)
    phi, grad = value_and_grad(c)
    step = 1.0
    converged = False
    for _ in range(max_iter):
        moved = False
        for _ in range(40):
            trial = normalize(c + step * grad)
            phi_t, grad_t = value_and_grad(trial)
            if phi_t > phi:
                moved = True
                break
            step *= 0.5
            if step < 1e-18:
                break
        if not moved:
            converged = True
            break
        if phi_t - phi < tol * max(1.0, abs(phi_t)):
            c, phi, grad = trial, phi_t, grad_t
            converged = True
            break
        c, phi, grad = trial, phi_t, grad_t
        step = min(step * 1.5, 10.0)
    return phi, c, converged


def embedding_k(
    grid: DomainGrid,
    stiffness: np.ndarray,
    r: float,
    *,
    n_restarts: int = 20,
    seed: int = 0,
    warm_starts: tuple[np.ndarray, ...] = (),
) -> EmbeddingResult:
    """Discrete best constant K(r) = sup ||u||_r / sqrt(a(u, u)).

    Ascent runs in the stiffness ("Sobolev") metric: search directions are
    preconditioned with S^-1, which makes the r = 2 case an inverse power
    iteration and keeps convergence mesh-independent for general r.
    Deterministic for fixed seed; ties between restarts resolve to the
    earliest one.
    """
    if r < 2.0:
        raise ConfigurationError(f"embedding exponent must be >= 2, got {r}")
    cho = scipy.linalg.cho_factor(stiffness)

    def normalize(c):
        return c / math.sqrt(max(bilinear_a(c, stiffness), 1e-300))

    def value_and_grad(c):
        # on the sphere a(c,c) = 1: phi = log||u||_r - (1/2) log a(c,c)
        log_norm, g_norm = _log_lr_norm_and_grad(grid, c, r)
        a_cc = bilinear_a(c, stiffness)
        phi = log_norm - 0.5 * math.log(a_cc)
        grad = g_norm - (stiffness @ c) / a_cc
        return phi, scipy.linalg.cho_solve(cho, grad)

    rng = np.random.default_rng(seed)
    starts = [np.asarray(w, dtype=np.float64) for w in warm_starts]
    e1 = np.zeros(grid.n_modes)
    e1[0] = 1.0
    starts.append(e1)
    while len(starts) < max(1, n_restarts) + len(warm_starts) + 1:
        starts.append(rng.standard_normal(grid.n_modes))

    best = None
    for start in starts:
        if not np.any(start):
            continue
        phi, c, conv = _ascend(value_and_grad, normalize, start)
        if best is None or phi > best[0]:
            best = (phi, c, conv)
    phi, c, conv = best
    return EmbeddingResult(value=math.exp(phi), maximizer=normalize(c), converged=conv)


def embedding_b6(
    grid: DomainGrid,
    exponents: Exponents,
    *,
    n_restarts: int = 20,
    seed: int = 0,
) -> EmbeddingResult:
    """Discrete best constant B6 = sup ||u||_(p+2)^q / ||u||_q^q.

    Finite because the quadrature measure is finite and p+2 <= q in the
    regime where the constant is used (source-dominated runs).
    """
    q = exponents.q
    r_low = exponents.p + 2.0

    def normalize(c):
        return c / max(float(np.linalg.norm(c)), 1e-300)

    def value_and_grad(c):
        log_low, g_low = _log_lr_norm_and_grad(grid, c, r_low)
        log_q, g_q = _log_lr_norm_and_grad(grid, c, q)
        return log_low - log_q, g_low - g_q

    rng = np.random.default_rng(seed)
    e1 = np.zeros(grid.n_modes)
    e1[0] = 1.0
    starts = [e1] + [rng.standard_normal(grid.n_modes) for _ in range(max(1, n_restarts))]
    best = None
    for start in starts:
        phi, c, conv = _ascend(value_and_grad, normalize, start)
        if best is None or phi > best[0]:
            best = (phi, c, conv)
    phi, c, conv = best
    return EmbeddingResult(value=math.exp(q * phi), maximizer=normalize(c), converged=conv)


def radius_r(gamma: float, k0: float, mu0: float, q: float) -> float:
    """Safe radius r(gamma) = (mu0 e gamma / K0^(q+gamma))^(1/(q+gamma-2))."""
    if gamma <= 0:
        raise ConfigurationError(f"gamma must be positive, got {gamma}")
    log_r = (math.log(mu0) + 1.0 + math.log(gamma) - (q + gamma) * math.log(k0)) / (q + gamma - 2.0)
    return math.exp(log_r)


def rho_radius(gamma: float, k1: float, mu0: float, q: float, length: float) -> float:
    """Comparison radius rho(gamma): the K1-based upper envelope of r(gamma)."""
    if gamma <= 0:
        raise ConfigurationError(f"gamma must be positive, got {gamma}")
    log_rho = (
        math.log(mu0) + 1.0 + math.log(gamma) - (q + gamma) * math.log(k1) + (gamma / q) * math.log(length)
    ) / (q + gamma - 2.0)
    return math.exp(log_rho)


def case2_g(gamma: float, q: float, k1: float, mu0: float, length: float) -> float:
    """Sign indicator of d(log rho)/d gamma (positive left of the interior max).

    Equals q*gamma*(q+gamma-2)^2 times the derivative of log rho(gamma); it
    starts at q^2 - 2q > 0, decreases eventually, and has a single sign
    change at the interior maximizer of rho.
    """
    return (
        q**2
        + q * gamma
        - 2.0 * q
        - q * gamma * math.log(mu0 * math.e)
        - q * gamma * math.log(gamma)
        + 2.0 * q * gamma * math.log(k1)
        + (q - 2.0) * gamma * math.log(length)
    )


def r_star_search(
    grid: DomainGrid,
    stiffness: np.ndarray,
    coeff: CoefficientField,
    exponents: Exponents,
    gamma_grid: np.ndarray | None = None,
    *,
    gamma_min: float = 1e-3,
    gamma_max: float = 50.0,
    n_gamma: int = 64,
    n_restarts: int = 20,
    continuation_restarts: int = 4,
    seed: int = 0,
    max_doublings: int = 4,
):
    """Grid suprema of the two safe radii.

    Returns ``(r_star, rho_star, k0_samples, k1_result, gamma_grid,
    sup_at_boundary)``.  K0 is sampled along the gamma grid by warm-started
    continuation from the K1 maximizer; each raw sample is floored by the
    Hoelder comparison ``K1 * length^(-gamma/(q(q+gamma)))``, which is a
    second valid lower bound of the same supremum and which makes
    ``r(gamma) <= rho(gamma)`` structural.  If either supremum sits on the
    right edge of the grid and the sign indicator :func:`case2_g` has not yet
    turned negative there, the grid is extended (gamma_max doubled) up to
    ``max_doublings`` times; a boundary supremum after that is flagged.
    """
    q = exponents.q
    mu0 = coeff.mu0
    length = grid.length

    k1_res = embedding_k(grid, stiffness, q, n_restarts=n_restarts, seed=seed)
    k1 = k1_res.value

    explicit_grid = gamma_grid is not None
    doublings = 0
    while True:
        if explicit_grid:
            gammas = np.sort(np.asarray(gamma_grid, dtype=np.float64))
            if gammas.size == 0 or gammas[0] <= 0:
                raise ConfigurationError("gamma grid must be nonempty and positive")
        else:
            gammas = np.geomspace(gamma_min, gamma_max, n_gamma)

        k0_samples: dict[float, float] = {}
        r_vals = np.empty(gammas.size)
        rho_vals = np.empty(gammas.size)
        warm = (k1_res.maximizer,)
        for i, gamma in enumerate(gammas):
            res = embedding_k(
                grid,
                stiffness,
                q + gamma,
                n_restarts=continuation_restarts,
                seed=seed + 1 + i,
                warm_starts=warm,
            )
            warm = (res.maximizer, k1_res.maximizer)
            holder_floor = k1 * length ** (-gamma / (q * (q + gamma)))
            k0 = max(res.value, holder_floor)
            k0_samples[float(gamma)] = k0
            r_vals[i] = radius_r(gamma, k0, mu0, q)
            rho_vals[i] = rho_radius(gamma, k1, mu0, q, length)

        i_r = int(np.argmax(r_vals))
        i_rho = int(np.argmax(rho_vals))
        g_right = case2_g(float(gammas[-1]), q, k1, mu0, length)
        at_edge = (i_r == gammas.size - 1) or (i_rho == gammas.size - 1) or g_right > 0
        if explicit_grid or not at_edge or doublings >= max_doublings:
            sup_at_boundary = at_edge and not explicit_grid
            return (
                float(r_vals[i_r]),
                float(rho_vals[i_rho]),
                k0_samples,
                k1_res,
                gammas,
                bool(sup_at_boundary),
            )
        gamma_max *= 2.0
        doublings += 1


def well_depth_m(r_star: float, mu0: float, q: float) -> float:
    """Certified well depth M = ((q-2)/(2q)) mu0 r_star^2."""
    if r_star <= 0 or mu0 <= 0 or q <= 2:
        raise ConfigurationError("well depth needs r_star > 0, mu0 > 0, q > 2")
    return (q - 2.0) / (2.0 * q) * mu0 * r_star**2


def _lambda_star_from_ray(mu: float, a_uu: float, log_moment: float, lq_u: float, q: float) -> float:
    """Root of lambda -> I(lambda u) / lambda^2 by bracketing bisection."""

    def m(lam: float) -> float:
        return mu * a_uu - lam ** (q - 2.0) * (log_moment + math.log(lam) * lq_u)

    if a_uu <= 0.0 or lq_u <= 0.0:
        raise InapplicableError("scaling ray of a vanishing direction has no Nehari crossing")
    hi = 1.0
    while m(hi) > 0.0:
        hi *= 2.0
        if hi > 1e12:
            raise InapplicableError("no sign change of the Nehari ray within [1e-12, 1e12]")
    lo = hi / 2.0
    while m(lo) <= 0.0:
        lo /= 2.0
        if lo < 1e-12:
            raise InapplicableError("no sign change of the Nehari ray within [1e-12, 1e12]")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if m(mid) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * hi:
            break
    return 0.5 * (lo + hi)


def mountain_pass_lambda(
    u_coeffs: np.ndarray,
    grid: DomainGrid,
    stiffness: np.ndarray,
    coeff: CoefficientField,
    exponents: Exponents,
) -> float:
    """Unique scaling lambda_* > 0 with I(lambda_* u) = 0.

    Uses the modulation's initial value mu(0); the indicator is positive
    below the returned scaling and negative above it.
    """
    u = np.asarray(u_coeffs, dtype=np.float64)
    if not np.any(u):
        raise InapplicableError("the zero vector has no Nehari crossing")
    a_uu, log_moment, lq_u = ray_scalars(u, grid, stiffness, exponents)
    return _lambda_star_from_ray(coeff.mu(0.0), a_uu, log_moment, lq_u, exponents.q)


def d_estimate(
    grid: DomainGrid,
    stiffness: np.ndarray,
    coeff: CoefficientField,
    exponents: Exponents,
    *,
    n_samples: int = 32,
    seed: int = 0,
) -> float:
    """Sampled upper estimate of the well depth: min over directions of J at the Nehari crossing.

    Directions are the first up-to-8 pure modes followed by ``n_samples``
    fixed-seed standard-normal draws, so sample sets are nested in
    ``n_samples`` and the estimate is deterministic and nonincreasing.
    """
    if n_samples < 1:
        raise ConfigurationError("n_samples must be >= 1")
    mu = coeff.mu(0.0)
    q = exponents.q
    dirs = []
    for j in range(min(8, grid.n_modes)):
        e = np.zeros(grid.n_modes)
        e[j] = 1.0
        dirs.append(e)
    rng = np.random.default_rng(seed)
    dirs.extend(rng.standard_normal((n_samples, grid.n_modes)))
    best = math.inf
    for u in dirs:
        a_uu, log_moment, lq_u = ray_scalars(u, grid, stiffness, exponents)
        lam = _lambda_star_from_ray(mu, a_uu, log_moment, lq_u, q)
        best = min(best, potential_on_ray(lam, mu, a_uu, log_moment, lq_u, q))
    return float(best)


def theta_bound(m_depth: float, e0: float, q: float) -> float:
    """Confinement factor theta = 1 - (M/E0)^((2-q)/q) for 0 < E0 < M."""
    if not (0.0 < e0 < m_depth):
        raise InapplicableError(f"theta bound needs 0 < E0 < M, got E0={e0}, M={m_depth}")
    return 1.0 - (m_depth / e0) ** ((2.0 - q) / q)


def xi1_estimate(
    exponents: Exponents,
    mu0: float,
    b6: float,
    g0: float,
    pairing0: float = 0.0,
    *,
    n_eta: int = 65,
    n_eps: int = 65,
    eta_span: float = 1e4,
):
    """Feasible growth constant of the negative-energy blow-up argument.

    Maximizes ``xi1 = eps * min(q/2 + 1, (q-2) mu0 / 2, 1 - eta^-(p+1) B6,
    q - eta^-(p+1) (q-p-2) / (q (p+2)))`` over a logarithmic (eta, eps) grid
    subject to the four strict feasibility constraints (the two eta lower
    bounds, the eps upper bound from the damping absorption, and positivity
    of the initial auxiliary value ``g0^(1-alpha) + eps * pairing0``).

    Returns ``(eta, eps, xi1)``.
    """
    q, p = exponents.q, exponents.p
    if not q > p + 2.0:
        raise InapplicableError(f"growth constant needs q > p + 2, got q={q}, p={p}")
    if not g0 > 0.0:
        raise InapplicableError(f"growth constant needs G0 = -E(0) > 0, got {g0}")
    alpha = exponents.alpha
    pw = p + 1.0

    eta_floor = max(b6, (q - p - 2.0) / (q**2 * (p + 2.0))) ** (1.0 / pw)
    etas = np.geomspace(eta_floor * (1.0 + 1e-3), eta_floor * eta_span, n_eta)
    best = None
    for eta in etas:
        eps_cap = (1.0 - alpha) * (p + 2.0) / (eta * pw)
        if pairing0 < 0.0:
            eps_cap = min(eps_cap, g0 ** (1.0 - alpha) / (-pairing0))
        if eps_cap <= 0.0:
            continue
        shrink = eta ** (-pw)
        margin = min(
            q / 2.0 + 1.0,
            (q - 2.0) * mu0 / 2.0,
            1.0 - shrink * b6,
            q - shrink * (q - p - 2.0) / (q * (p + 2.0)),
        )
        if margin <= 0.0:
            continue
        for eps in np.geomspace(eps_cap * 1e-6, eps_cap * (1.0 - 1e-6), n_eps):
            if not (1.0 - alpha) - eps * eta * pw / (p + 2.0) > 0.0:
                continue
            if not g0 ** (1.0 - alpha) + eps * pairing0 > 0.0:
                continue
            xi1 = eps * margin
            if best is None or xi1 > best[2]:
                best = (float(eta), float(eps), float(xi1))
    if best is None:
        raise InapplicableError("feasibility grid exhausted without an admissible (eta, eps) pair")
    return best


def blowup_time_bound(y0: float, xi: float, alpha: float) -> float:
    """Lifespan bound T* = ((1-alpha)/(alpha xi)) y0^(-alpha/(1-alpha))."""
    if not (y0 > 0.0 and xi > 0.0 and 0.0 < alpha < 1.0):
        raise ConfigurationError("lifespan bound needs y0 > 0, xi > 0, 0 < alpha < 1")
    return (1.0 - alpha) / (alpha * xi) * y0 ** (-alpha / (1.0 - alpha))


def h1(eps: float, p: float, a0: float, mu0: float, b7: float) -> float:
    """Pairing threshold factor of the positive-energy blow-up hypothesis."""
    return (p + 1.0) / (p + 2.0) * (b7**2 / (2.0 * eps * a0 * mu0)) ** (1.0 / (p + 1.0))


def h2(eps: float, q: float, a0: float, mu0: float, b7: float) -> float:
    """Exponential growth rate of the pairing defect; positive for eps < 1 - 2/q."""
    half = q * (1.0 - eps) / 2.0
    return 2.0 * math.sqrt(a0 * mu0 / b7 * (1.0 + half) * (half - 1.0))


def h3(eps: float, q: float, a0: float, mu0: float, b7: float) -> float:
    """Companion threshold q(1 - eps)/h2(eps); equals h1 at the balanced eps."""
    return q * (1.0 - eps) / h2(eps, q, a0, mu0, b7)


def epsilon_prime(q: float, p: float, a0: float, mu0: float, b7: float) -> float:
    """Balanced parameter of the positive-energy blow-up criterion.

    The unique root of h1 = h3 on (0, 1 - 2/q): h1 decreases from +inf while
    h3 starts finite and diverges at the right endpoint, so a bracketing
    bisection is guaranteed a sign change.
    """
    if not q > p + 2.0:
        raise InapplicableError(f"balanced parameter needs q > p + 2, got q={q}, p={p}")
    eps2 = 1.0 - 2.0 / q

    def diff(eps: float) -> float:
        return h1(eps, p, a0, mu0, b7) - h3(eps, q, a0, mu0, b7)

    lo = eps2 * 1e-12
    hi = eps2 * (1.0 - 1e-12)
    f_lo, f_hi = diff(lo), diff(hi)
    if not (f_lo > 0.0 > f_hi):
        raise InapplicableError(
            f"no sign change on the bracket ({f_lo}, {f_hi}): thresholds do not balance"
        )
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if diff(mid) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-16 * hi:
            break
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class WellGeometry:
    """All well-geometry constants of one (grid, coefficients, exponents) triple.

    ``sup_at_boundary`` flags the (unusual) case where the gamma-grid suprema
    still sat on the right edge after the extension cap, i.e. r_star and
    rho_star should be read as running estimates rather than converged values.
    """

    B7: float
    K1: float
    K0_samples: dict[float, float]
    r_star: float
    rho_star: float
    M: float
    d_estimate: float
    gamma_grid: np.ndarray = _field(repr=False)
    sup_at_boundary: bool = False

    def __post_init__(self) -> None:
        gammas = np.asarray(self.gamma_grid, dtype=np.float64)
        gammas.setflags(write=False)
        object.__setattr__(self, "gamma_grid", gammas)
        if not (self.r_star <= self.rho_star * (1.0 + 1e-12)):
            raise ConfigurationError("safe radius exceeds its comparison envelope")
        if not (self.M <= self.d_estimate * (1.0 + 1e-12)):
            raise ConfigurationError("well depth exceeds the sampled depth estimate")

    def to_json_dict(self) -> dict:
        return {
            "B7": self.B7,
            "K1": self.K1,
            "K0_samples": {repr(g): k for g, k in sorted(self.K0_samples.items())},
            "r_star": self.r_star,
            "rho_star": self.rho_star,
            "M": self.M,
            "d_estimate": self.d_estimate,
            "gamma_grid": [float(g) for g in self.gamma_grid],
            "sup_at_boundary": self.sup_at_boundary,
        }

    def digest(self) -> str:
        """Stable content hash of the geometry (used to stamp run summaries)."""
        payload = json.dumps(self.to_json_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode()).hexdigest()


def compute_well_geometry(
    grid: DomainGrid,
    stiffness: np.ndarray,
    coeff: CoefficientField,
    exponents: Exponents,
    *,
    gamma_min: float = 1e-3,
    gamma_max: float = 50.0,
    n_gamma: int = 64,
    n_restarts: int = 20,
    continuation_restarts: int = 4,
    d_samples: int = 32,
    seed: int = 0,
    max_doublings: int = 4,
) -> WellGeometry:
    """Assemble the full :class:`WellGeometry` for one discrete configuration."""
    r_star, rho_star, k0_samples, k1_res, gammas, at_boundary = r_star_search(
        grid,
        stiffness,
        coeff,
        exponents,
        gamma_min=gamma_min,
        gamma_max=gamma_max,
        n_gamma=n_gamma,
        n_restarts=n_restarts,
        continuation_restarts=continuation_restarts,
        seed=seed,
        max_doublings=max_doublings,
    )
    m_depth = well_depth_m(r_star, coeff.mu0, exponents.q)
    depth = d_estimate(grid, stiffness, coeff, exponents, n_samples=d_samples, seed=seed)
    return WellGeometry(
        B7=poincare_b7(grid),
        K1=k1_res.value,
        K0_samples=k0_samples,
        r_star=r_star,
        rho_star=rho_star,
        M=m_depth,
        d_estimate=depth,
        gamma_grid=gammas,
        sup_at_boundary=at_boundary,
    )
