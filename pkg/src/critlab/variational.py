"""Energy functional, constrained gradient flow and trial-function machinery.

The discrete energy uses exactly the same hat-mass quadrature and P1
Dirichlet form as `grids`, so the flow's fixed point satisfies the discrete
Euler-Lagrange system to machine precision and the reported multiplier
identity closes by construction.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import cho_solve_banded, cholesky_banded

from .errors import (
    DomainTooSmall,
    EnergyDiverged,
    MassViolation,
    NonPositive,
    NotConverged,
    ZeroFunction,
)
from .grids import (
    Grid,
    GridFunction,
    apply_dirichlet_laplacian,
    dirichlet_form,
    hat_masses,
    integrate,
    kinetic_conductances,
    mass,
    normalize_mass,
)
from .groundstate import GroundStateData, _exp_tail_integral, _startup_cell_integrals
from .params import GNParams, surface_area
from .potentials import PotentialSpec, eval_potential
from .quadrature import hermite_coeffs, integrate_cells


# ----------------------------------------------------------------------
# energy pieces
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class EnergyBreakdown:
    """Kinetic + potential - interaction split of the functional."""

    kinetic: float
    potential_term: float
    nonlinear_term: float
    total: float


def sample_potential(spec: PotentialSpec | None, grid: Grid) -> np.ndarray:
    """Nodal potential values at interior nodes (zero when spec is None)."""
    if spec is None:
        return np.zeros(grid.n_interior)
    return eval_potential(spec, grid.interior_nodes)


def evaluate_energy(
    u: GridFunction,
    params: GNParams,
    spec: PotentialSpec | None = None,
    mass_tol: float = 1e-3,
) -> EnergyBreakdown:
    """Evaluate the functional on a unit-mass grid function."""
    m = mass(u)
    if abs(m - 1.0) > mass_tol:
        raise MassViolation(f"|mass - 1| = {abs(m - 1.0):.3g} exceeds {mass_tol}")
    kin = dirichlet_form(u)
    v = sample_potential(spec, u.grid)
    pot = integrate(u.with_values(v * u.values**2), 0.0)
    power = params.nonlinear_power
    nl_int = integrate(u.with_values(np.abs(u.values) ** power), -params.b)
    nonlinear = params.a / (1.0 + params.beta_sq) * nl_int
    return EnergyBreakdown(kin, pot, nonlinear, kin + pot - nonlinear)


def nonlinear_integral(u: GridFunction, params: GNParams) -> float:
    """Weighted interaction integral of |u|^{2+2 beta^2}."""
    return integrate(
        u.with_values(np.abs(u.values) ** params.nonlinear_power), -params.b
    )


def gn_quotient(u: GridFunction, params: GNParams) -> float:
    """Kinetic * mass^{beta^2} / weighted interaction integral."""
    m = mass(u)
    if m <= 0.0:
        raise ZeroFunction("quotient undefined for the zero function")
    return dirichlet_form(u) * m**params.beta_sq / nonlinear_integral(u, params)


def lagrange_multiplier(u: GridFunction, energy: float, params: GNParams) -> float:
    """Multiplier from the energy identity mu = e - a beta^2/(1+beta^2) * NL."""
    return energy - params.a * params.beta_sq / (1.0 + params.beta_sq) * nonlinear_integral(u, params)


def _el_defect(u: GridFunction, params: GNParams, spec: PotentialSpec | None) -> np.ndarray:
    """Nodal defect -Lap u + V u - a w_b u^{1+2b^2} without the mu term."""
    grid = u.grid
    lap = apply_dirichlet_laplacian(u).values
    v = sample_potential(spec, grid)
    w0 = hat_masses(grid, 0.0)[grid.interior]
    wb = hat_masses(grid, -params.b)[grid.interior]
    sing = wb / w0
    uu = u.values
    return lap + v * uu - params.a * sing * np.abs(uu) ** (2.0 * params.beta_sq) * uu


def euler_lagrange_residual(
    u: GridFunction, mu: float, params: GNParams, spec: PotentialSpec | None = None
) -> float:
    """Sup-norm of the stationarity defect at multiplier mu."""
    return float(np.max(np.abs(_el_defect(u, params, spec) - mu * u.values)))


def fit_multiplier(u: GridFunction, params: GNParams, spec: PotentialSpec | None = None) -> float:
    """Multiplier minimizing the weighted L2 norm of the stationarity defect."""
    grid = u.grid
    w0 = hat_masses(grid, 0.0)[grid.interior]
    r0 = _el_defect(u, params, spec)
    return float(np.dot(w0 * r0, u.values) / np.dot(w0 * u.values, u.values))


# ----------------------------------------------------------------------
# cutoff trial functions
# ----------------------------------------------------------------------

def _bump(t):
    """Smooth bump: 1 for t <= 0, exp(1 - 1/(1 - t^2)) on (0, 1), 0 beyond."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    out[t <= 0.0] = 1.0
    mid = (t > 0.0) & (t < 1.0)
    tm = t[mid]
    out[mid] = np.exp(1.0 - 1.0 / (1.0 - tm * tm))
    return out

def _bump_d1(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    mid = (t > 0.0) & (t < 1.0)
    tm = t[mid]
    u = 1.0 / (1.0 - tm * tm)
    out[mid] = np.exp(1.0 - u) * (-2.0 * tm * u * u)
    return out

def _bump_d2(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    mid = (t > 0.0) & (t < 1.0)
    tm = t[mid]
    u = 1.0 / (1.0 - tm * tm)
    out[mid] = np.exp(1.0 - u) * (4.0 * tm * tm * u**4 - 2.0 * u * u - 8.0 * tm * tm * u**3)
    return out


@dataclass
class TrialFunction:
    """Mass-normalized, cut-off, dilated copy of the ground profile."""

    tau: float
    cutoff_radius: float
    a_tau: float
    values: GridFunction


def _trial_radial_integrals(gs: GroundStateData, tau: float, R: float):
    """(mass, kinetic, interaction) of the un-normalized trial function.

    Evaluated on the profile's own grid in the concentrated variable, so
    no interpolation of the profile enters where the cutoff is 1; accuracy
    is limited only by the profile itself.
    """
    params = gs.params
    N, b = params.N, params.b
    bs = params.beta_sq
    power = 2.0 + 2.0 * bs
    p = gs.profile
    y, q, dq = p.nodes, p.values, p.derivs
    d2q = q - y ** (-b) * q ** (1.0 + 2.0 * bs) - (N - 1) / y * dq
    nu = N - 1.0

    Rt = R * tau
    t = y / Rt - 1.0
    ph = _bump(t)
    ph_y = _bump_d1(t) / Rt
    ph_yy = _bump_d2(t) / Rt**2

    su_mass, su_grad, su_nl, _ = _startup_cell_integrals(N, b, p.startup_amplitude, y[0])

    f = ph * ph * q * q
    df = 2.0 * ph * ph_y * q * q + ph * ph * 2.0 * q * dq
    i_m = su_mass + integrate_cells(y, hermite_coeffs(y, f, df), nu)

    gfun = ph_y * q + ph * dq
    f = gfun * gfun
    df = 2.0 * gfun * (ph_yy * q + 2.0 * ph_y * dq + ph * d2q)
    i_k = su_grad + integrate_cells(y, hermite_coeffs(y, f, df), nu)

    f = ph**power * q**power
    df = power * ph ** (power - 1.0) * ph_y * q**power + ph**power * power * q ** (power - 1.0) * dq
    i_nl = su_nl + integrate_cells(y, hermite_coeffs(y, f, df), nu - b)

    if 2.0 * Rt > p.r_max:
        # cutoff still alive at the truncation radius: add matched-tail remainders
        K = p.tail_coeff
        phi_end = float(_bump(np.array([p.r_max / Rt - 1.0]))[0])
        i_m += phi_end**2 * K * K * _exp_tail_integral(p.r_max, nu - (N - 1.0))
        i_k += phi_end**2 * K * K * _exp_tail_integral(p.r_max, nu - (N - 1.0))
        i_nl += phi_end**power * K**power * _exp_tail_integral(p.r_max, nu - b - (N - 1.0))

    S = surface_area(N)
    l2 = gs.l2_sq
    mass_raw = S * i_m / l2
    kin_raw = tau**2 * S * i_k / l2
    nl_raw = tau**2 * S * i_nl / l2 ** (1.0 + bs)
    return mass_raw, kin_raw, nl_raw


def default_cutoff_radius(grid: Grid) -> float:
    return grid.domain.origin_distance / 4.0


def make_trial_function(
    gs: GroundStateData, grid: Grid, tau: float, R: float | None = None
) -> TrialFunction:
    """Cut-off dilated profile with unit mass on the grid.

    ``a_tau`` is the continuum normalization constant (its deviation from 1
    is the cutoff's mass deficit, superpolynomially small in tau); the grid
    realization is renormalized exactly afterwards.
    """
    if tau <= 0.0:
        raise ValueError("dilation parameter tau must be positive")
    d = grid.domain.origin_distance
    if R is None:
        R = default_cutoff_radius(grid)
    if 2.0 * R >= d:
        raise DomainTooSmall(f"support radius 2R = {2 * R} reaches the boundary (distance {d})")

    mass_raw, _, _ = _trial_radial_integrals(gs, tau, R)
    a_tau = 1.0 / math.sqrt(mass_raw)

    x = grid.interior_nodes
    r = np.abs(x)
    scale = tau ** (gs.params.N / 2.0) / math.sqrt(gs.l2_sq)
    vals = a_tau * scale * _bump(r / R - 1.0) * gs.q(tau * r)
    u = normalize_mass(GridFunction(grid, vals))
    return TrialFunction(tau=tau, cutoff_radius=R, a_tau=a_tau, values=u)


def trial_quotient(gs: GroundStateData, tau: float, R: float) -> float:
    """Quotient of the cut-off trial family, via the profile-grid route.

    Accurate to the profile's own accuracy (~1e-9), which resolves the
    exponentially small cutoff deficit that a coarse domain grid cannot.
    """
    mass_raw, kin_raw, nl_raw = _trial_radial_integrals(gs, tau, R)
    return kin_raw * mass_raw**gs.params.beta_sq / nl_raw


# ----------------------------------------------------------------------
# normalized gradient flow
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class FlowConfig:
    """Tuning for the semi-implicit normalized gradient flow."""

    dt: float = 1e-2
    tol: float = 1e-9
    max_iters: int = 500_000
    dt_min: float = 1e-7
    dt_max: float = 0.25
    grow_every: int = 250
    grow_factor: float = 1.4
    energy_slack: float = 1e-9
    probe_mode: bool = False
    energy_floor: float = -1e3
    record_energy: bool = False
    record_stride: int = 1


@dataclass
class MinimizerResult:
    """Converged (or partial) minimizer with its derived scalars."""

    u: GridFunction
    energy: float
    mu: float
    eps: float
    iterations: int
    converged: bool
    residual: float
    breakdown: EnergyBreakdown | None = None
    mu_fit: float | None = None
    energy_trace: list = field(default_factory=list)
    kinetic_trace: list = field(default_factory=list)


class _FlowSystem:
    """Precomputed discrete system shared by the flow steps."""

    def __init__(self, grid: Grid, params: GNParams, spec: PotentialSpec | None):
        self.grid = grid
        self.params = params
        kappa = kinetic_conductances(grid)
        n_nodes = grid.nodes.size
        lo = grid.interior.start
        hi = grid.interior.stop
        diag = np.zeros(n_nodes)
        diag[:-1] += kappa
        diag[1:] += kappa
        self.diag_K = diag[lo:hi]
        self.off_K = -kappa[lo : hi - 1]
        self.W = hat_masses(grid, 0.0)[grid.interior]
        self.Wb = hat_masses(grid, -params.b)[grid.interior]
        self.V = sample_potential(spec, grid)
        self.power = params.nonlinear_power

    def apply_K(self, u):
        out = self.diag_K * u
        out[:-1] += self.off_K * u[1:]
        out[1:] += self.off_K * u[:-1]
        return out

    def factor(self, dt):
        ab = np.zeros((2, self.diag_K.size))
        ab[0, 1:] = self.off_K
        ab[1, :] = self.diag_K + self.W / dt
        return cholesky_banded(ab, lower=False)

    def functionals(self, u):
        """(energy, kinetic, muR, nl_int) of a unit-mass iterate."""
        a, bs = self.params.a, self.params.beta_sq
        kin = float(np.dot(self.apply_K(u), u))
        pot = float(np.dot(self.W, self.V * u * u))
        nl = float(np.dot(self.Wb, u**self.power))
        energy = kin + pot - a / (1.0 + bs) * nl
        mu_r = kin + pot - a * nl
        return energy, kin, mu_r, nl


def gradient_flow_minimize(
    init: GridFunction,
    params: GNParams,
    spec: PotentialSpec | None,
    cfg: FlowConfig = FlowConfig(),
) -> MinimizerResult:
    """Normalized gradient flow to the constrained minimizer.

    Backward Euler in the Laplacian, explicit potential/interaction terms
    with a multiplier shift (so the fixed point solves the discrete
    Euler-Lagrange system exactly), renormalization after every step, and
    time-step adaptation on positivity loss or energy increase.
    """
    if np.any(init.values < 0.0) or not np.any(init.values > 0.0):
        raise ValueError("gradient flow requires a nonnegative, nonzero initial function")
    # zeros in the init (for example beyond a cutoff) are gone after one
    # implicit step: the inverse of the M-matrix is entrywise positive
    sys_ = _FlowSystem(init.grid, params, spec)
    a = params.a
    u = init.values / math.sqrt(float(np.dot(sys_.W, init.values**2)))

    dt = cfg.dt
    fact = sys_.factor(dt)
    energy_prev, kin, mu_r, _ = sys_.functionals(u)
    traces_e: list = []
    traces_k: list = []
    iterations = 0
    converged = False
    clean_steps = 0

    while iterations < cfg.max_iters:
        rhs = sys_.W * (u / dt - sys_.V * u + mu_r * u) + a * sys_.Wb * u ** (sys_.power - 1.0)
        u_star = cho_solve_banded((fact, False), rhs)
        if np.any(u_star <= 0.0):
            if dt <= cfg.dt_min:
                raise NonPositive(
                    f"iterate lost positivity at dt = {dt:.3g} (minimum {cfg.dt_min:.3g})"
                )
            dt = max(dt * 0.5, cfg.dt_min)
            fact = sys_.factor(dt)
            clean_steps = 0
            continue
        u_new = u_star / math.sqrt(float(np.dot(sys_.W, u_star**2)))
        energy_new, kin, mu_r_new, _ = sys_.functionals(u_new)

        if cfg.probe_mode and energy_new < cfg.energy_floor:
            raise EnergyDiverged(
                f"energy {energy_new:.6g} fell below the floor {cfg.energy_floor:.3g}",
                energy=energy_new,
            )
        slack = cfg.energy_slack * (1.0 + abs(energy_prev))
        if energy_new > energy_prev + slack and dt > 2.0 * cfg.dt_min:
            dt = max(dt * 0.5, cfg.dt_min)
            fact = sys_.factor(dt)
            clean_steps = 0
            continue

        iterations += 1
        delta = float(np.max(np.abs(u_new - u))) / dt
        u = u_new
        energy_prev = energy_new
        mu_r = mu_r_new
        if cfg.record_energy and iterations % cfg.record_stride == 0:
            traces_e.append(energy_new)
            traces_k.append(kin)
        if delta < cfg.tol:
            converged = True
            break
        clean_steps += 1
        if clean_steps >= cfg.grow_every and dt < cfg.dt_max:
            dt = min(dt * cfg.grow_factor, cfg.dt_max)
            fact = sys_.factor(dt)
            clean_steps = 0

    result = _build_result(u, init.grid, params, spec, iterations, converged)
    result.energy_trace = traces_e
    result.kinetic_trace = traces_k
    if not converged:
        raise NotConverged(
            f"flow did not reach tol = {cfg.tol:.2g} in {cfg.max_iters} iterations",
            partial=result,
        )
    return result


def _build_result(u_vals, grid, params, spec, iterations, converged) -> MinimizerResult:
    u = GridFunction(grid, u_vals)
    eb = evaluate_energy(u, params, spec, mass_tol=1e-6)
    mu = lagrange_multiplier(u, eb.total, params)
    mu_f = fit_multiplier(u, params, spec)
    eps = 1.0 / math.sqrt(eb.kinetic)
    resid = euler_lagrange_residual(u, mu_f, params, spec)
    return MinimizerResult(
        u=u,
        energy=eb.total,
        mu=mu,
        eps=eps,
        iterations=iterations,
        converged=converged,
        residual=resid,
        breakdown=eb,
        mu_fit=mu_f,
    )


# ----------------------------------------------------------------------
# probes built on the flow and the trial family
# ----------------------------------------------------------------------

def nonexistence_probe(
    params: GNParams,
    gs: GroundStateData,
    grid: Grid,
    tau_list,
    spec: PotentialSpec | None = None,
    R: float | None = None,
):
    """Energies of the trial family above the threshold.

    Returns a list of (tau, energy) pairs; the leading behavior is
    (1 - a/a*) tau^2 / beta^2 plus the potential's contribution.
    """
    taus = list(tau_list)
    if any(t2 <= t1 for t1, t2 in zip(taus, taus[1:])):
        raise ValueError("tau_list must be strictly increasing")
    if params.a < gs.a_star:
        raise ValueError(
            f"nonexistence probe expects a >= a* = {gs.a_star:.6g}, got a = {params.a}"
        )
    out = []
    for tau in taus:
        trial = make_trial_function(gs, grid, tau, R)
        eb = evaluate_energy(trial.values, params, spec)
        out.append((tau, eb.total))
    return out


def fit_tau_square_coefficient(taus, energies, p: float | None = None) -> float:
    """Least-squares coefficient of tau^2 in E(tau), optionally with a
    tau^{-p} column for the potential term."""
    taus = np.asarray(taus, dtype=float)
    energies = np.asarray(energies, dtype=float)
    cols = [taus**2, np.ones_like(taus)]
    if p is not None:
        cols.append(taus ** (-p))
    A = np.stack(cols, axis=1)
    coef, *_ = np.linalg.lstsq(A, energies, rcond=None)
    return float(coef[0])


@dataclass(frozen=True)
class UniquenessReport:
    """Spread of flow endpoints over independent random starts."""

    n_requested: int
    n_converged: int
    max_l2_distance: float
    max_sup_distance: float
    energy_spread_rel: float
    energies: tuple
    failures: tuple


def multistart_uniqueness(
    params: GNParams,
    spec: PotentialSpec | None,
    grid: Grid,
    n_starts: int,
    seed: int,
    cfg: FlowConfig = FlowConfig(),
    n_workers: int = 4,
) -> UniquenessReport:
    """Run the flow from independent random positive starts and compare."""
    if n_starts < 3:
        raise ValueError("need at least 3 starts for a meaningful comparison")
    seeds = np.random.SeedSequence(seed).spawn(n_starts)

    def one(k):
        rng = np.random.default_rng(seeds[k])
        init = GridFunction(grid, rng.uniform(0.2, 1.0, grid.n_interior))
        return gradient_flow_minimize(init, params, spec, cfg)

    results: dict[int, MinimizerResult] = {}
    failures: list[str] = []
    with ThreadPoolExecutor(max_workers=min(n_workers, n_starts)) as ex:
        futs = {ex.submit(one, k): k for k in range(n_starts)}
        for fut in as_completed(futs):
            k = futs[fut]
            try:
                results[k] = fut.result()
            except NotConverged as exc:
                failures.append(f"start {k}: {exc}")

    ulist = [results[k] for k in sorted(results)]
    max_l2 = 0.0
    max_sup = 0.0
    for i in range(len(ulist)):
        for j in range(i + 1, len(ulist)):
            d = ulist[i].u.values - ulist[j].u.values
            max_l2 = max(max_l2, math.sqrt(integrate(ulist[i].u.with_values(d * d), 0.0)))
            max_sup = max(max_sup, float(np.max(np.abs(d))))
    energies = [r.energy for r in ulist]
    if energies:
        spread = (max(energies) - min(energies)) / max(abs(np.mean(energies)), 1e-300)
    else:
        spread = math.nan
    return UniquenessReport(
        n_requested=n_starts,
        n_converged=len(ulist),
        max_l2_distance=max_l2,
        max_sup_distance=max_sup,
        energy_spread_rel=spread,
        energies=tuple(energies),
        failures=tuple(failures),
    )


@dataclass(frozen=True)
class ThresholdProbe:
    """Observed behavior of the flow exactly at the threshold strength."""

    converged: bool
    iterations: int
    final_energy: float
    final_kinetic: float
    kinetic_trace: tuple


def threshold_probe(
    gs: GroundStateData,
    spec: PotentialSpec | None,
    grid: Grid,
    cfg: FlowConfig | None = None,
) -> ThresholdProbe:
    """Run the flow at a = a* and report the energy/kinetic trend.

    Existence at the threshold is not decidable numerically (bounded
    minimizing sequences cannot be certified); this reports what the flow
    does, nothing more.
    """
    if cfg is None:
        cfg = FlowConfig(max_iters=20_000, record_energy=True, record_stride=200)
    else:
        cfg = replace(cfg, record_energy=True)
    params = gs.params.with_a(gs.a_star)
    rng = np.random.default_rng(7)
    init = GridFunction(grid, 0.5 + rng.uniform(0.0, 0.5, grid.n_interior))
    try:
        res = gradient_flow_minimize(init, params, spec, cfg)
        converged = True
    except NotConverged as exc:
        res = exc.partial
        converged = False
    return ThresholdProbe(
        converged=converged,
        iterations=res.iterations,
        final_energy=res.energy,
        final_kinetic=res.breakdown.kinetic,
        kinetic_trace=tuple(res.kinetic_trace),
    )
