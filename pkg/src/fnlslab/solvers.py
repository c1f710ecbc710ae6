"""Constrained descent solvers for the limit and penalized problems.

Ground states of the limit energy L_a are computed by an alternating
scheme: an exact rescale onto the Pohozaev set {P_a = 1}, then a
preconditioned backtracking descent step tangent to it. When N <= 2s the
Pohozaev functional is unavailable and the solver descends on the Nehari
set instead, where the full gradient vanishes at the constrained minimum.
The penalized energy J_eps is minimized the same way on its Nehari set.

Residuals are H^(-s)-dual norms of the (tangential) gradient. Iterate logs
record (iter, energy, residual, pohozaev, penalty, step_size) per accepted
step and are deterministic for identical inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.optimize import brentq

from . import functionals as fn
from . import spectral as sp
from .grid import Field, GridSpec, minimum_image_delta
from .model import ModelSpec, NonlinearitySpec, sobolev_critical, validate_nonlinearity


class SolverError(RuntimeError):
    """Raised when a solve cannot proceed or fails to converge usably."""


@dataclass(frozen=True)
class SolveOptions:
    """Descent controls shared by all solvers.

    step_rule is "backtracking" (Armijo with the given constant, trial steps
    from a curvature estimate) or "fixed" (constant step_size, still rejected
    if it increases the energy). The preconditioner is the multiplier
    (|xi|^(2s) + c)^(-1) with c the potential floor. allow_critical opts in
    to growth exponents at or above the critical bound, where the discrete
    minimizer exists but the continuum infimum is not attained.
    """
    max_iters: int = 2000
    step_rule: str = "backtracking"
    armijo: float = 1e-4
    step_size: float = 0.5
    tol_residual: float = 1e-6
    tol_pohozaev: float = 1e-8
    precondition: bool = True
    recenter: bool = True
    allow_critical: bool = False
    backtrack_factor: float = 0.4
    max_backtracks: int = 40
    step_clip: tuple = (1e-4, 50.0)
    ray_every: int = 10
    divergence_energy: float = -1e6

    def __post_init__(self):
        if self.step_rule not in ("fixed", "backtracking"):
            raise ValueError(f"unknown step rule {self.step_rule!r}")
        if not (0.0 < self.armijo <= 0.5):
            raise ValueError("Armijo constant must lie in (0, 1/2]")
        if self.tol_residual <= 0 or self.tol_pohozaev <= 0:
            raise ValueError("tolerances must be positive")
        if self.step_size <= 0 or self.max_iters < 1:
            raise ValueError("step_size and max_iters must be positive")


@dataclass(frozen=True)
class SolveResult:
    """Converged (or final) state of one solve."""
    field: Field
    energy: fn.EnergyBreakdown
    residual: float
    pohozaev: float
    barycenter: tuple
    iterations: int
    converged: bool
    seed_tag: str
    iterates: tuple = ()
    diagnostics: dict = dc_field(default_factory=dict)


@dataclass(frozen=True)
class SolveFailure:
    """Per-seed failure record kept in multistart output order."""
    seed_tag: str
    error: str


def gaussian_seed(grid: GridSpec, amplitude: float = 3.0, width: float = 2.0,
                  center=None) -> Field:
    """Gaussian bump amplitude*exp(-|x-center|^2/width^2), the stock seed."""
    if center is None:
        center = (0.0,) * grid.N
    mesh = grid.mesh()
    r2 = sum((c - x0) ** 2 for c, x0 in zip(mesh, center))
    return Field(grid, amplitude * np.exp(-r2 / width ** 2))


def recenter_field(u: Field) -> Field:
    """Roll the grid so the field maximum sits at the origin. Idempotent."""
    g = u.grid
    j = np.unravel_index(int(np.argmax(u.values)), g.shape)
    shift = tuple(g.M // 2 - j[ax] for ax in range(g.N))
    if all(c == 0 for c in shift):
        return u
    return Field(g, np.roll(u.values, shift, axis=tuple(range(g.N))))


def mass_barycenter(u: Field) -> tuple:
    """|u|^2-weighted centroid, unwrapped around the field maximum."""
    g = u.grid
    w = u.values ** 2
    total = float(np.sum(w))
    if total == 0.0:
        return (0.0,) * g.N
    j = np.unravel_index(int(np.argmax(w)), g.shape)
    mesh = g.mesh()
    out = []
    for ax in range(g.N):
        x0 = g.axis()[j[ax]]
        span = 2.0 * g.L
        delta = mesh[ax] - x0
        delta = delta - span * np.round(delta / span)
        out.append(float(x0 + np.sum(w * delta) / total))
    return tuple(out)


def _negative_mass(values: np.ndarray, cell_volume: float) -> float:
    neg = np.minimum(values, 0.0)
    return float(np.sqrt(np.sum(neg ** 2) * cell_volume))


def _finalize_field(values: np.ndarray, grid: GridSpec) -> tuple[np.ndarray, bool]:
    """Clip stray negatives at -1e-10; flag if the negative mass mattered."""
    l2 = float(np.sqrt(np.sum(values ** 2) * grid.cell_volume))
    neg = _negative_mass(values, grid.cell_volume)
    flagged = neg > 1e-8 * max(l2, 1e-300)
    return np.maximum(values, -1e-10), flagged


def _check_limit_model(nl: NonlinearitySpec, a: float, grid: GridSpec,
                       opts: SolveOptions) -> bool:
    """Validate the nonlinearity; allow_critical may waive f1.3 alone.

    Returns True when the critical-growth waiver was used.
    """
    report = validate_nonlinearity(nl, a, N=grid.N, s=grid.s)
    failed = report.failed_tags
    if not failed:
        return False
    if failed == ("f1.3",) and opts.allow_critical:
        return True
    raise SolverError(
        "model validation failed: " + ", ".join(f"({t})" for t in failed))


class _PowerTerms:
    """Fused per-iterate quantities for the limit problem."""

    def __init__(self, grid: GridSpec, nl: NonlinearitySpec, a: float):
        self.g = grid
        self.nl = nl
        self.a = a
        self.mult = grid.multiplier()
        self.pw = grid.parseval_weight
        self.w = grid.cell_volume

    def stats(self, u: np.ndarray):
        uh = np.fft.fftn(u)
        K = float(np.sum(self.mult * np.abs(uh) ** 2) * self.pw)
        l2 = float(np.sum(u * u) * self.w)
        IF = float(np.sum(self.nl.F(u)) * self.w)
        return uh, K, l2, IF

    def energy(self, K, l2, IF):
        return 0.5 * K + 0.5 * self.a * l2 - IF


def _land_pohozaev(u: np.ndarray, terms: _PowerTerms):
    """Amplitude rescale c*u landing exactly on {P_a = 1}.

    Closed form for power nonlinearities; bracketed root otherwise. Returns
    (v, vh, K, l2, IF) for the landed field. Raises when the bracket cannot
    activate (seed too small)."""
    g = terms.g
    nu = g.N - 2.0 * g.s
    uh, K, l2, IF = terms.stats(u)
    if K < 1e-14:
        raise SolverError("seed has no kinetic content")
    target = (nu / (2.0 * g.N)) * K + 0.5 * terms.a * l2
    if terms.nl.kind == "power" and IF > 0:
        c = (target / IF) ** (1.0 / (terms.nl.p - 1.0))
    else:
        def T(c):
            return float(np.sum(terms.nl.F(c * u)) * terms.w) - c * c * target
        c_hi = 1.0
        for _ in range(80):
            if T(c_hi) > 0:
                break
            c_hi *= 2.0
        else:
            raise SolverError(
                "Pohozaev bracket inactive along the amplitude ray; use a "
                "seed with larger amplitude")
        c_lo = c_hi / 2.0
        while c_lo > 1e-12 and T(c_lo) > 0:
            c_lo /= 2.0
        c = brentq(T, c_lo, c_hi, xtol=1e-14, rtol=1e-15)
    if not np.isfinite(c) or c <= 0:
        raise SolverError(
            "Pohozaev bracket inactive for this seed; use a larger amplitude")
    v = c * u
    if terms.nl.kind == "power":
        vh, Kv, l2v, IFv = c * uh, c * c * K, c * c * l2, \
            c ** (terms.nl.p + 1.0) * IF
    else:
        vh, Kv, l2v, IFv = terms.stats(v)
    return v, vh, Kv, l2v, IFv


def _pohozaev_from(K, l2, IF, terms: _PowerTerms) -> float:
    g = terms.g
    nu = g.N - 2.0 * g.s
    br = IF - 0.5 * terms.a * l2
    scaled = (2.0 * g.N / nu) * br / K if K >= 1e-14 else 0.0
    if scaled <= 0.0:
        return 0.0
    return float(scaled ** (1.0 / (2.0 * g.s)))


def _solve_pohozaev(a: float, nl: NonlinearitySpec, grid: GridSpec,
                    opts: SolveOptions, seed: Field, seed_tag: str,
                    waived: bool) -> SolveResult:
    """Alternating projection/descent on {P_a = 1}, N > 2s."""
    g = grid
    terms = _PowerTerms(g, nl, a)
    mult, pw, w = terms.mult, terms.pw, terms.w
    nu = g.N - 2.0 * g.s
    coef = 2.0 * g.N / nu
    prec = 1.0 / (mult + a) if opts.precondition else np.ones(g.shape)
    dual = 1.0 / (1.0 + mult)

    u, uh, K, l2, IF = _land_pohozaev(seed.values, terms)
    E = terms.energy(K, l2, IF)
    log = []
    prev_u = prev_gt = None
    beta = opts.step_size
    n_iter = 0
    converged = False
    res_t = np.inf

    def ray_walk(u, uh, K, l2, IF, E):
        """Bounded amplitude-ray walk: hop outward while the landed energy
        decreases. Collapses grid-pinned valley detours the tangent step
        cannot see."""
        best = (u, uh, K, l2, IF, E)
        cur = u
        for _ in range(8):
            cand = _land_pohozaev(1.3 * cur, terms)
            Ec = terms.energy(cand[2], cand[3], cand[4])
            if Ec < best[5] - 1e-13 * abs(best[5]):
                best = (*cand, Ec)
                cur = cand[0]
            else:
                break
        return best, best[5] < E - 1e-13 * abs(E)

    for n_iter in range(1, opts.max_iters + 1):
        lap = np.fft.ifftn(mult * uh).real
        fu = nl.f(u)
        grad = lap + a * u - fu
        gh = np.fft.fftn(grad)
        br = IF - 0.5 * a * l2
        dbr = fu - a * u
        dK = 2.0 * lap
        gP = coef * (dbr * K - br * dK) / (K * K)
        gPh = np.fft.fftn(gP)
        denom = float(np.sum(prec * np.abs(gPh) ** 2) * pw)
        lam = (float(np.sum(prec * (gh * np.conj(gPh)).real) * pw) / denom
               if denom > 1e-300 else 0.0)
        gth = gh - lam * gPh
        res_t = float(np.sqrt(np.sum(dual * np.abs(gth) ** 2) * pw))
        P = _pohozaev_from(K, l2, IF, terms)
        log.append((n_iter - 1, E, res_t, P, 0.0, beta))
        if res_t <= opts.tol_residual and abs(P - 1.0) <= opts.tol_pohozaev:
            converged = True
            break
        gt = np.fft.ifftn(gth).real
        d = -np.fft.ifftn(prec * gth).real
        dec = float(np.sum(prec * np.abs(gth) ** 2) * pw)

        if opts.step_rule == "backtracking" and prev_u is not None:
            du = u - prev_u
            dg = gt - prev_gt
            denom_bb = float(np.sum(du * dg) * w)
            if denom_bb > 1e-300:
                beta = float(np.sum(du * du) * w) / denom_bb
            beta = float(np.clip(beta, *opts.step_clip))
        elif opts.step_rule == "fixed":
            beta = opts.step_size
        prev_u, prev_gt = u, gt

        accepted = False
        bt = beta
        for _ in range(opts.max_backtracks + 1):
            try:
                v, vh, Kv, l2v, IFv = _land_pohozaev(u + bt * d, terms)
            except SolverError:
                bt *= opts.backtrack_factor
                continue
            Ev = terms.energy(Kv, l2v, IFv)
            if Ev <= E - opts.armijo * bt * dec:
                u, uh, K, l2, IF, E = v, vh, Kv, l2v, IFv, Ev
                accepted = True
                beta = bt
                break
            bt *= opts.backtrack_factor
            if opts.step_rule == "fixed":
                break
        if not accepted:
            (u, uh, K, l2, IF, E), moved = ray_walk(u, uh, K, l2, IF, E)
            if moved:
                prev_u = prev_gt = None
                continue
            raise SolverError(
                f"stagnation: no Armijo step found at iterate {n_iter} "
                f"(residual {res_t:.3e})")
        if opts.ray_every and n_iter % opts.ray_every == 0:
            (u, uh, K, l2, IF, E), moved = ray_walk(u, uh, K, l2, IF, E)
            if moved:
                prev_u = prev_gt = None
        if E < opts.divergence_energy:
            raise SolverError(f"divergence: energy {E:.3e} below guard")

    values, neg_flag = _finalize_field(u, g)
    out = Field(g, values)
    if opts.recenter:
        out = recenter_field(out)
    P_final, clamped = fn.pohozaev_flagged(out, a, nl)
    res_free = float(np.sqrt(np.sum(
        dual * np.abs(np.fft.fftn(
            fn.grad_energy_limit(out, a, nl).values)) ** 2) * pw))
    return SolveResult(
        field=out,
        energy=fn.energy_limit(out, a, nl),
        residual=res_t,
        pohozaev=P_final,
        barycenter=mass_barycenter(out),
        iterations=n_iter,
        converged=converged,
        seed_tag=seed_tag,
        iterates=tuple(log),
        diagnostics={
            "free_residual": res_free,
            "negative_mass_flagged": neg_flag,
            "pohozaev_clamped": clamped,
            "critical_growth_waived": waived,
            "constraint": "pohozaev",
        })


def _land_nehari(u: np.ndarray, Varr: np.ndarray, nl: NonlinearitySpec,
                 grid: GridSpec, penalty_ctx=None):
    """Amplitude rescale onto the Nehari set <J'(cu), cu> = 0.

    Closed form for power nonlinearities with inactive penalty; bracketed
    root in general."""
    mult = grid.multiplier()
    pw = grid.parseval_weight
    w = grid.cell_volume
    uh = np.fft.fftn(u)
    K = float(np.sum(mult * np.abs(uh) ** 2) * pw)
    Vl2 = float(np.sum(Varr * u * u) * w)
    quad = K + Vl2
    if quad < 1e-14:
        raise SolverError("seed has no quadratic content")

    def fterm(c):
        cu = c * u
        return float(np.sum(nl.f(cu) * cu) * w)

    def qterm(c):
        if penalty_ctx is None:
            return 0.0
        mask, inv_eps_alpha, p = penalty_ctx
        m_out = float(np.sum((c * u)[mask] ** 2) * w)
        b = m_out * inv_eps_alpha - 1.0
        if b <= 0.0:
            return 0.0
        return (p + 1.0) * inv_eps_alpha * b ** (0.5 * (p - 1.0)) * m_out

    def T(c):
        return c * c * quad - fterm(c) + qterm(c)

    if nl.kind == "power" and penalty_ctx is None:
        S = fterm(1.0)
        if S <= 0:
            raise SolverError(
                "Nehari bracket inactive (no positive part); use a seed "
                "with larger amplitude")
        c = (quad / S) ** (1.0 / (nl.p - 1.0))
    else:
        if nl.kind == "power" and penalty_ctx is not None:
            S = fterm(1.0)
            if S > 0:
                c0 = (quad / S) ** (1.0 / (nl.p - 1.0))
                if qterm(c0) == 0.0:
                    return c0 * u
        c_hi = 1.0
        for _ in range(80):
            if T(c_hi) < 0:
                break
            c_hi *= 2.0
        else:
            raise SolverError(
                "Nehari landing failed: the penalty dominates the "
                "nonlinearity; concentrate the seed inside the well")
        c_lo = c_hi / 2.0
        while c_lo > 1e-12 and T(c_lo) < 0:
            c_lo /= 2.0
        c = brentq(T, c_lo, c_hi, xtol=1e-14, rtol=1e-15)
    if not np.isfinite(c) or c <= 0:
        raise SolverError("Nehari landing failed for this seed")
    return c * u


def _solve_nehari(Varr: np.ndarray, vfloor: float, nl: NonlinearitySpec,
                  grid: GridSpec, opts: SolveOptions, seed: Field,
                  seed_tag: str, penalty_ctx=None, params=None,
                  model=None, eps=None, recenter=True) -> SolveResult:
    """Preconditioned descent with Nehari-set landing after every step.

    The Nehari constraint is natural here: at the constrained minimum the
    full gradient vanishes, so the residual is the plain dual norm of J'.
    """
    g = grid
    mult = g.multiplier()
    pw, w = g.parseval_weight, g.cell_volume
    prec = 1.0 / (mult + vfloor) if opts.precondition else np.ones(g.shape)
    dual = 1.0 / (1.0 + mult)

    def q_value(u):
        if penalty_ctx is None:
            return 0.0
        mask, inv_eps_alpha, p = penalty_ctx
        m_out = float(np.sum(u[mask] ** 2) * w)
        b = m_out * inv_eps_alpha - 1.0
        return b ** (0.5 * (p + 1.0)) if b > 0 else 0.0

    def q_grad(u):
        out = np.zeros(g.shape)
        if penalty_ctx is None:
            return out
        mask, inv_eps_alpha, p = penalty_ctx
        m_out = float(np.sum(u[mask] ** 2) * w)
        b = m_out * inv_eps_alpha - 1.0
        if b > 0:
            out[mask] = (p + 1.0) * inv_eps_alpha * b ** (0.5 * (p - 1.0)) \
                * u[mask]
        return out

    def energy(u, uh):
        K = float(np.sum(mult * np.abs(uh) ** 2) * pw)
        Vl2 = float(np.sum(Varr * u * u) * w)
        IF = float(np.sum(nl.F(u)) * w)
        return 0.5 * K + 0.5 * Vl2 - IF + q_value(u)

    u = _land_nehari(seed.values, Varr, nl, g, penalty_ctx)
    uh = np.fft.fftn(u)
    E = energy(u, uh)
    log = []
    prev_u = prev_gr = None
    beta = opts.step_size
    converged = False
    res = np.inf
    n_iter = 0

    for n_iter in range(1, opts.max_iters + 1):
        lap = np.fft.ifftn(mult * uh).real
        grad = lap + Varr * u - nl.f(u) + q_grad(u)
        gh = np.fft.fftn(grad)
        res = float(np.sqrt(np.sum(dual * np.abs(gh) ** 2) * pw))
        log.append((n_iter - 1, E, res, 0.0, q_value(u), beta))
        if res <= opts.tol_residual:
            converged = True
            break
        d = -np.fft.ifftn(prec * gh).real
        dec = float(np.sum(prec * np.abs(gh) ** 2) * pw)
        gr = grad

        if opts.step_rule == "backtracking" and prev_u is not None:
            du = u - prev_u
            dg = gr - prev_gr
            denom_bb = float(np.sum(du * dg) * w)
            if denom_bb > 1e-300:
                beta = float(np.sum(du * du) * w) / denom_bb
            beta = float(np.clip(beta, *opts.step_clip))
        elif opts.step_rule == "fixed":
            beta = opts.step_size
        prev_u, prev_gr = u, gr

        accepted = False
        bt = beta
        for _ in range(opts.max_backtracks + 1):
            try:
                v = _land_nehari(u + bt * d, Varr, nl, g, penalty_ctx)
            except SolverError:
                bt *= opts.backtrack_factor
                continue
            vh = np.fft.fftn(v)
            Ev = energy(v, vh)
            if Ev <= E - opts.armijo * bt * dec:
                u, uh, E = v, vh, Ev
                accepted = True
                beta = bt
                break
            bt *= opts.backtrack_factor
            if opts.step_rule == "fixed":
                break
        if not accepted:
            raise SolverError(
                f"stagnation: no Armijo step found at iterate {n_iter} "
                f"(residual {res:.3e})")
        if E < opts.divergence_energy:
            raise SolverError(f"divergence: energy {E:.3e} below guard")

    values, neg_flag = _finalize_field(u, g)
    out = Field(g, values)
    if recenter and opts.recenter:
        out = recenter_field(out)
    diag = {"negative_mass_flagged": neg_flag, "constraint": "nehari"}
    if penalty_ctx is None and model is not None and eps is None:
        breakdown = fn.energy_limit(out, vfloor, nl)
    elif model is not None and params is not None and eps is not None:
        breakdown = fn.energy_penalized(out, eps, params, model)
        diag["eps"] = eps
        diag["penalty_value"] = breakdown.penalty
        diag["penalty_exactly_zero"] = breakdown.penalty == 0.0
    else:
        breakdown = fn.energy_limit(out, vfloor, nl)
    return SolveResult(
        field=out,
        energy=breakdown,
        residual=res,
        pohozaev=0.0,
        barycenter=mass_barycenter(out),
        iterations=n_iter,
        converged=converged,
        seed_tag=seed_tag,
        iterates=tuple(log),
        diagnostics=diag)


def solve_ground_state(a: float, model: ModelSpec, opts: SolveOptions,
                       seed: Field, seed_tag: str = "seed") -> SolveResult:
    """Ground state of the limit energy L_a on the model's grid.

    For N > 2s: alternating exact Pohozaev rescale and tangential descent.
    For N <= 2s: Nehari-set descent (P_a is undefined there; the result's
    pohozaev field is reported as 0).
    """
    if a <= 0:
        raise SolverError(f"mass constant must be positive, got {a}")
    g = model.grid
    if seed.grid != g:
        raise SolverError("seed grid does not match the model grid")
    if not np.any(seed.values > 0):
        raise SolverError("seed needs a positive part; increase amplitude")
    nl = model.nonlinearity
    waived = _check_limit_model(nl, a, g, opts)
    if g.N > 2 * g.s:
        return _solve_pohozaev(a, nl, g, opts, seed, seed_tag, waived)
    Varr = np.full(g.shape, a)
    return _solve_nehari(Varr, a, nl, g, opts, seed, seed_tag, model=model)


@dataclass(frozen=True)
class SolutionDictionary:
    """Ground states sampled over a in [m0, m0 + nu0], with tube constants.

    r_star is the least Gagliardo-convention H^s norm over entries; R0 is
    the smallest grid radius with restricted_norm(U, outside B_R0) < r*/8
    for every entry.
    """
    entries: tuple
    r_star: float
    R0: float

    def __post_init__(self):
        if not self.entries:
            raise SolverError("dictionary needs at least one entry")
        if any(not res.converged for _, res in self.entries):
            raise SolverError("dictionary entries must all be converged")
        if not (self.r_star > 0 and np.isfinite(self.R0) and self.R0 > 0):
            raise SolverError("dictionary constants must be positive finite")

    @property
    def profiles(self) -> list:
        return [res.field for _, res in self.entries]

    @property
    def grid(self) -> GridSpec:
        return self.entries[0][1].field.grid


def _entry_hs_norm(u: Field) -> float:
    if u.grid.s >= 1.0:
        return sp.hs_norm(u)
    return sp.hs_norm_gagliardo(u)


def fit_tail_radius(profiles, r_star: float, fraction: float = 0.125) -> float:
    """Smallest grid radius R with ||U||_(outside B_R) < fraction * r* for
    every profile, by doubling then bisection on the radius lattice."""
    from .grid import ball
    g = profiles[0].grid
    origin = (0.0,) * g.N

    def tail_ok(R):
        for U in profiles:
            outside = ball(g, origin, R).complement()
            if sp.restricted_norm(U, outside) >= fraction * r_star:
                return False
        return True

    lo, hi = g.h, None
    R = 2.0 * g.h
    while R < 0.95 * g.L:
        if tail_ok(R):
            hi = R
            break
        lo = R
        R *= 2.0
    if hi is None:
        raise SolverError(
            "no radius inside the box bounds the dictionary tails; "
            "enlarge L")
    while hi - lo > g.h:
        mid = 0.5 * (lo + hi)
        if tail_ok(mid):
            hi = mid
        else:
            lo = mid
    return float(hi)


def build_dictionary(model: ModelSpec, nu0: float, n_samples: int,
                     opts: SolveOptions, seed: Field | None = None) -> SolutionDictionary:
    """Solve the limit problem at a = m0 + j*nu0/(n_samples-1), j < n_samples.

    n_samples = 1 with nu0 = 0 degenerates to the single ground state at m0.
    Every sample must converge. Entries are recentered; r* and R0 fitted.
    """
    if n_samples < 1:
        raise SolverError("n_samples must be >= 1")
    if nu0 < 0:
        raise SolverError("nu0 must be nonnegative")
    if n_samples == 1 and nu0 != 0.0:
        raise SolverError("n_samples = 1 requires nu0 = 0")
    m0 = model.mass
    if seed is None:
        seed = gaussian_seed(model.grid)
    levels = [m0 + (j * nu0 / (n_samples - 1) if n_samples > 1 else 0.0)
              for j in range(n_samples)]
    entries = []
    for a in levels:
        res = solve_ground_state(a, model, opts, seed, seed_tag=f"a={a:.6g}")
        if not res.converged:
            raise SolverError(f"dictionary sample a={a:.6g} did not converge")
        entries.append((a, res))
        seed = res.field
    r_star = min(_entry_hs_norm(res.field) for _, res in entries)
    R0 = fit_tail_radius([res.field for _, res in entries], r_star)
    return SolutionDictionary(entries=tuple(entries), r_star=r_star, R0=R0)


def solve_penalized(eps: float, seed: Field, model: ModelSpec,
                    params: fn.ProofParams, opts: SolveOptions,
                    seed_tag: str = "seed") -> SolveResult:
    """Minimize the penalized energy J_eps on its Nehari set.

    Result fields are never recentered: the concentration location is the
    observable. Reports the final penalty value and whether it is exactly 0.
    A potential-free model has an empty penalty region, so the solve
    degenerates to the limit energy at the model mass.
    """
    if eps <= 0:
        raise SolverError(f"eps must be positive, got {eps}")
    if seed.grid != model.grid:
        raise SolverError("seed grid does not match the model grid")
    params.validate_for(model.grid.s)
    if model.potential is None:
        res = _solve_nehari(np.full(model.grid.shape, model.mass),
                            model.mass, model.nonlinearity, model.grid,
                            opts, seed, seed_tag, model=model,
                            recenter=False)
        res.diagnostics.update(eps=eps, penalty_value=0.0,
                               penalty_exactly_zero=True)
        return res
    region = fn.penalty_region(eps, params, model)
    Varr = np.asarray(fn._scaled_potential(model, eps))
    vfloor = float(np.min(Varr))
    penalty_ctx = (region.mask, eps ** (-params.alpha), model.nonlinearity.p)
    return _solve_nehari(Varr, vfloor, model.nonlinearity, model.grid, opts,
                         seed, seed_tag, penalty_ctx=penalty_ctx,
                         params=params, model=model, eps=eps, recenter=False)


def multistart(eps: float, seeds, model: ModelSpec, params: fn.ProofParams,
               opts: SolveOptions, tags=None, jobs: int = 1) -> list:
    """Independent penalized solves, one per seed, results in input order.

    Failures become SolveFailure records in place; the run continues.
    Identical seeds give bit-identical results.
    """
    seeds = list(seeds)
    if tags is None:
        tags = [f"seed-{i}" for i in range(len(seeds))]
    tags = list(tags)
    if len(tags) != len(seeds):
        raise SolverError("tags must align with seeds")

    def run(seed, tag):
        try:
            return solve_penalized(eps, seed, model, params, opts,
                                   seed_tag=tag)
        except (SolverError, fn.FunctionalError) as exc:
            return SolveFailure(seed_tag=tag, error=str(exc))

    if jobs > 1 and len(seeds) > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(run, sd, tg)
                       for sd, tg in zip(seeds, tags)]
            return [f.result() for f in futures]
    return [run(sd, tg) for sd, tg in zip(seeds, tags)]


def continuation(eps_schedule, model: ModelSpec, params: fn.ProofParams,
                 opts: SolveOptions, seed: Field) -> list:
    """Solve along a strictly decreasing eps schedule, re-seeding each step
    with the previous solution mapped into the new eps-frame.

    A diverging step truncates the list with a warning in the last result's
    diagnostics.
    """
    schedule = [float(e) for e in eps_schedule]
    if not schedule:
        raise SolverError("empty continuation schedule")
    if any(e <= 0 for e in schedule) or \
            any(b >= a for a, b in zip(schedule, schedule[1:])):
        raise SolverError("schedule must be strictly decreasing and positive")
    results = []
    current = seed
    prev_eps = None
    for eps in schedule:
        if prev_eps is not None:
            current = sp.dilate(current, eps / prev_eps)
        try:
            res = solve_penalized(eps, current, model, params, opts,
                                  seed_tag=f"eps={eps:.6g}")
        except SolverError as exc:
            if results:
                last = results[-1]
                last.diagnostics["continuation_truncated"] = \
                    f"eps={eps:.6g}: {exc}"
            else:
                raise
            break
        results.append(res)
        current = res.field
        prev_eps = eps
    return results


def estimate_least_energy(a: float, model: ModelSpec, opts: SolveOptions,
                          seeds) -> tuple[float, SolveResult]:
    """Best converged L_a value over a multistart of limit solves."""
    best = None
    for i, seed in enumerate(seeds):
        try:
            res = solve_ground_state(a, model, opts, seed,
                                     seed_tag=f"ls-{i}")
        except SolverError:
            continue
        if res.converged and (best is None or
                              res.energy.total < best.energy.total):
            best = res
    if best is None:
        raise SolverError(f"no converged solve at a = {a}")
    return best.energy.total, best
