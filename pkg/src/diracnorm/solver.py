"""Outer minimization on the L2 sphere, solution extraction and sweeps.

The reduced functional is minimized over plus fields of prescribed L2 mass by
projected descent: step along the negative sphere-tangent gradient in the
e-metric, retract back to the sphere by renormalization, accept steps under an
Armijo decrease test.  A converged sphere point v* yields the solution pair
(omega, u) with u the fiber maximizer at v* and omega its multiplier quotient.

Additional drivers: a warm-started mass sweep tracing the branch omega(a) down
to small mass (the bifurcation signature omega -> m, |u|_{H^{1/2}} -> 0), and
a deflated multi-start search that penalizes already-found sphere points to
reach further critical points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .nonlinearity import NonlinearModel
from .reduction import (
    ReducedState,
    SmallnessError,
    evaluate_reduced,
    kappa,
    minus_ball_radius,
    pde_residual,
    sample_concavity,
    tangent_project,
)
from .spectral_core import (
    DiracSpace,
    SpinorField,
    e_norm,
    gaussian_spinor,
    h_half_norm,
    in_plus_cone,
    l2_norm,
    normalized,
    random_field,
    riesz_plus,
    split,
)


class DescentStallError(RuntimeError):
    """Armijo backtracking failed repeatedly; carries the last record."""

    def __init__(self, message: str, record: "SolutionRecord"):
        super().__init__(message)
        self.record = record


@dataclass(frozen=True)
class SolverOptions:
    """Knobs of the outer/inner solves.  a_max=None calibrates at first use.

    tol_grad is relative to the mass a.  The practical floor of a monotone
    line search sits near sqrt(eps * J) ~ 1.5e-8 * a in double precision, so
    tolerances below ~2e-8 cannot be certified by descent.
    """

    tol_grad: float = 5e-8
    tol_inner: float = 1e-9
    max_outer: int = 2000
    max_inner: int = 500
    step_init: float = 1.0
    armijo_c: float = 1e-4
    a_max: float | None = 0.25
    deflation_strength: float = 1e-6
    seed: int = 20240

    def __post_init__(self) -> None:
        for name in ("tol_grad", "tol_inner", "step_init"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        for name in ("max_outer", "max_inner"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not (0.0 < self.armijo_c < 1.0):
            raise ValueError("armijo_c must lie in (0, 1)")
        if self.a_max is not None and not self.a_max > 0:
            raise ValueError("a_max must be positive when given")
        if self.deflation_strength < 0:
            raise ValueError("deflation_strength must be nonnegative")


@dataclass
class SolutionRecord:
    """Converged (or diagnosed) normalized-solution data for persistence."""

    a: float
    omega: float
    u: SpinorField = field(repr=False)
    j_level: float
    residual_l2: float
    u_l2: float
    u_hhalf: float
    in_x_a: bool
    iterations: int
    model_tag: str
    converged: bool
    grad_norm: float
    e_norm_u: float
    omega_gap_const: float | None = None
    v_star: SpinorField | None = field(default=None, repr=False)
    w_star: SpinorField | None = field(default=None, repr=False)
    history: list[float] = field(default_factory=list, repr=False)
    stall_reason: str | None = None

    @property
    def residual_rel(self) -> float:
        return self.residual_l2 / self.u_l2 if self.u_l2 > 0 else math.inf


def retract_to_sphere(x: SpinorField, a: float) -> SpinorField:
    return x * (a / l2_norm(x))


def default_initial_guess(
    space: DiracSpace, model: NonlinearModel, a: float, width: float = 2.0
) -> SpinorField:
    """Plus projection of a Gaussian envelope at the cone center, mass a."""
    g = gaussian_spinor(space, model.cone_center, width)
    v = split(g).plus
    return normalized(v, a)


def calibrate_a_max(
    model: NonlinearModel,
    space: DiracSpace,
    seed: int = 20240,
    hi: float = 0.5,
    probes: int = 4,
    margin: float = -0.125,
    rounds: int = 12,
) -> float:
    """Largest validated mass: bisect on the sampled inner concavity margin.

    A mass passes when second differences of the fiber energy along random
    minus directions stay below ``margin`` (in units of e_norm^2) at random
    interior points.  Deterministic for a fixed seed.
    """

    def _ok(a: float) -> bool:
        rng = np.random.default_rng(seed)
        for _ in range(probes):
            v = random_field(space, rng, bandwidth=1.0, part="plus", target_l2=a)
            if not in_plus_cone(v):
                continue
            radius = minus_ball_radius(space, a)
            w = random_field(space, rng, bandwidth=1.0, part="minus")
            w = w * (0.5 * radius / e_norm(w))
            z = random_field(space, rng, bandwidth=1.0, part="minus")
            if sample_concavity(model, v, w, z) > margin:
                return False
        return True

    lo = 0.0
    if _ok(hi):
        return hi
    for _ in range(rounds):
        mid = 0.5 * (lo + hi)
        if _ok(mid):
            lo = mid
        else:
            hi = mid
    if lo == 0.0:
        raise SmallnessError("no mass passed the concavity calibration")
    return lo


def _deflation_penalty(v: SpinorField, centers: list[SpinorField], strength: float) -> float:
    pen = 0.0
    for c in centers:
        d2 = l2_norm(v - c) ** 2
        pen += strength / max(d2, 1e-300)
    return pen


def _deflation_gradient_raw(
    v: SpinorField, centers: list[SpinorField], strength: float
) -> SpinorField | None:
    if not centers:
        return None
    out = None
    for c in centers:
        diff = v - c
        d2 = l2_norm(diff) ** 2
        term = (-2.0 * strength / max(d2, 1e-300) ** 2) * riesz_plus(diff)
        out = term if out is None else out + term
    return out


def _objective(state: ReducedState, centers, strength) -> float:
    if not centers:
        return state.j_val
    return state.j_val + _deflation_penalty(state.v, centers, strength)


def _search_direction(state: ReducedState, centers, strength) -> SpinorField:
    grad = state.grad_tangent
    extra = _deflation_gradient_raw(state.v, centers, strength)
    if extra is not None:
        grad = grad + tangent_project(state.v, extra)
    return grad


def _spectral_scale(space: DiracSpace, kappa_val: float) -> np.ndarray:
    """Per-mode inverse of the leading reduced curvature in the e-metric.

    Near a minimizer the reduced Hessian acts per mode roughly like
    (lambda(xi) - omega) / lambda(xi); its inverse (with the spectral gap
    floored away from zero) restores uniform curvature across frequencies and
    is symmetric positive, so scaled gradients remain descent directions.
    """
    m = space.mass
    gap = max(m - kappa_val, 0.01 * m)
    return space.lam / ((space.lam - m) + gap)


def _e_inner_hat(space: DiracSpace, a_hat, b_hat) -> float:
    pair = np.sum(a_hat * np.conj(b_hat), axis=0)
    return space.grid.cell_volume * float(np.real(np.sum(space.lam * pair)))


class _QuasiNewton:
    """Limited-memory inverse-Hessian model in the e-metric.

    Two-loop recursion seeded with the diagonal spectral scale; curvature
    pairs from accepted steps are kept while their e-metric pairing stays
    safely positive.  Handles the handful of near-flat directions (phase and
    spin rotations of the minimizer) that no diagonal scaling can separate.
    """

    def __init__(self, space: DiracSpace, memory: int = 10):
        self.space = space
        self.memory = memory
        self.pairs: list[tuple[np.ndarray, np.ndarray, float]] = []

    def push(self, s_hat, y_hat) -> None:
        curv = _e_inner_hat(self.space, s_hat, y_hat)
        s_n = np.sqrt(max(_e_inner_hat(self.space, s_hat, s_hat), 0.0))
        y_n = np.sqrt(max(_e_inner_hat(self.space, y_hat, y_hat), 0.0))
        if curv > 1e-10 * s_n * y_n:
            self.pairs.append((s_hat, y_hat, 1.0 / curv))
            if len(self.pairs) > self.memory:
                self.pairs.pop(0)

    def reset(self) -> None:
        self.pairs.clear()

    def direction(self, state: ReducedState, grad: SpinorField) -> SpinorField:
        q = grad.hat.copy()
        alphas: list[float] = []
        for s_hat, y_hat, rho in reversed(self.pairs):
            alpha = rho * _e_inner_hat(self.space, s_hat, q)
            q -= alpha * y_hat
            alphas.append(alpha)
        q *= _spectral_scale(self.space, state.kappa_val)
        for (s_hat, y_hat, rho), alpha in zip(self.pairs, reversed(alphas)):
            beta = rho * _e_inner_hat(self.space, y_hat, q)
            q += (alpha - beta) * s_hat
        d = SpinorField.from_hat(self.space, q)
        return tangent_project(state.v, d)


def _build_record(
    model: NonlinearModel,
    state: ReducedState,
    opts: SolverOptions,
    iterations: int,
    grad_converged: bool,
    history: list[float],
    stall_reason: str | None = None,
) -> SolutionRecord:
    space = state.v.space
    m = space.mass
    a = state.a
    u = state.g
    omega = kappa(model, u)
    residual = l2_norm(pde_residual(model, u))
    u_l2 = l2_norm(u)
    grad_norm = e_norm(state.grad_tangent)
    p = model.p
    cap = (m + a ** ((p - 2.0) / 2.0)) * a * a
    in_x_a = e_norm(state.v) ** 2 <= cap * (1.0 + 1e-12)
    half_level = 0.5 * m * a * a
    residual_ok = residual <= 100.0 * opts.tol_grad * a
    if model.kind == "null":
        # exact linear eigenmodes sit at omega = m, j = m a^2 / 2
        omega_ok = omega <= m * (1.0 + 1e-9)
        level_ok = state.j_val <= half_level * (1.0 + 1e-9)
    else:
        omega_ok = omega < m
        level_ok = state.j_val < half_level
    converged = grad_converged and residual_ok and omega_ok and level_ok and in_x_a
    gap_const = None
    if model.kind != "null" and omega < m:
        gap_const = (m - omega) / a ** (p - 2.0)
    return SolutionRecord(
        a=a,
        omega=omega,
        u=u,
        j_level=state.j_val,
        residual_l2=residual,
        u_l2=u_l2,
        u_hhalf=h_half_norm(u),
        in_x_a=in_x_a,
        iterations=iterations,
        model_tag=model.tag,
        converged=converged,
        grad_norm=grad_norm,
        e_norm_u=e_norm(u),
        omega_gap_const=gap_const,
        v_star=state.v,
        w_star=state.w,
        history=history,
        stall_reason=stall_reason,
    )


def minimize_on_sphere(
    model: NonlinearModel,
    a: float,
    v0: SpinorField,
    opts: SolverOptions,
    deflation_centers: list[SpinorField] | None = None,
) -> SolutionRecord:
    """Projected descent of the reduced functional on the mass-a sphere.

    The objective decreases monotonically (Armijo); each accepted step is
    retracted exactly back to the sphere.  Once the level drops below
    m a^2 / 2 the e-norm cap (m + a^((p-2)/2)) a^2 is asserted on every later
    iterate; violation signals a mass outside the small regime.
    """
    space = v0.space
    m = space.mass
    a_max = opts.a_max
    if a_max is None:
        a_max = calibrate_a_max(model, space, seed=opts.seed)
    if a > a_max:
        raise SmallnessError(f"a={a:g} exceeds the validated threshold a_max={a_max:g}")
    nv = l2_norm(v0)
    if abs(nv - a) > 1e-6 * a:
        raise ValueError(f"v0 must lie on the mass sphere: l2_norm(v0)={nv:g}, a={a:g}")
    v = v0 * (a / nv)
    if not in_plus_cone(v):
        raise ValueError("v0 leaves the admissible cone e_norm < sqrt(m+1) l2_norm")
    centers = deflation_centers or []
    strength = opts.deflation_strength
    tol_inner_abs = opts.tol_inner * a
    half_level = 0.5 * m * a * a
    p = model.p
    cap = (m + a ** ((p - 2.0) / 2.0)) * a * a

    state = evaluate_reduced(
        model, v, tol=tol_inner_abs, max_iter=opts.max_inner, need_gradient=True
    )
    obj = _objective(state, centers, strength)
    history = [state.j_val]
    step = opts.step_init
    below_half = state.j_val < half_level
    grad_converged = False
    iterations = 0
    stall = None

    from .reduction import attach_gradient
    from .spectral_core import e_inner

    qn = _QuasiNewton(space)
    grad = _search_direction(state, centers, strength)
    stagnant = 0
    for iterations in range(1, opts.max_outer + 1):
        gnorm = e_norm(grad)
        if gnorm <= opts.tol_grad * a:
            grad_converged = True
            iterations -= 1
            break
        direction = qn.direction(state, grad)
        slope = e_inner(direction, grad)
        if not slope > 0:
            qn.reset()
            direction = qn.direction(state, grad)
            slope = e_inner(direction, grad)
        # the accepted decrease also certifies the plain-gradient Armijo law
        threshold = max(slope, gnorm * gnorm)
        accepted = False
        state_try = None
        for backtrack in range(30):
            if backtrack == 8 and qn.pairs:
                # curvature model mistrusted far from a minimizer
                qn.reset()
                direction = qn.direction(state, grad)
                slope = e_inner(direction, grad)
                threshold = max(slope, gnorm * gnorm)
                step = 1.0
            v_try = retract_to_sphere(v - step * direction, a)
            if not in_plus_cone(v_try):
                step *= 0.5
                continue
            state_try = evaluate_reduced(
                model,
                v_try,
                tol=tol_inner_abs,
                w0=state.w,
                max_iter=opts.max_inner,
                need_gradient=False,
            )
            obj_try = _objective(state_try, centers, strength)
            if obj_try <= obj - opts.armijo_c * step * threshold:
                accepted = True
                break
            step *= 0.5
        if not accepted or step < 1e-13:
            stall = f"line search made no certifiable progress at step {step:.3e}"
            break
        # decreases at rounding level cannot be distinguished from noise;
        # a run of them means the tolerance sits below the certifiable floor
        if obj - _objective(state_try, centers, strength) < 1e-15 * max(abs(obj), 1e-6):
            stagnant += 1
            if stagnant >= 10:
                stall = (
                    f"objective decreases stayed at rounding level for {stagnant} "
                    f"steps (gradient norm {gnorm:.3e}, tol {opts.tol_grad * a:.3e})"
                )
                break
        else:
            stagnant = 0
        state_new = attach_gradient(model, state_try)
        grad_new = _search_direction(state_new, centers, strength)
        qn.push(
            state_new.v.hat - v.hat,
            grad_new.hat - grad.hat,
        )
        v, state, grad = state_new.v, state_new, grad_new
        obj = _objective(state, centers, strength)
        history.append(state.j_val)
        if state.j_val < half_level:
            below_half = True
        if below_half and e_norm(v) ** 2 > cap * (1.0 + 1e-9):
            raise SmallnessError(
                f"iterate left the admissible norm cap: e_norm(v)^2={e_norm(v)**2:.6e} "
                f"> {cap:.6e}; a={a:g} is too large"
            )
        step = min(step * 2.0, 4.0)
    record = _build_record(
        model, state, opts, iterations, grad_converged, history, stall_reason=stall
    )
    if stall is not None:
        raise DescentStallError(stall, record)
    return record


def extract_solution(
    model: NonlinearModel, v_star: SpinorField, opts: SolverOptions
) -> SolutionRecord:
    """Assemble the solution pair and diagnostics from a converged sphere point."""
    a = l2_norm(v_star)
    state = evaluate_reduced(
        model, v_star, tol=opts.tol_inner * a, max_iter=opts.max_inner, need_gradient=True
    )
    grad_converged = e_norm(state.grad_tangent) <= opts.tol_grad * a
    return _build_record(model, state, opts, 0, grad_converged, [state.j_val])


@dataclass
class SweepResult:
    """Branch trace omega(a) with the small-mass fit of the gap m - omega."""

    records: list[SolutionRecord]
    slope: float | None
    gap_constant: float | None
    fit_valid: bool
    hhalf_decreasing: bool
    omega_nonincreasing_in_a: bool


def bifurcation_sweep(
    model: NonlinearModel,
    a_values: list[float],
    opts: SolverOptions,
    space: DiracSpace,
    v0: SpinorField | None = None,
) -> SweepResult:
    """Warm-started solves along a strictly decreasing mass ladder.

    Fits log(m - omega) against log(a) over the converged rows; the slope
    tracks p - 2 for small mass.  Rows that fail to converge invalidate the
    fit and are kept with converged=False.
    """
    if len(a_values) == 0:
        raise ValueError("a_values must be nonempty")
    if any(b >= a for a, b in zip(a_values, a_values[1:])):
        raise ValueError("a_values must be strictly decreasing")
    m = space.mass
    records: list[SolutionRecord] = []
    v_prev: SpinorField | None = None
    for a in a_values:
        if v_prev is None:
            v_start = v0 if v0 is not None else default_initial_guess(space, model, a)
            v_start = normalized(v_start, a)
        else:
            v_start = normalized(v_prev, a)
        try:
            rec = minimize_on_sphere(model, a, v_start, opts)
        except DescentStallError as err:
            rec = err.record
        records.append(rec)
        if rec.v_star is not None:
            v_prev = rec.v_star
    fit_valid = all(r.converged for r in records)
    slope = None
    gap_constant = None
    gaps = [(r.a, m - r.omega) for r in records if r.converged and m - r.omega > 0]
    if fit_valid and len(gaps) >= 2 and len(gaps) == len(records):
        logs_a = np.log([g[0] for g in gaps])
        logs_gap = np.log([g[1] for g in gaps])
        slope_fit, intercept = np.polyfit(logs_a, logs_gap, 1)
        slope = float(slope_fit)
        gap_constant = float(np.exp(intercept))
    else:
        fit_valid = False
    hh = [r.u_hhalf for r in records]
    hhalf_decreasing = all(b < a for a, b in zip(hh, hh[1:]))
    om = [r.omega for r in records]
    omega_nonincreasing_in_a = all(b >= a - 1e-12 for a, b in zip(om, om[1:]))
    return SweepResult(records, slope, gap_constant, fit_valid, hhalf_decreasing,
                       omega_nonincreasing_in_a)


@dataclass
class MultiResult:
    """Outcome of the deflated multi-start search."""

    records: list[SolutionRecord]
    all_records: list[SolutionRecord]
    families: list[list[int]]
    distance_matrix: np.ndarray
    family_matrix: np.ndarray
    requested: int


def _family_groups(records: list[SolutionRecord], m: float, a: float) -> list[list[int]]:
    """Group records sharing multiplier and level within solver accuracy.

    Solutions related by phase or internal spinor rotations share (omega, J)
    exactly; distance alone would overcount such orbits as distinct.
    """
    omega_tol = 1e-6 * max(m, 1.0)
    level_tol = 1e-6 * max(0.5 * m * a * a, 1e-300)
    groups: list[list[int]] = []
    for i, rec in enumerate(records):
        placed = False
        for grp in groups:
            ref = records[grp[0]]
            if (
                abs(rec.omega - ref.omega) <= omega_tol
                and abs(rec.j_level - ref.j_level) <= level_tol
            ):
                grp.append(i)
                placed = True
                break
        if not placed:
            groups.append([i])
    return groups


def multi_start_deflated(
    model: NonlinearModel,
    a: float,
    k: int,
    opts: SolverOptions,
    space: DiracSpace,
    extra_random_starts: int = 2,
) -> MultiResult:
    """Search for several distinct normalized solutions at one mass.

    Starts from plus-projected scaled-envelope basis fields (symmetric and
    antisymmetric profiles) plus random smooth starts; after each converged
    solve, later runs add the repulsive penalty strength/|v - v_i|_2^2 around
    every found sphere point.  Every candidate is re-verified with the
    penalty removed before being reported.  Fewer-than-requested outcomes are
    reported, not raised.
    """
    from .subspaces import HermiteBasis, scaled_envelope_field

    if k <= 0:
        raise ValueError("k must be positive")
    basis = HermiteBasis.first(k)
    envelope_scale = max(2.0, space.grid.box_length / 8.0)
    starts: list[SpinorField] = []
    for i in range(k):
        coeffs = np.zeros(k)
        coeffs[i] = 1.0
        u = scaled_envelope_field(space, envelope_scale, basis, coeffs)
        starts.append(normalized(split(u).plus, a))
    rng = np.random.default_rng(opts.seed)
    for _ in range(extra_random_starts):
        starts.append(random_field(space, rng, bandwidth=1.0, part="plus", target_l2=a))

    import dataclasses as _dc

    # deflated runs only need to leave known basins; the undeflated polish
    # afterwards carries the full budget
    opts_deflated = _dc.replace(opts, max_outer=min(300, opts.max_outer))
    centers: list[SpinorField] = []
    all_records: list[SolutionRecord] = []
    verified: list[SolutionRecord] = []
    for v0 in starts:
        try:
            rec = minimize_on_sphere(
                model, a, v0, opts_deflated if centers else opts,
                deflation_centers=centers or None,
            )
        except DescentStallError as err:
            rec = err.record
        except SmallnessError:
            raise
        all_records.append(rec)
        if rec.v_star is None:
            continue
        # re-verify without the penalty
        ver = extract_solution(model, rec.v_star, opts)
        if not ver.converged:
            try:
                ver = minimize_on_sphere(model, a, rec.v_star, opts)
            except DescentStallError:
                continue
        if ver.converged:
            verified.append(ver)
            centers.append(ver.v_star)

    # drop near-duplicates (same sphere point reached twice)
    kept: list[SolutionRecord] = []
    for rec in verified:
        dup = any(
            l2_norm(rec.u - other.u) <= 1e-3 * a for other in kept
        )
        if not dup:
            kept.append(rec)
    families = _family_groups(kept, space.mass, a)
    reps = [grp[0] for grp in families]
    records = [kept[i] for i in reps]
    n = len(kept)
    dist = np.zeros((n, n))
    fam = np.zeros((n, n), dtype=bool)
    for i in range(n):
        for j in range(i + 1, n):
            d = l2_norm(kept[i].u - kept[j].u)
            dist[i, j] = dist[j, i] = d
    for grp in families:
        for i in grp:
            for j in grp:
                fam[i, j] = True
    return MultiResult(records, all_records, families, dist, fam, k)
