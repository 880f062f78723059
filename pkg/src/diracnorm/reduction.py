"""Saddle-point reduction of the indefinite Dirac energy.

The energy I(u) = e_norm(u_plus)^2/2 - e_norm(u_minus)^2/2 - psi(u) is
unbounded in both spectral directions.  On the fiber of fields with a
prescribed L2 mass whose plus part is parallel to a given plus field v, the
energy is strictly concave in the minus part once the mass is small, so the
minus part can be maximized out.  The maximizer w(v) defines

    reduce(v)        = h_map(v, w(v))            (the fiber maximizer field)
    reduced_value(v) = energy(reduce(v))         (the functional descended on)

and a multiplier quotient kappa such that the residual operator

    residual(u) = H0 u - f(x,|u|) u - kappa(u) u

annihilates every minus test direction at w(v) and the v direction itself.
The sphere-tangent representative of the derivative of the reduced value is
assembled from that residual; driving it to zero yields a normalized solution
pair (omega, u) with omega = kappa(u).

The fiber map is h_map(v, w) = sqrt(a^2 - |w|_L2^2) v / a + w with
a = l2_norm(v); its domain requires e_norm(w) <= sqrt(m) a / 2, which by the
norm domination e_norm^2 >= m l2^2 forces l2_norm(w) <= a / 2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .nonlinearity import NonlinearModel, psi, psi_gradient
from .spectral_core import (
    DiracSpace,
    SpinorField,
    apply_h0,
    e_norm,
    l2_inner,
    l2_norm,
    riesz_minus,
    riesz_plus,
    split,
)

#: Fractional shrink applied to the nominal minus-ball radius before
#: projecting an overshooting iterate back inside.
_BALL_GUARD = 1e-8


class DomainError(ValueError):
    """A (v, w) pair left the admissible fiber domain."""


class InnerConvergenceError(RuntimeError):
    """The concave inner maximization did not reach tolerance."""


class SmallnessError(RuntimeError):
    """The prescribed mass is outside the validated smallness regime."""


def minus_ball_radius(space: DiracSpace, a: float) -> float:
    """Nominal e-norm radius of the admissible minus ball for mass a."""
    return 0.5 * np.sqrt(space.mass) * a


def h_map(v: SpinorField, w: SpinorField) -> SpinorField:
    """Fiber chart: mass-preserving combination of a plus field and a minus field.

    Returns sqrt(a^2 - |w|_2^2) v / a + w, which has the same L2 norm as v,
    plus part parallel to v and minus part equal to w.
    """
    a = l2_norm(v)
    if a == 0.0:
        raise DomainError("h_map needs a nonzero plus field")
    wn = e_norm(w)
    radius = minus_ball_radius(v.space, a)
    if wn > radius * (1.0 + 1e-9):
        raise DomainError(
            f"minus field outside the admissible ball: e_norm(w)={wn:.6e} > "
            f"sqrt(m) a / 2 = {radius:.6e} (a={a:.6e})"
        )
    wl2 = l2_norm(w)
    coeff = np.sqrt(max(a * a - wl2 * wl2, 0.0)) / a
    return coeff * v + w


def energy(model: NonlinearModel, u: SpinorField) -> float:
    """Indefinite energy: split-norm difference minus the potential term."""
    parts = split(u)
    return 0.5 * e_norm(parts.plus) ** 2 - 0.5 * e_norm(parts.minus) ** 2 - psi(model, u)


class _Fiber:
    """Cached quantities of the plus field v reused across inner iterations."""

    def __init__(self, model: NonlinearModel, v: SpinorField):
        self.model = model
        self.v = v
        self.space = v.space
        self.a = l2_norm(v)
        if self.a == 0.0:
            raise DomainError("fiber base field must be nonzero")
        self.env2 = e_norm(v) ** 2
        self.radius = minus_ball_radius(self.space, self.a)
        # exact per-mode curvature of the quadratic part of the inner problem,
        # used as a diagonal preconditioner in the e-metric
        self.precond = 1.0 / (1.0 + (self.env2 / self.a**2) / self.space.lam)

    def parts(self, w: SpinorField) -> tuple[float, SpinorField]:
        wl2 = l2_norm(w)
        c = np.sqrt(max(self.a**2 - wl2 * wl2, 0.0)) / self.a
        return c, c * self.v + w

    def value(self, w: SpinorField) -> float:
        c, u = self.parts(w)
        return 0.5 * c * c * self.env2 - 0.5 * e_norm(w) ** 2 - psi(self.model, u)

    def gradient(self, w: SpinorField):
        """E-metric ascent direction of the inner value at w.

        The derivative along a minus direction z is
            -e_inner(w, z) - l2_inner(f(|u|) u, z) - kappa l2_inner(w, z)
        with u = h_map(v, w) and kappa the multiplier quotient of u, so the
        representative is -(w + riesz_minus(f(|u|) u + kappa w)).
        """
        c, u = self.parts(w)
        fu = psi_gradient(self.model, u)
        pair_v = l2_inner(fu, self.v)
        kappa_u = self.env2 / self.a**2 - pair_v / (self.a**2 * c)
        grad = -(w + riesz_minus(fu + kappa_u * w))
        return grad, (c, u, fu, kappa_u)


@dataclass
class InnerCertificate:
    """Convergence evidence for one inner maximization."""

    grad_norm: float
    iterations: int
    boundary_fraction: float
    concavity_margin: float | None = None


@dataclass
class InnerResult:
    w_star: SpinorField
    iterations: int
    certificate: InnerCertificate
    # cached maximizer data: (coeff, field, nonlinear gradient, multiplier)
    coeff: float = 0.0
    maximizer: SpinorField | None = None
    fu: SpinorField | None = None
    kappa_val: float = 0.0


def inner_gradient(model: NonlinearModel, v: SpinorField, w: SpinorField) -> SpinorField:
    """Minus-part e-metric representative of the inner derivative at (v, w).

    Vanishes exactly at the inner maximizer.  Raises on domain violations;
    warns when w sits within 1e-10 of the admissible ball boundary.
    """
    fiber = _Fiber(model, v)
    wn = e_norm(w)
    if wn > fiber.radius * (1.0 + 1e-9):
        raise DomainError(
            f"minus field outside the admissible ball: e_norm(w)={wn:.6e} > "
            f"{fiber.radius:.6e}"
        )
    if wn > fiber.radius * (1.0 - 1e-10):
        import warnings

        warnings.warn("inner gradient evaluated at the minus-ball boundary", stacklevel=2)
    grad, _ = fiber.gradient(w)
    return grad


def sample_concavity(
    model: NonlinearModel,
    v: SpinorField,
    w: SpinorField,
    z: SpinorField,
    rel_step: float = 1e-3,
) -> float:
    """Second difference of the inner value at w along z, per unit e-norm^2.

    Returns (phi(w + t z) - 2 phi(w) + phi(w - t z)) / (t^2 e_norm(z)^2); the
    inner problem is strictly concave when this stays below -1/4 for small
    masses.
    """
    fiber = _Fiber(model, v)
    zn = e_norm(z)
    if zn == 0.0:
        raise ValueError("direction z must be nonzero")
    t = rel_step * fiber.radius / zn
    f0 = fiber.value(w)
    fp = fiber.value(w + t * z)
    fm = fiber.value(w - t * z)
    return (fp - 2.0 * f0 + fm) / (t * zn) ** 2


def inner_maximize(
    model: NonlinearModel,
    v: SpinorField,
    tol: float | None = None,
    w0: SpinorField | None = None,
    max_iter: int = 500,
    certify: bool = True,
) -> InnerResult:
    """Maximize the fiber energy over the admissible minus ball.

    Damped ascent in the e-metric with the exact per-mode curvature of the
    quadratic part as preconditioner; the nonlinear terms are small
    perturbations for small mass, so convergence is linear with a rate far
    from 1.  Iterates overshooting the ball are projected back just inside;
    a maximizer that actually sits on the boundary signals a mass outside the
    validated smallness regime and raises.
    """
    fiber = _Fiber(model, v)
    if tol is None:
        tol = 1e-9 * fiber.a
    guard = fiber.radius * (1.0 - _BALL_GUARD)

    w = w0 if w0 is not None else SpinorField.zeros(fiber.space)
    if e_norm(w) > guard:
        w = w * (guard / e_norm(w))
    grad, aux = fiber.gradient(w)
    gnorm = e_norm(grad)
    eta = 1.0
    iterations = 0
    while gnorm > tol and iterations < max_iter:
        step_hat = grad.hat * fiber.precond
        accepted = False
        for _ in range(40):
            w_try = SpinorField.from_hat(fiber.space, w.hat + eta * step_hat)
            wn = e_norm(w_try)
            if wn > guard:
                w_try = w_try * (guard / wn)
            grad_try, aux_try = fiber.gradient(w_try)
            gn_try = e_norm(grad_try)
            if gn_try <= tol or gn_try <= gnorm * (1.0 - 1e-3 * min(eta, 1.0)):
                accepted = True
                break
            eta *= 0.5
        if not accepted:
            raise InnerConvergenceError(
                f"inner ascent stalled at gradient norm {gnorm:.3e} (tol {tol:.3e})"
            )
        w, grad, gnorm, aux = w_try, grad_try, gn_try, aux_try
        eta = min(1.0, eta * 1.5)
        iterations += 1
    if gnorm > tol:
        raise InnerConvergenceError(
            f"inner maximization did not converge in {max_iter} iterations "
            f"(gradient norm {gnorm:.3e}, tol {tol:.3e})"
        )
    boundary_fraction = e_norm(w) / fiber.radius
    if boundary_fraction >= 0.999:
        raise SmallnessError(
            "inner maximizer reached the minus-ball boundary "
            f"(fraction {boundary_fraction:.4f}); mass a={fiber.a:.3e} is too large"
        )
    margin = None
    if certify:
        rng = np.random.default_rng(7)
        from .spectral_core import random_field

        z = random_field(fiber.space, rng, bandwidth=2.0, part="minus")
        margin = sample_concavity(model, v, w, z)
    cert = InnerCertificate(gnorm, iterations, boundary_fraction, margin)
    c, u, fu, kap = aux
    return InnerResult(w, iterations, cert, coeff=c, maximizer=u, fu=fu, kappa_val=kap)


def reduce(model: NonlinearModel, v: SpinorField, tol: float | None = None) -> SpinorField:
    """Fiber maximizer field h_map(v, w(v)); same L2 mass as v."""
    res = inner_maximize(model, v, tol=tol, certify=False)
    return res.maximizer


def kappa(model: NonlinearModel, u: SpinorField) -> float:
    """Multiplier quotient of a field with nonzero plus part.

    (e_norm(u_plus)^2 - l2 pairing of f(|u|) u with u_plus) / l2_norm(u_plus)^2;
    for an exact solution this equals the multiplier omega.
    """
    parts = split(u)
    plus_l2 = l2_norm(parts.plus)
    if plus_l2 < 1e-14 * max(l2_norm(u), 1e-300):
        raise ValueError("kappa requires a nonzero plus part")
    fu = psi_gradient(model, u)
    return (e_norm(parts.plus) ** 2 - l2_inner(fu, parts.plus)) / plus_l2**2


def pde_residual(model: NonlinearModel, u: SpinorField) -> SpinorField:
    """Residual field H0 u - f(x,|u|) u - kappa(u) u of the stationary equation."""
    kap = kappa(model, u)
    return apply_h0(u) - psi_gradient(model, u) - kap * u


@dataclass
class ReducedState:
    """Full evaluation of the reduced functional at one sphere point."""

    v: SpinorField
    a: float
    w: SpinorField
    g: SpinorField
    kappa_val: float
    j_val: float
    inner_residual: float
    inner_iterations: int
    grad_tangent: SpinorField | None = None
    fiber_coeff: float = 1.0


def tangent_project(v: SpinorField, raw: SpinorField) -> SpinorField:
    """e-metric orthogonal projection of a plus field onto the sphere tangent.

    The tangent space at v on the L2 sphere is the kernel of
    z -> l2_inner(v, z); its e-orthogonal complement is spanned by
    riesz_plus(v), so subtract the unique multiple restoring l2 orthogonality.
    """
    s = riesz_plus(v)
    mu = l2_inner(v, raw) / l2_inner(v, s)
    return raw - mu * s


def attach_gradient(model: NonlinearModel, state: ReducedState) -> ReducedState:
    """Fill in the sphere-tangent gradient of the reduced value at state.v.

    The derivative along a tangent direction z equals
    fiber_coeff * l2_inner(residual(g), z); the representative is the
    tangent-projected plus-part riesz lift of the residual, scaled by the
    fiber coefficient sqrt(a^2 - |w|_2^2)/a.
    """
    fu = psi_gradient(model, state.g)
    residual = apply_h0(state.g) - fu - state.kappa_val * state.g
    raw = state.fiber_coeff * riesz_plus(residual)
    state.grad_tangent = tangent_project(state.v, raw)
    return state


def evaluate_reduced(
    model: NonlinearModel,
    v: SpinorField,
    tol: float | None = None,
    w0: SpinorField | None = None,
    max_iter: int = 500,
    need_gradient: bool = True,
) -> ReducedState:
    """Inner-maximize at v and package value, multiplier and (optionally) gradient."""
    res = inner_maximize(model, v, tol=tol, w0=w0, max_iter=max_iter, certify=False)
    fiber_a = l2_norm(v)
    j = (
        0.5 * res.coeff**2 * e_norm(v) ** 2
        - 0.5 * e_norm(res.w_star) ** 2
        - psi(model, res.maximizer)
    )
    state = ReducedState(
        v=v,
        a=fiber_a,
        w=res.w_star,
        g=res.maximizer,
        kappa_val=res.kappa_val,
        j_val=j,
        inner_residual=res.certificate.grad_norm,
        inner_iterations=res.iterations,
        fiber_coeff=res.coeff,
    )
    if need_gradient:
        attach_gradient(model, state)
    return state


def reduced_value(model: NonlinearModel, v: SpinorField, tol: float | None = None) -> float:
    """Value of the reduced functional at v."""
    return evaluate_reduced(model, v, tol=tol, need_gradient=False).j_val


def reduced_gradient(
    model: NonlinearModel, v: SpinorField, tol: float | None = None
) -> SpinorField:
    """Sphere-tangent e-metric gradient of the reduced functional at v."""
    return evaluate_reduced(model, v, tol=tol, need_gradient=True).grad_tangent
