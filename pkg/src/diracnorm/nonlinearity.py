"""Admissible focusing nonlinearities f(x, t) and the potential functional.

A model is admissible when it satisfies the structural conditions labelled
(f1)-(f5) below; the labels are used verbatim in validation errors and reports
so that rejections are traceable to the violated condition.

  (f1) f(x, 0) = 0 and f(x, .) is C^1 on (0, inf);
  (f2) f(x, t) > 0 for t > 0;
  (f3) there are 2 < p <= q < 3 with f(x,t)/t^(p-2) nondecreasing and
       f(x,t)/t^(q-2) nonincreasing in t;
  (f4) r(x) := f(x, 1) is bounded and its essential sup over |x| >= R
       vanishes as R -> infinity;
  (f5) F(x, t) = int_0^t f(x, s) s ds admits the lower bound
       F(x, t) >= L |x|^(-tau) t^alpha on a solid cone S = {t y : t >= 1,
       y in B_d(x0)} for 0 <= t <= t0, with alpha in (0, 8/3) and
       tau in (0, (8 - 3 alpha)/2).

Built-in kinds: ``pure_power`` (f = r(x) t^(p-2)), ``two_power``
(f = r(x) (t^(p-2) + t^(q-2))) and the diagnostic ``null`` model (f = F = 0).
The null model deliberately violates (f2); it exists to provide exactly
solvable linear baselines.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from .spectral_core import SpinorField, l2_inner

ArrayF = NDArray[np.float64]

MODEL_KINDS = ("pure_power", "two_power", "null")
WEIGHT_FORMS = ("inverse_poly", "bump")


@dataclass(frozen=True)
class WeightSpec:
    """Spatial weight r(x).

    ``inverse_poly``: r(x) = amplitude * (1 + |x|^2)^(-decay_rate/2), a slowly
    vanishing weight; ``bump``: a smooth compactly supported bump where
    ``decay_rate`` is reused as the support radius.
    """

    amplitude: float = 1.0
    decay_rate: float = 0.2
    form: str = "inverse_poly"

    def __post_init__(self) -> None:
        if not self.amplitude > 0:
            raise ValueError(f"weight amplitude must be positive, got {self.amplitude}")
        if self.decay_rate < 0:
            raise ValueError(f"weight decay_rate must be nonnegative, got {self.decay_rate}")
        if self.form not in WEIGHT_FORMS:
            raise ValueError(f"weight form must be one of {WEIGHT_FORMS}, got {self.form!r}")

    def value_r2(self, r2) -> ArrayF:
        """Weight evaluated from squared radius |x|^2 (scalar or array)."""
        r2 = np.asarray(r2, dtype=float)
        if self.form == "inverse_poly":
            return self.amplitude * (1.0 + r2) ** (-self.decay_rate / 2.0)
        radius = self.decay_rate if self.decay_rate > 0 else 1.0
        s = r2 / radius**2
        out = np.zeros_like(s)
        inside = s < 1.0
        out[inside] = self.amplitude * np.exp(1.0 - 1.0 / (1.0 - s[inside]))
        return out

    def value_at(self, x) -> ArrayF:
        x = np.asarray(x, dtype=float)
        return self.value_r2(np.sum(x * x, axis=-1))


@dataclass(frozen=True)
class NonlinearModel:
    """One admissible nonlinearity with its growth and cone data."""

    kind: str = "pure_power"
    p: float = 2.5
    q: float = 2.5
    weight: WeightSpec = field(default_factory=WeightSpec)
    growth_alpha: float = 2.5
    tau: float = 0.2
    lower_const: float | None = None
    t0: float = 1.0
    cone_center: tuple[float, float, float] = (2.0, 0.0, 0.0)
    cone_radius: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"model kind must be one of {MODEL_KINDS}, got {self.kind!r}")
        if self.kind == "null":
            return
        if not (2.0 < self.p <= self.q < 3.0):
            raise ValueError(
                f"(f3) requires 2 < p <= q < 3 (got p={self.p}, q={self.q})"
            )
        if not (0.0 < self.growth_alpha < 8.0 / 3.0):
            raise ValueError(
                f"(f5) requires alpha in (0, 8/3) (got alpha={self.growth_alpha})"
            )
        if self.growth_alpha < self.p:
            raise ValueError(
                "(f5) lower bound fails as t -> 0 unless alpha >= p "
                f"(got alpha={self.growth_alpha}, p={self.p})"
            )
        tau_hi = (8.0 - 3.0 * self.growth_alpha) / 2.0
        if not (0.0 < self.tau < tau_hi):
            raise ValueError(
                f"(f5) requires tau in (0, (8-3*alpha)/2) = (0, {tau_hi:g}) "
                f"(got tau={self.tau})"
            )
        if self.weight.form == "inverse_poly" and self.weight.decay_rate > self.tau:
            raise ValueError(
                "(f5) cone bound needs weight decay <= tau for the inverse_poly "
                f"form (got decay={self.weight.decay_rate}, tau={self.tau})"
            )
        if not self.t0 > 0:
            raise ValueError(f"t0 must be positive, got {self.t0}")
        if not self.cone_radius > 0:
            raise ValueError(f"cone_radius must be positive, got {self.cone_radius}")
        x0 = np.asarray(self.cone_center, dtype=float)
        if not self.cone_radius < float(np.linalg.norm(x0)):
            raise ValueError(
                "(f5) cone geometry requires d < |x0| "
                f"(got d={self.cone_radius}, |x0|={np.linalg.norm(x0):g})"
            )
        if self.lower_const is not None and not self.lower_const > 0:
            raise ValueError(f"lower_const must be positive, got {self.lower_const}")

    @property
    def tag(self) -> str:
        if self.kind == "null":
            return "null"
        return (
            f"{self.kind}(p={self.p:g},q={self.q:g},r0={self.weight.amplitude:g},"
            f"sigma={self.weight.decay_rate:g})"
        )

    @property
    def lower_const_effective(self) -> float:
        """Cone-bound constant L; derived for the built-in forms when unset.

        For an inverse-poly weight with decay <= tau, on |x| >= 1 one has
        r(x) >= r0 * 2^(-tau/2) |x|^(-tau); dividing by p (and by 2 for the
        two_power split) gives a valid L for alpha >= p and t <= min(t0, 1).
        """
        if self.lower_const is not None:
            return self.lower_const
        if self.kind == "null":
            return 0.0
        base = self.weight.amplitude * 2.0 ** (-self.tau / 2.0) / self.p
        if self.kind == "two_power":
            base *= 0.5
        return base


def pure_power(p: float = 2.5, **kwargs) -> NonlinearModel:
    kwargs.setdefault("q", p)
    kwargs.setdefault("growth_alpha", p)
    return NonlinearModel(kind="pure_power", p=p, **kwargs)


def two_power(p: float, q: float, **kwargs) -> NonlinearModel:
    kwargs.setdefault("growth_alpha", max(p, kwargs.get("growth_alpha", p)))
    return NonlinearModel(kind="two_power", p=p, q=q, **kwargs)


def null_model() -> NonlinearModel:
    return NonlinearModel(kind="null")


def _check_t(t) -> ArrayF:
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("field magnitude t must be nonnegative")
    return t


def _f_r2(model: NonlinearModel, r2, t) -> ArrayF:
    t = _check_t(t)
    if model.kind == "null":
        return np.zeros(np.broadcast_shapes(np.shape(r2), t.shape))
    w = model.weight.value_r2(r2)
    if model.kind == "pure_power":
        return w * t ** (model.p - 2.0)
    return w * (t ** (model.p - 2.0) + t ** (model.q - 2.0))


def _F_r2(model: NonlinearModel, r2, t) -> ArrayF:
    t = _check_t(t)
    if model.kind == "null":
        return np.zeros(np.broadcast_shapes(np.shape(r2), t.shape))
    w = model.weight.value_r2(r2)
    if model.kind == "pure_power":
        return w * t**model.p / model.p
    return w * (t**model.p / model.p + t**model.q / model.q)


def _f_prime_r2(model: NonlinearModel, r2, t) -> ArrayF:
    t = np.asarray(t, dtype=float)
    if model.kind == "null":
        return np.zeros(np.broadcast_shapes(np.shape(r2), t.shape))
    if np.any(t <= 0):
        raise ValueError("f_prime requires t > 0")
    w = model.weight.value_r2(r2)
    if model.kind == "pure_power":
        return w * (model.p - 2.0) * t ** (model.p - 3.0)
    return w * (
        (model.p - 2.0) * t ** (model.p - 3.0)
        + (model.q - 2.0) * t ** (model.q - 3.0)
    )


def _r2_of(x) -> ArrayF:
    x = np.asarray(x, dtype=float)
    return np.sum(x * x, axis=-1)


def f_value(model: NonlinearModel, x, t) -> ArrayF:
    """f(x, t); x is a 3-vector or (..., 3) array, t broadcasts against it."""
    return _f_r2(model, _r2_of(x), t)


def F_value(model: NonlinearModel, x, t) -> ArrayF:
    """Potential F(x, t) = int_0^t f(x, s) s ds (exact closed form)."""
    return _F_r2(model, _r2_of(x), t)


def f_prime(model: NonlinearModel, x, t) -> ArrayF:
    """Partial derivative of f in t; defined for t > 0."""
    return _f_prime_r2(model, _r2_of(x), t)


def psi(model: NonlinearModel, u: SpinorField) -> float:
    """Grid quadrature of F(x, |u(x)|)."""
    if model.kind == "null":
        return 0.0
    grid = u.space.grid
    vals = _F_r2(model, grid.radius_sq, u.point_norm())
    return grid.cell_volume * float(np.sum(vals))


def psi_gradient(model: NonlinearModel, u: SpinorField) -> SpinorField:
    """L2 representative of the derivative of psi: the field f(x, |u|) u."""
    if model.kind == "null":
        return SpinorField.zeros(u.space)
    grid = u.space.grid
    fvals = _f_r2(model, grid.radius_sq, u.point_norm())
    return SpinorField(u.space, fvals[None, :, :, :] * u.values)


def psi_pairing(model: NonlinearModel, u: SpinorField, z: SpinorField) -> float:
    """Directional derivative of psi at u along z."""
    return l2_inner(psi_gradient(model, u), z)


@dataclass
class GrowthCheck:
    """Outcome of one sampled inequality: worst margin relative to its scale."""

    name: str
    description: str
    samples: int
    worst_margin: float
    scale: float
    tight: bool = False
    witness: tuple | None = None

    @property
    def passed(self) -> bool:
        return self.worst_margin >= -1e-12 * max(self.scale, 1.0)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = " (tight)" if self.tight else ""
        out = (
            f"[{status}] {self.name}: worst margin {self.worst_margin:.3e} "
            f"over {self.samples} samples (scale {self.scale:.3e}){extra}"
        )
        if not self.passed and self.witness is not None:
            out += f" witness={self.witness}"
        return out


@dataclass
class GrowthReport:
    checks: list[GrowthCheck]

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def summary(self) -> str:
        return "\n".join(c.line() for c in self.checks)


def check_growth(
    model: NonlinearModel,
    sample_count: int = 10000,
    seed: int = 7,
    box_half: float = 8.0,
) -> GrowthReport:
    """Sample-verify the growth inequalities implied by (f1)-(f5).

    Checks, with worst-case margins over random (x, t) and scaling factors:
      * derivative pinch  (p-2) f <= f' t <= (q-2) f  and positivity of f;
      * potential pinch   f t^2 / q <= F <= f t^2 / p;
      * scaling envelope  s^p F(x,t) <= F(x,st) <= s^q F(x,t) for s >= 1
        (reversed on 0 < s <= 1);
      * one-point form    r(x) s^p / q <= F(x,s) <= r(x) s^q / p for s >= 1
        (reversed exponents on 0 < s <= 1), with r(x) = f(x, 1);
      * upper envelope    F <= C (t^p + t^q) with C = sup r / p;
      * cone lower bound  F >= L |x|^(-tau) t^alpha on the solid cone, t <= t0.
    """
    if model.kind == "null":
        raise ValueError("growth checks need a pure_power or two_power model")
    rng = np.random.default_rng(seed)
    n = int(sample_count)
    x = rng.uniform(-box_half, box_half, size=(n, 3))
    t = np.exp(rng.uniform(np.log(1e-3), np.log(1e2), size=n))
    r2 = _r2_of(x)
    p, q = model.p, model.q

    f = _f_r2(model, r2, t)
    fp = _f_prime_r2(model, r2, t)
    F = _F_r2(model, r2, t)
    checks: list[GrowthCheck] = []

    def _worst(arr, pts):
        i = int(np.argmin(arr))
        return float(arr[i]), (tuple(np.round(pts[0][i], 4)), float(pts[1][i]))

    scale = float(np.max(fp * t))
    m1, w1 = _worst(fp * t - (p - 2.0) * f, (x, t))
    checks.append(
        GrowthCheck(
            "derivative-pinch-lower",
            "(p-2) f <= f' t",
            n,
            m1,
            scale,
            tight=(model.kind == "pure_power"),
            witness=w1 if m1 < 0 else None,
        )
    )
    m2, w2 = _worst((q - 2.0) * f - fp * t, (x, t))
    checks.append(
        GrowthCheck(
            "derivative-pinch-upper",
            "f' t <= (q-2) f",
            n,
            m2,
            scale,
            tight=(model.kind == "pure_power"),
            witness=w2 if m2 < 0 else None,
        )
    )
    m_pos, w_pos = _worst(f, (x, t))
    checks.append(
        GrowthCheck("positivity", "(f2) f(x,t) > 0 for t > 0", n, m_pos, scale,
                    witness=w_pos if m_pos <= 0 else None)
    )

    scale_F = float(np.max(F))
    m3, w3 = _worst(F - f * t**2 / q, (x, t))
    checks.append(GrowthCheck("potential-pinch-lower", "f t^2 / q <= F", n, m3, scale_F,
                              witness=w3 if m3 < 0 else None))
    m4, w4 = _worst(f * t**2 / p - F, (x, t))
    checks.append(GrowthCheck("potential-pinch-upper", "F <= f t^2 / p", n, m4, scale_F,
                              witness=w4 if m4 < 0 else None))

    # scaling envelope, both regimes of s
    s_up = np.exp(rng.uniform(0.0, np.log(10.0), size=n))
    s_dn = np.exp(rng.uniform(np.log(0.1), 0.0, size=n))
    F_up = _F_r2(model, r2, s_up * t)
    F_dn = _F_r2(model, r2, s_dn * t)
    sc_up = float(np.max(F_up))
    m5 = float(np.min(F_up - s_up**p * F))
    m6 = float(np.min(s_up**q * F - F_up))
    checks.append(GrowthCheck("scaling-up-lower", "s^p F <= F(st), s >= 1", n, m5, sc_up,
                              tight=(p == q)))
    checks.append(GrowthCheck("scaling-up-upper", "F(st) <= s^q F, s >= 1", n, m6, sc_up,
                              tight=(p == q)))
    sc_dn = float(np.max(F_dn))
    m7 = float(np.min(F_dn - s_dn**q * F))
    m8 = float(np.min(s_dn**p * F - F_dn))
    checks.append(GrowthCheck("scaling-down-lower", "s^q F <= F(st), s <= 1", n, m7, sc_dn,
                              tight=(p == q)))
    checks.append(GrowthCheck("scaling-down-upper", "F(st) <= s^p F, s <= 1", n, m8, sc_dn,
                              tight=(p == q)))

    # one-point form in terms of r(x) = f(x, 1)
    r_of_x = _f_r2(model, r2, np.ones(n))
    F_s_up = _F_r2(model, r2, s_up)
    F_s_dn = _F_r2(model, r2, s_dn)
    sc_one = float(np.max(F_s_up))
    m9 = float(np.min(F_s_up - r_of_x * s_up**p / q))
    m10 = float(np.min(r_of_x * s_up**q / p - F_s_up))
    checks.append(GrowthCheck("one-point-up-lower", "r s^p / q <= F(x,s), s >= 1",
                              n, m9, sc_one))
    checks.append(GrowthCheck("one-point-up-upper", "F(x,s) <= r s^q / p, s >= 1",
                              n, m10, sc_one))
    m11 = float(np.min(F_s_dn - r_of_x * s_dn**q / q))
    m12 = float(np.min(r_of_x * s_dn**p / p - F_s_dn))
    checks.append(GrowthCheck("one-point-down-lower", "r s^q / q <= F(x,s), s <= 1",
                              n, m11, float(np.max(F_s_dn))))
    checks.append(GrowthCheck("one-point-down-upper", "F(x,s) <= r s^p / p, s <= 1",
                              n, m12, float(np.max(F_s_dn))))

    # global upper envelope
    c_up = model.weight.amplitude * (2.0 if model.kind == "two_power" else 1.0) / p
    m13 = float(np.min(c_up * (t**p + t**q) - F))
    checks.append(GrowthCheck("upper-envelope", "F <= C (t^p + t^q)", n, m13, scale_F))

    # cone lower bound: x = t_ray * y with y in the ball around the cone center
    m_cone = n
    y = rng.standard_normal((m_cone, 3))
    y = y / np.linalg.norm(y, axis=1, keepdims=True)
    y = np.asarray(model.cone_center, float) + model.cone_radius * (
        y * rng.uniform(0, 1, size=(m_cone, 1)) ** (1.0 / 3.0)
    )
    t_ray = np.exp(rng.uniform(0.0, np.log(1e3), size=m_cone))
    x_cone = t_ray[:, None] * y
    t_small = np.exp(rng.uniform(np.log(1e-6), np.log(model.t0), size=m_cone))
    F_cone = _F_r2(model, _r2_of(x_cone), t_small)
    lower = (
        model.lower_const_effective
        * np.linalg.norm(x_cone, axis=1) ** (-model.tau)
        * t_small**model.growth_alpha
    )
    m14, w14 = _worst(F_cone - lower, (x_cone, t_small))
    checks.append(
        GrowthCheck(
            "cone-lower-bound",
            "F >= L |x|^(-tau) t^alpha on the cone, t <= t0",
            m_cone,
            m14,
            float(np.max(F_cone)),
            witness=w14 if m14 < 0 else None,
        )
    )
    return GrowthReport(checks)
