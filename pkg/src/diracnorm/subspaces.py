"""Finite-dimensional plus subspaces built from scaled Hermite envelopes.

A periodic eigenfield of the free Dirac operator at the band edge (a constant
upper-block spinor) is modulated by Hermite functions dilated by a scale
factor; the resulting fields have L2 mass approaching the Hermite mass,
vanishing commutator with (H0 - m), and plus parts spanning k-dimensional
subspaces on which the quadratic excess e_norm^2 - m shrinks while the
potential term stays bounded below.  Sampling the unit sphere of such a
subspace yields computable upper bounds for the reduced functional's minimax
levels at small mass.

The envelope scale stretches the profile; grids for large scales are widened
automatically so the Gaussian tails stay inside the box (a fixed box loses
essentially all mass at scale ~ box/2, which would void every estimate here).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .nonlinearity import NonlinearModel, psi
from .reduction import evaluate_reduced
from .spectral_core import (
    ArrayF,
    DiracSpace,
    Grid,
    SpinorField,
    apply_h0,
    e_norm,
    eigen_spinor,
    l2_norm,
    plane_wave,
    split,
)


class MassLeakWarning(UserWarning):
    """A scaled envelope lost noticeable L2 mass to the box truncation."""


def hermite_1d(n: int, t) -> ArrayF:
    """Unit-L2-norm 1-D Hermite function of degree n (recurrence evaluation)."""
    t = np.asarray(t, dtype=float)
    h_prev = np.pi ** (-0.25) * np.exp(-0.5 * t * t)
    if n == 0:
        return h_prev
    h_cur = np.sqrt(2.0) * t * h_prev
    for j in range(2, n + 1):
        h_cur, h_prev = (
            np.sqrt(2.0 / j) * t * h_cur - np.sqrt((j - 1.0) / j) * h_prev,
            h_cur,
        )
    return h_cur


def hermite_multi_indices(k: int) -> tuple[tuple[int, int, int], ...]:
    """First k tensor indices ordered by total degree, ties lexicographic."""
    out: list[tuple[int, int, int]] = []
    degree = 0
    while len(out) < k:
        layer = [
            (i, j, degree - i - j)
            for i in range(degree + 1)
            for j in range(degree + 1 - i)
        ]
        out.extend(sorted(layer))
        degree += 1
    return tuple(out[:k])


def hermite_function(idx, x) -> ArrayF:
    """Tensor Hermite function h_idx(x) = prod_j h_{idx_j}(x_j); unit L2 norm.

    ``x`` may be a single 3-vector or an (..., 3) array.
    """
    idx = tuple(int(i) for i in idx)
    x = np.asarray(x, dtype=float)
    return (
        hermite_1d(idx[0], x[..., 0])
        * hermite_1d(idx[1], x[..., 1])
        * hermite_1d(idx[2], x[..., 2])
    )


@dataclass(frozen=True)
class HermiteBasis:
    """The first k tensor Hermite functions, L2(R^3)-orthonormal."""

    dimension: int
    multi_indices: tuple[tuple[int, int, int], ...]

    @classmethod
    def first(cls, k: int) -> "HermiteBasis":
        if k <= 0:
            raise ValueError("basis dimension must be positive")
        return cls(k, hermite_multi_indices(k))

    def grid_values(self, grid: Grid, coeffs, scale: float = 1.0) -> ArrayF:
        """Separable evaluation of sum_i coeffs_i h_i(x / scale) on the grid."""
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (self.dimension,):
            raise ValueError(f"expected {self.dimension} coefficients, got {coeffs.shape}")
        t = grid.axis_coords / scale
        max_deg = max(max(idx) for idx in self.multi_indices)
        table = np.stack([hermite_1d(n, t) for n in range(max_deg + 1)])
        out = np.zeros((grid.n_per_axis,) * 3)
        for c, (i, j, l) in zip(coeffs, self.multi_indices):
            if c == 0.0:
                continue
            out += c * (
                table[i][:, None, None] * table[j][None, :, None] * table[l][None, None, :]
            )
        return out


def periodic_solution_phi(space: DiracSpace, lam: float) -> SpinorField:
    """Plane-wave eigenfield of the free operator with eigenvalue lam.

    Requires |lam| >= m and a lattice frequency xi with sqrt(|xi|^2 + m^2)
    equal to |lam| (always available for lam = m via xi = 0).  The returned
    field has unit pointwise C^4 norm and satisfies apply_h0(phi) = lam phi
    exactly on the grid.
    """
    m = space.mass
    if abs(lam) < m:
        raise ValueError(f"|lam| must be at least the mass m={m:g}, got {lam}")
    target_ksq = lam * lam - m * m
    freqs = space.grid.freq_axis
    n = space.grid.n_per_axis
    best = None
    for ix in range(n):
        for iy in range(n):
            for iz in range(n):
                ksq = freqs[ix] ** 2 + freqs[iy] ** 2 + freqs[iz] ** 2
                if abs(ksq - target_ksq) <= 1e-9 * max(1.0, target_ksq):
                    key = (ksq, ix, iy, iz)
                    if best is None or key < best:
                        best = key
    if best is None:
        raise ValueError(
            f"eigenvalue {lam:g} is not attainable on the grid frequency lattice"
        )
    _, ix, iy, iz = best
    mode = [ix if ix < n // 2 else ix - n, iy if iy < n // 2 else iy - n,
            iz if iz < n // 2 else iz - n]
    branch = "plus" if lam > 0 else "minus"
    chi = eigen_spinor(space, mode, branch)
    return plane_wave(space, mode, chi)


def mean_value(
    g,
    box_sizes,
    tol: float = 1e-8,
    points_per_unit: float = 4.0,
    max_axis_points: int = 512,
) -> float:
    """Large-box average of a periodic / almost-periodic function on R^3.

    ``g`` is a vectorized callable of three broadcastable coordinate arrays.
    Averages (1/T^3) int over [0, T]^3 by the midpoint rule along the given
    increasing ladder of box sizes; returns as soon as two successive
    averages differ by less than ``tol``.  Raises if the ladder is exhausted
    without the averages settling.
    """
    box_sizes = list(box_sizes)
    if len(box_sizes) < 2:
        raise ValueError("need at least two box sizes")
    if any(b <= a for a, b in zip(box_sizes, box_sizes[1:])):
        raise ValueError("box sizes must be strictly increasing")
    prev = None
    for size in box_sizes:
        n_axis = int(min(max(8, round(points_per_unit * size)), max_axis_points))
        pts = (np.arange(n_axis) + 0.5) * (size / n_axis)
        acc = 0.0
        for x_slab in pts:  # slab over the first axis keeps memory flat
            acc += float(np.sum(g(x_slab, pts[:, None], pts[None, :])))
        avg = acc / n_axis**3
        if prev is not None and abs(avg - prev) < tol:
            return avg
        prev = avg
    raise RuntimeError(
        f"box averages did not settle below {tol:g} on the ladder {box_sizes}"
    )


def scaled_envelope_field(
    space: DiracSpace,
    scale: float,
    basis: HermiteBasis,
    coeffs,
    chi=(1.0, 0.0, 0.0, 0.0),
    leak_threshold: float = 0.999,
) -> SpinorField:
    """Band-edge eigenfield modulated by a dilated Hermite combination.

    Returns scale^(-3/2) * zeta(x / scale) * chi with zeta the coefficient
    combination of the basis; for the constant band-edge spinor the mean of
    |chi|^2 is exactly 1 and the continuum L2 norm equals |coeffs|.  Warns
    when the box captures less than ``leak_threshold`` of that mass.
    """
    if scale <= 0:
        raise ValueError("scale must be positive")
    chi = np.asarray(chi, dtype=np.complex128).reshape(4)
    zeta = basis.grid_values(space.grid, coeffs, scale=scale)
    values = (scale ** (-1.5)) * zeta[None, :, :, :] * chi[:, None, None, None]
    out = SpinorField(space, values.astype(np.complex128))
    expected = float(np.sum(np.square(np.asarray(coeffs, dtype=float))))
    if expected > 0:
        captured = l2_norm(out) ** 2 / expected
        if captured < leak_threshold:
            warnings.warn(
                f"scaled envelope at scale {scale:g} keeps only {captured:.4f} "
                f"of its L2 mass on the box (length {space.grid.box_length:g})",
                MassLeakWarning,
                stacklevel=2,
            )
    return out


def subspace_space(base: DiracSpace, scale: float, width_factor: float = 6.0) -> DiracSpace:
    """Space whose box holds a scaled envelope; reuses the base when it fits."""
    box = max(base.grid.box_length, width_factor * scale)
    if box == base.grid.box_length:
        return base
    return DiracSpace(Grid(base.grid.n_per_axis, box), base.mass)


def sphere_samples(k: int, count: int) -> ArrayF:
    """Deterministic unit-sphere sample in R^k: signed basis plus Sobol points."""
    rows = [np.eye(k)[i] * s for i in range(k) for s in (1.0, -1.0)]
    if k == 1:
        return np.array(rows)
    from scipy.stats import qmc
    from scipy.special import ndtri

    sob = qmc.Sobol(d=k, scramble=False)
    raw = sob.random_base2(int(np.ceil(np.log2(count + 8))))
    raw = np.clip(raw, 1e-12, 1.0 - 1e-12)
    pts = ndtri(raw)
    norms = np.linalg.norm(pts, axis=1)
    keep = norms > 1e-9
    pts = pts[keep][:count] / norms[keep][:count, None]
    return np.vstack([rows, pts])


def envelope_operator_norms(
    space: DiracSpace, scale: float, basis: HermiteBasis, coeffs
) -> dict[str, float]:
    """Commutator and splitting diagnostics of one scaled envelope.

    Returns the L2 norm of (H0 - m) u, the absolute complex pairing
    |((H0 - m) u, u)_L2|, the minus-part L2 norm, the plus-part e-norm and
    the total L2 norm for u the scaled envelope field.
    """
    u = scaled_envelope_field(space, scale, basis, coeffs)
    m = space.mass
    gap = apply_h0(u) - m * u
    parts = split(u)
    vol = space.grid.cell_volume
    pair = vol * complex(np.sum(gap.values * np.conj(u.values)))
    return {
        "gap_l2": l2_norm(gap),
        "gap_pairing": abs(pair),
        "minus_l2": l2_norm(parts.minus),
        "plus_e_norm": e_norm(parts.plus),
        "u_l2": l2_norm(u),
    }


@dataclass
class SubspaceReport:
    """Sampled extremes of one plus subspace at one envelope scale."""

    k: int
    n: int
    sup_quad: float
    inf_psi: float
    ratio: float
    injective: bool
    gram_min_eig: float
    level_bound: float | None = None
    mass_capture: float = 1.0
    warnings: list[str] = field(default_factory=list)


def _plus_basis(
    model: NonlinearModel, space: DiracSpace, scale: float, basis: HermiteBasis
) -> tuple[list[SpinorField], float]:
    fields = []
    capture = 1.0
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", MassLeakWarning)
        for i in range(basis.dimension):
            coeffs = np.zeros(basis.dimension)
            coeffs[i] = 1.0
            u = scaled_envelope_field(space, scale, basis, coeffs)
            capture = min(capture, l2_norm(u) ** 2)
            fields.append(split(u).plus)
    return fields, capture


def subspace_ratio(
    model: NonlinearModel,
    k: int,
    n: float,
    base_space: DiracSpace,
    density: int = 64,
) -> SubspaceReport:
    """Sampled sup of the quadratic excess over sampled inf of the potential.

    Samples the unit L2 sphere of the plus subspace spanned by the k scaled
    envelopes at scale n (signed basis plus a low-discrepancy sphere set of
    size density * k); reports sup(e_norm^2 - m), inf(psi), their ratio, and
    injectivity of the plus projection via the Gram matrix of the spanning
    fields.
    """
    basis = HermiteBasis.first(k)
    space = subspace_space(base_space, n)
    plus_fields, capture = _plus_basis(model, space, n, basis)
    gram = np.array(
        [
            [
                space.grid.cell_volume
                * float(np.real(np.sum(pi.values * np.conj(pj.values))))
                for pj in plus_fields
            ]
            for pi in plus_fields
        ]
    )
    scale_diag = np.sqrt(np.diag(gram))
    normalized_gram = gram / np.outer(scale_diag, scale_diag)
    gram_min_eig = float(np.min(np.linalg.eigvalsh(normalized_gram)))
    injective = gram_min_eig > 1e-8

    samples = sphere_samples(k, density * k)
    hats = np.stack([p.hat for p in plus_fields])
    vals = np.stack([p.values for p in plus_fields])
    vol = space.grid.cell_volume
    sup_quad = -np.inf
    inf_psi = np.inf
    for c in samples:
        combo_vals = np.tensordot(c, vals, axes=(0, 0))
        pl2 = float(np.sqrt(vol * np.sum(np.abs(combo_vals) ** 2)))
        combo_hat = np.tensordot(c, hats, axes=(0, 0)) / pl2
        e2 = vol * float(np.sum(space.lam * np.sum(np.abs(combo_hat) ** 2, axis=0)))
        sup_quad = max(sup_quad, e2 - space.mass)
        v_field = SpinorField(space, combo_vals / pl2)
        inf_psi = min(inf_psi, psi(model, v_field))
    report = SubspaceReport(
        k=k,
        n=int(n),
        sup_quad=float(sup_quad),
        inf_psi=float(inf_psi),
        ratio=float(sup_quad / inf_psi) if inf_psi > 0 else np.inf,
        injective=injective,
        gram_min_eig=gram_min_eig,
        mass_capture=capture,
    )
    if capture < 0.999:
        report.warnings.append(f"mass capture {capture:.4f} below 0.999")
    return report


@dataclass
class LevelBoundResult:
    """Minimax level bound of the reduced functional on one scaled subspace."""

    k: int
    n: int
    a: float
    analytic_bound: float
    direct_sup: float
    sup_quad: float
    inf_psi: float
    below_half_level: bool
    consistent: bool


def level_bound(
    model: NonlinearModel,
    k: int,
    n: float,
    a: float,
    base_space: DiracSpace,
    density: int = 64,
    j_density: int = 8,
    slack: float = 1e-6,
) -> LevelBoundResult:
    """Upper bound for the reduced level on the mass-a sphere of a subspace.

    The analytic-style bound is (a^2/2) sup e_norm^2 - 2^(1-2q) a^q inf psi
    over the unit sphere of the subspace; the direct value is a sampled sup
    of the reduced functional over the same sphere scaled to mass a.  The
    direct sup must not exceed the analytic bound by more than sampling
    slack once the mass is small.
    """
    report = subspace_ratio(model, k, n, base_space, density=density)
    m = base_space.mass
    q = model.q
    analytic = 0.5 * a * a * (m + report.sup_quad) - 2.0 ** (
        1.0 - 2.0 * q
    ) * a**q * report.inf_psi

    basis = HermiteBasis.first(k)
    space = subspace_space(base_space, n)
    plus_fields, _ = _plus_basis(model, space, n, basis)
    samples = sphere_samples(k, max(j_density * k - 2 * k, 0))
    direct = -np.inf
    for c in samples:
        combo = None
        for ci, p in zip(c, plus_fields):
            term = ci * p
            combo = term if combo is None else combo + term
        v = combo * (a / l2_norm(combo))
        state = evaluate_reduced(model, v, tol=1e-9 * a, need_gradient=False)
        direct = max(direct, state.j_val)
    half = 0.5 * m * a * a
    return LevelBoundResult(
        k=k,
        n=int(n),
        a=a,
        analytic_bound=float(analytic),
        direct_sup=float(direct),
        sup_quad=report.sup_quad,
        inf_psi=report.inf_psi,
        below_half_level=analytic < half,
        consistent=direct <= analytic + slack + 1e-12 * abs(analytic),
    )
