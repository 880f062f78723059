"""Periodic-box spectral calculus for the free Dirac operator.

Spinor fields are C^4-valued samples on a uniform periodic grid over a
centered cube.  Every linear operation is diagonal per Fourier mode: at
frequency xi the 4x4 symbol of -i alpha.grad + m beta equals alpha.xi + m beta,
with eigenvalues +-lambda(xi), lambda(xi) = sqrt(|xi|^2 + m^2), each of
multiplicity two.  The forward transform uses the unitary exp(-i xi.x) kernel,
so -i d/dx_k acts as multiplication by xi_k and the mode-by-mode projector
algebra is exact on band-limited data.

Conventions
-----------
* ``l2_inner(u, v)`` is the real part of the complex L2 pairing with the
  cell-volume quadrature weight (exact for band-limited integrands).
* ``e_inner(u, v)`` weights each Fourier mode by lambda(xi); it is the inner
  product of the form domain of |H0|^(1/2) and dominates m * l2 norm^2.
* ``h_half_norm`` uses the multiplier sqrt(1 + |xi|^2).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.typing import NDArray

ArrayC = NDArray[np.complex128]
ArrayF = NDArray[np.float64]

#: 2x2 Pauli matrices sigma_1, sigma_2, sigma_3.
SIGMA: ArrayC = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=np.complex128,
)


def _alpha_matrices() -> ArrayC:
    alpha = np.zeros((3, 4, 4), dtype=np.complex128)
    for k in range(3):
        alpha[k, :2, 2:] = SIGMA[k]
        alpha[k, 2:, :2] = SIGMA[k]
    return alpha


#: The three 4x4 off-block-diagonal matrices multiplying the momenta.
ALPHA: ArrayC = _alpha_matrices()

#: The 4x4 mass-term matrix diag(1, 1, -1, -1).
BETA: ArrayC = np.diag([1.0, 1.0, -1.0, -1.0]).astype(np.complex128)


@dataclass(frozen=True)
class DiracSymbol:
    """Mass together with the fixed matrices of the first-order symbol.

    ``mass == 0`` is allowed for pointwise symbol evaluation; the spectral
    splitting itself requires a positive mass (see :class:`DiracSpace`).
    """

    mass: float

    def __post_init__(self) -> None:
        if self.mass < 0:
            raise ValueError(f"mass must be nonnegative, got {self.mass}")

    @property
    def alpha(self) -> ArrayC:
        return ALPHA

    @property
    def beta(self) -> ArrayC:
        return BETA

    def band_energy(self, xi) -> float:
        """lambda(xi) = sqrt(|xi|^2 + m^2)."""
        xi = np.asarray(xi, dtype=float)
        return float(np.sqrt(xi @ xi + self.mass**2))


def dirac_symbol_at(xi, sym: DiracSymbol) -> ArrayC:
    """Hermitian 4x4 symbol alpha.xi + m beta at one frequency."""
    xi = np.asarray(xi, dtype=float)
    mat = sym.mass * BETA.copy()
    for k in range(3):
        mat += xi[k] * ALPHA[k]
    return mat


def spectral_projectors(xi, sym: DiracSymbol) -> tuple[ArrayC, ArrayC]:
    """Projectors onto the +-lambda(xi) eigenspaces of the symbol.

    Branch-free closed form P_pm = (I +- symbol/lambda)/2; requires m > 0 so
    that lambda(xi) >= m > 0 and no frequency is singular.
    """
    if not sym.mass > 0:
        raise ValueError("spectral projectors require mass > 0")
    mat = dirac_symbol_at(xi, sym)
    lam = sym.band_energy(xi)
    eye = np.eye(4, dtype=np.complex128)
    p_plus = 0.5 * (eye + mat / lam)
    p_minus = 0.5 * (eye - mat / lam)
    return p_plus, p_minus


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid over the centered cube [-L/2, L/2)^3.

    ``n_per_axis`` must be even so the per-axis frequency set is the
    symmetric lattice (2 pi / L) * {-n/2, ..., n/2 - 1}.
    """

    n_per_axis: int
    box_length: float

    def __post_init__(self) -> None:
        if self.n_per_axis <= 0 or self.n_per_axis % 2 != 0:
            raise ValueError(
                f"n_per_axis must be a positive even integer, got {self.n_per_axis}"
            )
        if not self.box_length > 0:
            raise ValueError(f"box_length must be positive, got {self.box_length}")

    @property
    def spacing(self) -> float:
        return self.box_length / self.n_per_axis

    @property
    def cell_volume(self) -> float:
        return self.spacing**3

    @property
    def volume(self) -> float:
        return self.box_length**3

    @cached_property
    def axis_coords(self) -> ArrayF:
        n = self.n_per_axis
        return (np.arange(n) - n // 2) * self.spacing

    @cached_property
    def freq_axis(self) -> ArrayF:
        return 2.0 * np.pi * np.fft.fftfreq(self.n_per_axis, d=self.spacing)

    @cached_property
    def radius_sq(self) -> ArrayF:
        x = self.axis_coords
        return x[:, None, None] ** 2 + x[None, :, None] ** 2 + x[None, None, :] ** 2

    def position_mesh(self) -> tuple[ArrayF, ArrayF, ArrayF]:
        """Broadcastable centered coordinates (x, y, z)."""
        x = self.axis_coords
        return x[:, None, None], x[None, :, None], x[None, None, :]


class DiracSpace:
    """A grid and a positive mass, with cached per-mode multipliers.

    Holds everything the field operations need: the frequency mesh, the band
    energy lambda(xi) and the H^(1/2) multiplier, plus FFT helpers in the
    unitary convention.
    """

    def __init__(self, grid: Grid, mass: float):
        if not mass > 0:
            raise ValueError("DiracSpace requires mass > 0")
        self.grid = grid
        self.mass = float(mass)
        self.symbol = DiracSymbol(self.mass)
        k = grid.freq_axis
        self._kx = k[:, None, None]
        self._ky = k[None, :, None]
        self._kz = k[None, None, :]
        ksq = self._kx**2 + self._ky**2 + self._kz**2
        self.lam: ArrayF = np.sqrt(ksq + self.mass**2)
        self.hhalf_weight: ArrayF = np.sqrt(1.0 + ksq)

    def fft(self, values: ArrayC) -> ArrayC:
        return np.fft.fftn(values, axes=(1, 2, 3), norm="ortho")

    def ifft(self, hat: ArrayC) -> ArrayC:
        return np.fft.ifftn(hat, axes=(1, 2, 3), norm="ortho")

    def apply_symbol_hat(self, hat: ArrayC) -> ArrayC:
        """Multiply Fourier coefficients by the symbol alpha.xi + m beta."""
        out = self.mass * np.tensordot(BETA, hat, axes=(1, 0))
        out += self._kx * np.tensordot(ALPHA[0], hat, axes=(1, 0))
        out += self._ky * np.tensordot(ALPHA[1], hat, axes=(1, 0))
        out += self._kz * np.tensordot(ALPHA[2], hat, axes=(1, 0))
        return out

    def plus_hat(self, hat: ArrayC) -> ArrayC:
        return 0.5 * (hat + self.apply_symbol_hat(hat) / self.lam)

    def minus_hat(self, hat: ArrayC) -> ArrayC:
        return 0.5 * (hat - self.apply_symbol_hat(hat) / self.lam)


@dataclass(eq=False)
class SpinorField:
    """C^4-valued field sampled on a DiracSpace.  Treat instances as immutable.

    The Fourier representation is computed lazily and cached; arithmetic
    returns new fields and combines cached transforms when both operands
    carry them.
    """

    space: DiracSpace
    values: ArrayC
    _hat: ArrayC | None = dataclasses.field(default=None, repr=False, compare=False)

    @classmethod
    def zeros(cls, space: DiracSpace) -> "SpinorField":
        n = space.grid.n_per_axis
        return cls(space, np.zeros((4, n, n, n), dtype=np.complex128))

    @classmethod
    def from_values(cls, space: DiracSpace, values) -> "SpinorField":
        arr = np.asarray(values, dtype=np.complex128)
        n = space.grid.n_per_axis
        if arr.shape != (4, n, n, n):
            raise ValueError(f"expected shape (4, {n}, {n}, {n}), got {arr.shape}")
        return cls(space, arr)

    @classmethod
    def from_hat(cls, space: DiracSpace, hat: ArrayC) -> "SpinorField":
        out = cls(space, space.ifft(hat))
        out._hat = hat
        return out

    @property
    def hat(self) -> ArrayC:
        if self._hat is None:
            self._hat = self.space.fft(self.values)
        return self._hat

    def copy(self) -> "SpinorField":
        out = SpinorField(self.space, self.values.copy())
        if self._hat is not None:
            out._hat = self._hat.copy()
        return out

    def point_norm(self) -> ArrayF:
        """Pointwise C^4 norm |u(x)| on the grid."""
        return np.sqrt(np.sum(np.abs(self.values) ** 2, axis=0))

    def __add__(self, other: "SpinorField") -> "SpinorField":
        out = SpinorField(self.space, self.values + other.values)
        if self._hat is not None and other._hat is not None:
            out._hat = self._hat + other._hat
        return out

    def __sub__(self, other: "SpinorField") -> "SpinorField":
        out = SpinorField(self.space, self.values - other.values)
        if self._hat is not None and other._hat is not None:
            out._hat = self._hat - other._hat
        return out

    def __neg__(self) -> "SpinorField":
        out = SpinorField(self.space, -self.values)
        if self._hat is not None:
            out._hat = -self._hat
        return out

    def __mul__(self, scalar) -> "SpinorField":
        out = SpinorField(self.space, self.values * scalar)
        if self._hat is not None:
            out._hat = self._hat * scalar
        return out

    __rmul__ = __mul__


@dataclass(eq=False)
class SpectralSplit:
    """Positive/negative spectral components of a field (u = plus + minus)."""

    plus: SpinorField
    minus: SpinorField

    def reassemble(self) -> SpinorField:
        return self.plus + self.minus


def l2_inner(u: SpinorField, v: SpinorField) -> float:
    """Real part of the L2 pairing, cell-volume quadrature."""
    acc = float(np.real(np.sum(u.values * np.conj(v.values))))
    return u.space.grid.cell_volume * acc


def l2_norm(u: SpinorField) -> float:
    acc = float(np.sum(np.abs(u.values) ** 2))
    return float(np.sqrt(u.space.grid.cell_volume * acc))


def e_inner(u: SpinorField, v: SpinorField) -> float:
    """Form-domain inner product: each mode weighted by lambda(xi)."""
    sp = u.space
    pair = np.sum(u.hat * np.conj(v.hat), axis=0)
    return sp.grid.cell_volume * float(np.real(np.sum(sp.lam * pair)))


def e_norm(u: SpinorField) -> float:
    sp = u.space
    dens = np.sum(np.abs(u.hat) ** 2, axis=0)
    return float(np.sqrt(sp.grid.cell_volume * float(np.sum(sp.lam * dens))))


def h_half_norm(u: SpinorField) -> float:
    """Multiplier norm with weight sqrt(1 + |xi|^2)."""
    sp = u.space
    dens = np.sum(np.abs(u.hat) ** 2, axis=0)
    return float(np.sqrt(sp.grid.cell_volume * float(np.sum(sp.hhalf_weight * dens))))


def split(u: SpinorField) -> SpectralSplit:
    """Decompose u into its positive/negative spectral parts."""
    sp = u.space
    sym_hat = sp.apply_symbol_hat(u.hat)
    plus_hat = 0.5 * (u.hat + sym_hat / sp.lam)
    minus_hat = u.hat - plus_hat
    return SpectralSplit(
        SpinorField.from_hat(sp, plus_hat),
        SpinorField.from_hat(sp, minus_hat),
    )


def apply_h0(u: SpinorField) -> SpinorField:
    """Apply the free Dirac operator as a Fourier multiplier."""
    return SpinorField.from_hat(u.space, u.space.apply_symbol_hat(u.hat))


def riesz_plus(u: SpinorField) -> SpinorField:
    """Plus-part representative of z -> l2_inner(u, z) in the e_inner metric."""
    sp = u.space
    return SpinorField.from_hat(sp, sp.plus_hat(u.hat / sp.lam))


def riesz_minus(u: SpinorField) -> SpinorField:
    """Minus-part representative of z -> l2_inner(u, z) in the e_inner metric."""
    sp = u.space
    return SpinorField.from_hat(sp, sp.minus_hat(u.hat / sp.lam))


def in_plus_cone(u: SpinorField) -> bool:
    """Whether e_norm(u) < sqrt(m + 1) * l2_norm(u) (the admissible open cone)."""
    return e_norm(u) < np.sqrt(u.space.mass + 1.0) * l2_norm(u)


def normalized(u: SpinorField, target: float = 1.0) -> SpinorField:
    n = l2_norm(u)
    if n == 0.0:
        raise ValueError("cannot normalize the zero field")
    return u * (target / n)


def constant_field(space: DiracSpace, chi) -> SpinorField:
    """Spatially constant field with spinor value chi."""
    chi = np.asarray(chi, dtype=np.complex128).reshape(4)
    n = space.grid.n_per_axis
    values = np.broadcast_to(chi[:, None, None, None], (4, n, n, n)).copy()
    return SpinorField(space, values)


def plane_wave(space: DiracSpace, mode_index, chi) -> SpinorField:
    """exp(i xi.x) chi for the lattice frequency xi = (2 pi / L) * mode_index."""
    chi = np.asarray(chi, dtype=np.complex128).reshape(4)
    kx, ky, kz = (2.0 * np.pi / space.grid.box_length) * np.asarray(mode_index, float)
    x, y, z = space.grid.position_mesh()
    phase = np.exp(1j * (kx * x + ky * y + kz * z))
    return SpinorField(space, chi[:, None, None, None] * phase[None, :, :, :])


def eigen_spinor(space: DiracSpace, mode_index, branch: str = "plus") -> ArrayC:
    """Unit spinor spanning the requested eigenspace of the symbol at a mode."""
    xi = (2.0 * np.pi / space.grid.box_length) * np.asarray(mode_index, float)
    p_plus, p_minus = spectral_projectors(xi, space.symbol)
    proj = p_plus if branch == "plus" else p_minus
    col = proj[:, int(np.argmax(np.real(np.diag(proj))))]
    return col / np.linalg.norm(col)


def eigenmode(space: DiracSpace, mode_index, branch: str = "plus") -> SpinorField:
    """Plane-wave eigenfield of the free operator at a lattice frequency."""
    return plane_wave(space, mode_index, eigen_spinor(space, mode_index, branch))


def random_field(
    space: DiracSpace,
    rng: np.random.Generator,
    bandwidth: float | None = None,
    part: str | None = None,
    target_l2: float | None = None,
) -> SpinorField:
    """Random complex field, optionally low-passed, spectrally projected, scaled.

    ``bandwidth`` applies a Gaussian frequency filter exp(-|xi|^2 / (2 bw^2));
    ``part`` in {"plus", "minus"} projects onto one spectral half.
    """
    n = space.grid.n_per_axis
    hat = rng.standard_normal((4, n, n, n)) + 1j * rng.standard_normal((4, n, n, n))
    if bandwidth is not None:
        ksq = space.lam**2 - space.mass**2
        hat = hat * np.exp(-ksq / (2.0 * bandwidth**2))
    if part == "plus":
        hat = space.plus_hat(hat)
    elif part == "minus":
        hat = space.minus_hat(hat)
    elif part is not None:
        raise ValueError(f"unknown part {part!r}")
    out = SpinorField.from_hat(space, hat)
    if target_l2 is not None:
        out = normalized(out, target_l2)
    return out


def gaussian_spinor(
    space: DiracSpace, center, width: float, chi=(1.0, 0.0, 0.0, 0.0)
) -> SpinorField:
    """Gaussian envelope exp(-|x - c|^2 / (2 w^2)) times a constant spinor."""
    chi = np.asarray(chi, dtype=np.complex128).reshape(4)
    cx, cy, cz = np.asarray(center, dtype=float)
    x, y, z = space.grid.position_mesh()
    env = np.exp(-((x - cx) ** 2 + (y - cy) ** 2 + (z - cz) ** 2) / (2.0 * width**2))
    return SpinorField(space, chi[:, None, None, None] * env[None, :, :, :].astype(np.complex128))
