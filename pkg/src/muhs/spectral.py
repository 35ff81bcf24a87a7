"""Fourier collocation on the unit circle S^1 = R/Z.

Fields are sampled on the uniform grid x_j = j/n, j = 0..n-1.  Wavenumbers
are 2*pi*k, so the circumference is exactly one and ``mean`` coincides with
the integral over the circle.

The inertia operator ``A = mu - d^2/dx^2`` acts diagonally on Fourier
modes: the mean is left alone and mode k is scaled by (2 pi k)^2.  Two
independent inverses are provided, a diagonal division and the explicit
triple-antiderivative formula; their agreement is a structural check.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import InvalidInput

EPS_OP = 1e-10
EPS_FFT = 1e-12
# Fourier coefficients this far below the largest are treated as round-off
CHOP = 1e-15

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class PeriodicGrid:
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 8 or self.n % 2:
            raise InvalidInput(f"grid size must be even and >= 8, got {self.n}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def h(self) -> float:
        return 1.0 / self.n

    @cached_property
    def x(self) -> np.ndarray:
        nodes = np.arange(self.n) * self.h
        nodes.flags.writeable = False
        return nodes

    @cached_property
    def k(self) -> np.ndarray:
        """Integer wavenumbers in numpy FFT order (Nyquist is -n/2)."""
        ks = np.fft.fftfreq(self.n, d=1.0 / self.n)
        ks.flags.writeable = False
        return ks

    def field(self, values) -> "RealField":
        return RealField(self, values)

    def constant(self, c: float) -> "RealField":
        return RealField(self, np.full(self.n, float(c)))

    def from_function(self, f) -> "RealField":
        return RealField(self, f(self.x))


@dataclass(frozen=True, eq=False)
class RealField:
    """Real periodic function sampled on a :class:`PeriodicGrid`.

    Samples are stored read-only; Fourier coefficients (normalised so that
    ``coeffs[0]`` is the mean) are computed lazily.
    """

    grid: PeriodicGrid
    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.array(self.samples, dtype=float)
        if values.shape != (self.grid.n,):
            raise InvalidInput(
                f"expected {self.grid.n} samples, got shape {values.shape}")
        values.flags.writeable = False
        object.__setattr__(self, "samples", values)

    @classmethod
    def from_coeffs(cls, grid: PeriodicGrid, coeffs) -> "RealField":
        return cls(grid, np.real(np.fft.ifft(np.asarray(coeffs) * grid.n)))

    @cached_property
    def coeffs(self) -> np.ndarray:
        c = np.fft.fft(self.samples) / self.grid.n
        c.flags.writeable = False
        return c

    @property
    def n(self) -> int:
        return self.grid.n

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    def __len__(self):
        return self.grid.n

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.samples, dtype=dtype)

    def _other(self, other):
        if isinstance(other, RealField):
            if other.grid.n != self.grid.n:
                raise InvalidInput("fields live on different grids")
            return other.samples
        return other

    def __add__(self, other):
        return RealField(self.grid, self.samples + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return RealField(self.grid, self.samples - self._other(other))

    def __rsub__(self, other):
        return RealField(self.grid, self._other(other) - self.samples)

    def __mul__(self, other):
        return RealField(self.grid, self.samples * self._other(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return RealField(self.grid, self.samples / self._other(other))

    def __neg__(self):
        return RealField(self.grid, -self.samples)

    def __pow__(self, p):
        return RealField(self.grid, self.samples ** p)

    def map(self, func) -> "RealField":
        return RealField(self.grid, func(self.samples))


# ---------------------------------------------------------------------------
# array kernels (used directly by the time stepper to avoid wrapping cost)

def _spec_derivative(values: np.ndarray, order: int) -> np.ndarray:
    n = values.shape[-1]
    k = np.fft.rfftfreq(n, d=1.0 / n)
    mult = (1j * TWO_PI * k) ** order
    if order % 2:
        mult[-1] = 0.0
    return np.fft.irfft(np.fft.rfft(values) * mult, n)


def _clean_derivative(values: np.ndarray, order: int) -> np.ndarray:
    """Spectral derivative after dropping round-off coefficients.

    High derivatives multiply the ~1e-16 noise floor by (2 pi k)^order; for
    band-limited data that noise is the only content of those modes.
    """
    n = values.shape[-1]
    hat = np.fft.rfft(values)
    mag = np.abs(hat)
    hat[mag < CHOP * mag.max()] = 0.0
    k = np.fft.rfftfreq(n, d=1.0 / n)
    mult = (1j * TWO_PI * k) ** order
    if order % 2:
        mult[-1] = 0.0
    return np.fft.irfft(hat * mult, n)


def _ainv_hat(n: int) -> np.ndarray:
    """rfft-ordered multiplier of the spectral A^{-1}."""
    k = np.fft.rfftfreq(n, d=1.0 / n)
    mult = np.ones_like(k)
    mult[1:] = 1.0 / (TWO_PI * k[1:]) ** 2
    return mult


def _ainv_dx_hat(n: int) -> np.ndarray:
    k = np.fft.rfftfreq(n, d=1.0 / n)
    mult = np.zeros(k.shape, dtype=complex)
    mult[1:] = 1j / (TWO_PI * k[1:])
    mult[-1] = 0.0
    return mult


def _dealias_values(values: np.ndarray) -> np.ndarray:
    n = values.shape[-1]
    k = np.fft.rfftfreq(n, d=1.0 / n)
    hat = np.fft.rfft(values)
    hat[k > n / 3.0] = 0.0
    return np.fft.irfft(hat, n)


def _primitive_zero_mean(values: np.ndarray) -> np.ndarray:
    """Zero-mean periodic antiderivative of the fluctuating part of ``values``."""
    n = values.shape[-1]
    k = np.fft.rfftfreq(n, d=1.0 / n)
    hat = np.fft.rfft(values)
    out = np.zeros_like(hat)
    out[1:] = hat[1:] / (1j * TWO_PI * k[1:])
    out[-1] = 0.0
    return np.fft.irfft(out, n)


def _running_integrals(values: np.ndarray, x: np.ndarray):
    """Return (I1, I2, int I1, int I2) with I1 = int_0^x w and I2 = int_0^x I1.

    The mean part contributes polynomials in x that are handled exactly; the
    fluctuating part is integrated spectrally.
    """
    wbar = values.mean()
    p1 = _primitive_zero_mean(values)
    p2 = _primitive_zero_mean(p1)
    i1 = wbar * x + (p1 - p1[0])
    i2 = wbar * x ** 2 / 2.0 + (p2 - p2[0]) - p1[0] * x
    # means over the circle of the two running integrals
    int_i1 = wbar / 2.0 - p1[0]
    int_i2 = wbar / 6.0 - p2[0] - p1[0] / 2.0
    return i1, i2, int_i1, int_i2


# ---------------------------------------------------------------------------
# public operations

def mean(u: RealField) -> float:
    """Spatial mean, i.e. the zeroth Fourier coefficient."""
    return float(np.mean(u.samples))


def integral(u: RealField) -> float:
    """Integral over the unit circle (equal to the mean)."""
    return mean(u)


def derivative(u: RealField, order: int = 1) -> RealField:
    if order < 1:
        raise InvalidInput("derivative order must be positive")
    return RealField(u.grid, _spec_derivative(u.samples, order))


def apply_A(u: RealField) -> RealField:
    """Inertia operator ``mu(u) - u_xx``."""
    return RealField(u.grid, mean(u) - _spec_derivative(u.samples, 2))


def apply_A_inverse(w: RealField, method: str = "spectral") -> RealField:
    """Invert the inertia operator.

    ``method="spectral"`` divides every non-zero mode by (2 pi k)^2.
    ``method="quadrature"`` evaluates the closed triple-antiderivative
    representation of the inverse, with the repeated antiderivatives taken
    spectrally so both routes are accurate to round-off.
    """
    method = method.lower()
    if method == "spectral":
        n = w.n
        hat = np.fft.rfft(w.samples) * _ainv_hat(n)
        return RealField(w.grid, np.fft.irfft(hat, n))
    if method == "quadrature":
        x = w.x
        wbar = mean(w)
        i1, i2, int_i1, int_i2 = _running_integrals(w.samples, x)
        values = ((x ** 2 / 2.0 - x / 2.0 + 13.0 / 12.0) * wbar
                  + (x - 0.5) * int_i1 - i2 + int_i2)
        return RealField(w.grid, values)
    raise InvalidInput(f"unknown inverse method {method!r}")


def ainv_dx(w: RealField) -> RealField:
    """``A^{-1} d/dx w`` from the closed first-order identity.

    (x - 1/2) int w - int_0^x w + int int_0^x w
    """
    x = w.x
    i1, _, int_i1, _ = _running_integrals(w.samples, x)
    return RealField(w.grid, (x - 0.5) * mean(w) - i1 + int_i1)


def dealias(u: RealField) -> RealField:
    """Two-thirds rule: drop every mode with |k| > n/3."""
    return RealField(u.grid, _dealias_values(u.samples))


def interpolate(u: RealField, x) -> float | np.ndarray:
    """Evaluate the trigonometric interpolant of ``u`` at arbitrary points."""
    xs = np.asarray(x, dtype=float)
    vals = _interp_values(u.samples, np.atleast_1d(xs))
    return float(vals[0]) if xs.ndim == 0 else vals.reshape(xs.shape)


def _interp_values(samples: np.ndarray, xs: np.ndarray, hat=None) -> np.ndarray:
    n = samples.shape[-1]
    if hat is None:
        hat = np.fft.rfft(samples) / n
    k = np.arange(hat.shape[0])
    weights = np.full(k.shape, 2.0)
    weights[0] = 1.0
    weights[-1] = 1.0  # Nyquist mode enters once, as a cosine
    phase = np.exp(1j * TWO_PI * np.outer(xs, k))
    if n % 2 == 0:
        phase[:, -1] = np.cos(TWO_PI * (n // 2) * xs)
    return np.real(phase @ (weights * hat))


# ---------------------------------------------------------------------------
# discrete norms

def l2_inner(u: RealField, v: RealField) -> float:
    return float(np.mean(u.samples * v.samples))


def l2_norm(u: RealField) -> float:
    return float(np.sqrt(np.mean(u.samples ** 2)))


def sup_norm(u: RealField) -> float:
    return float(np.max(np.abs(u.samples)))


def c1_norm(u: RealField) -> float:
    return max(sup_norm(u), sup_norm(derivative(u, 1)))


def parseval_energy(u: RealField) -> float:
    """Sum of squared Fourier coefficient moduli."""
    return float(np.sum(np.abs(u.coeffs) ** 2))


def random_bandlimited(grid: PeriodicGrid, rng, kmax: int | None = None,
                       decay: float = 1.0, zero_mean: bool = False) -> RealField:
    """Random real trigonometric polynomial of degree ``kmax``.

    Mode amplitudes fall off like ``k**-decay``; used by property tests and
    the self-test command.
    """
    if kmax is None:
        kmax = grid.n // 8
    k = np.arange(1, kmax + 1)
    amp = rng.standard_normal(kmax) + 1j * rng.standard_normal(kmax)
    amp = amp / k ** decay
    hat = np.zeros(grid.n // 2 + 1, dtype=complex)
    hat[1:kmax + 1] = amp * grid.n / 2.0
    if not zero_mean:
        hat[0] = rng.standard_normal() * grid.n
    return RealField(grid, np.fft.irfft(hat, grid.n))
