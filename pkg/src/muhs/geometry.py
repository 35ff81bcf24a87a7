"""Right-invariant metric at the identity and its curvature.

    <u, v> = mu(u) mu(v) + int u_x v_x
    Gamma(u, v) = -A^{-1} d/dx (mu(u) v + mu(v) u + u_x v_x / 2)

The curvature form <R(u, v)v, u> is evaluated twice: once from Gamma and the
metric, once from the fully expanded integral expression.  Inputs are
zero-padded to four times their grid size first, so that every product and
every quadrature below is exact for band-limited data.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import spectral
from .errors import DegeneratePlane
from .spectral import PeriodicGrid, RealField

PAD = 4
GRAM_TOL = 1e-12


def _pad(u: RealField, size: int) -> np.ndarray:
    n = u.n
    if size == n:
        return u.samples
    hat = np.fft.rfft(u.samples)
    out = np.zeros(size // 2 + 1, dtype=complex)
    out[: n // 2] = hat[: n // 2]
    out[n // 2] = 0.5 * hat[n // 2].real  # split Nyquist evenly
    return np.fft.irfft(out, size) * (size / n)


def _lift(*fields: RealField):
    size = PAD * max(f.n for f in fields)
    grid = PeriodicGrid(size)
    return grid, [RealField(grid, _pad(f, size)) for f in fields]


def _dx(values):
    return spectral._spec_derivative(values, 1)


def _m(values) -> float:
    return float(np.mean(values))


def _inner(u: np.ndarray, v: np.ndarray) -> float:
    return _m(u) * _m(v) + _m(_dx(u) * _dx(v))


def _gamma(u: np.ndarray, v: np.ndarray, grid: PeriodicGrid) -> np.ndarray:
    inner = _m(u) * v + _m(v) * u + 0.5 * _dx(u) * _dx(v)
    return -spectral.ainv_dx(RealField(grid, inner)).samples


def metric_inner(u: RealField, v: RealField) -> float:
    _, (uu, vv) = _lift(u, v)
    return _inner(uu.samples, vv.samples)


def christoffel(u: RealField, v: RealField) -> RealField:
    """Gamma(u, v) on the input grid (products formed on the padded grid)."""
    grid, (uu, vv) = _lift(u, v)
    g = _gamma(uu.samples, vv.samples, grid)
    hat = np.fft.rfft(g)[: u.n // 2 + 1] * (u.n / grid.n)
    hat[-1] = hat[-1].real * 2.0
    return RealField(u.grid, np.fft.irfft(hat, u.n))


def coadjoint(v: RealField, u: RealField) -> RealField:
    """ad*_v(u) = A^{-1}(2 v_x Au + v (Au)_x)."""
    m = spectral.apply_A(u).samples
    w = 2.0 * _dx(v.samples) * m + v.samples * _dx(m)
    return spectral.apply_A_inverse(RealField(u.grid, w))


def curvature_quadratic(u: RealField, v: RealField) -> float:
    """<Gamma(u,v), Gamma(u,v)> - <Gamma(u,u), Gamma(v,v)> - 3 mu(u_x v)^2."""
    grid, (uu, vv) = _lift(u, v)
    a, b = uu.samples, vv.samples
    g_uv = _gamma(a, b, grid)
    g_uu = _gamma(a, a, grid)
    g_vv = _gamma(b, b, grid)
    return (_inner(g_uv, g_uv) - _inner(g_uu, g_vv)
            - 3.0 * _m(_dx(a) * b) ** 2)


def curvature_expanded(u: RealField, v: RealField) -> float:
    """The same quantity from its expansion into means and integrals."""
    _, (uu, vv) = _lift(u, v)
    a, b = uu.samples, vv.samples
    ax, bx = _dx(a), _dx(b)
    mu_a, mu_b = _m(a), _m(b)
    return (mu_a ** 2 * (_m(b * b) + _m(bx * bx))
            + mu_b ** 2 * (_m(a * a) + _m(ax * ax))
            + mu_a * _m((b * ax - a * bx) * bx)
            + mu_b * _m((a * bx - b * ax) * ax)
            - 2.0 * mu_a * mu_b * (_m(a * b) + _m(ax * bx))
            - 0.25 * _m(ax * bx) ** 2
            + 0.25 * _m(ax * ax) * _m(bx * bx)
            - 3.0 * _m(ax * b) ** 2)


def _gram(u: RealField, v: RealField) -> np.ndarray:
    uv = metric_inner(u, v)
    return np.array([[metric_inner(u, u), uv], [uv, metric_inner(v, v)]])


def sectional(u: RealField, v: RealField) -> float:
    """Sectional curvature of span(u, v), normalised by the Gram determinant."""
    det = float(np.linalg.det(_gram(u, v)))
    if det <= GRAM_TOL:
        raise DegeneratePlane(f"Gram determinant {det:.3g} <= {GRAM_TOL}")
    return curvature_quadratic(u, v) / det


@dataclass(frozen=True, eq=False)
class TangentPair:
    u: RealField
    v: RealField
    gram: np.ndarray


def orthonormal_pair(u: RealField, v: RealField) -> TangentPair:
    """Orthonormal basis (e1, e2) of span(u, v) with mu(e2) = 0."""
    gram = _gram(u, v)
    if float(np.linalg.det(gram)) <= GRAM_TOL:
        raise DegeneratePlane("u and v do not span a plane")
    mu_u, mu_v = spectral.mean(u), spectral.mean(v)
    w = mu_u * v - mu_v * u
    if np.sqrt(metric_inner(w, w)) <= GRAM_TOL:
        w = v  # both means vanish, every direction is horizontal
    e2 = w * (1.0 / np.sqrt(metric_inner(w, w)))
    # take whichever input leaves the larger remainder off e2
    rests = [f - metric_inner(f, e2) * e2 for f in (u, v)]
    norms = [metric_inner(r, r) for r in rests]
    rest = rests[int(np.argmax(norms))]
    e1 = rest * (1.0 / np.sqrt(max(norms)))
    return TangentPair(e1, e2, _gram(e1, e2))
