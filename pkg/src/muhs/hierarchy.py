"""Bihamiltonian structure and the conservation-law ladder.

With momentum m = Au the equation reads m_t = B1 dH1/dm = B2 dH2/dm for

    B1 = -(m d/dx + d/dx m),     B2 = d^3/dx^3.

Functionals are indexed -3..2; index -3 only has a gradient.  Lower rungs
come from the recursion B1 dH_{-n-1}/dm = B2 dH_{-n}/dm, which fixes the new
gradient up to a multiple of the kernel direction 1/sqrt(m).
"""
from __future__ import annotations

import numpy as np

from . import spectral
from .errors import (InvalidInput, NonPeriodicAntiderivative,
                     NonPositiveMomentum)
from .evolution import rhs
from .spectral import RealField, _dealias_values, _primitive_zero_mean

FUNCTIONAL_IDS = (-3, -2, -1, 0, 1, 2)
POSITIVITY_RATIO = 1e-8
ZERO_MEAN_TOL = 1e-8


def _check_id(index, allow_gradient_only=True):
    allowed = FUNCTIONAL_IDS if allow_gradient_only else FUNCTIONAL_IDS[1:]
    if index not in allowed:
        raise InvalidInput(f"functional index {index} not in {allowed}")


def _require_positive(m: RealField):
    mv = m.samples
    if not np.min(mv) > POSITIVITY_RATIO * np.max(np.abs(mv)):
        raise NonPositiveMomentum(
            f"momentum must be positive (min m = {np.min(mv):.3g})")


def _d(values, order=1):
    return spectral._clean_derivative(values, order)


def momentum(u: RealField) -> RealField:
    """m = mu(u) - u_xx."""
    return RealField(u.grid, spectral.mean(u) - _d(u.samples, 2))


def b1(m: RealField, f: RealField) -> RealField:
    """Lie-Poisson operator -(m f_x + (m f)_x), products dealiased."""
    mf = _dealias_values(m.samples * f.samples)
    m_fx = _dealias_values(m.samples * _d(f.samples))
    return RealField(m.grid, -(m_fx + _d(mf)))


def b2(f: RealField) -> RealField:
    """Frozen operator d^3/dx^3."""
    return RealField(f.grid, _d(f.samples, 3))


def functional_value(index: int, u: RealField) -> float:
    _check_id(index, allow_gradient_only=False)
    m = momentum(u)
    mv = m.samples
    if index == -2:
        _require_positive(m)
        mx = _d(mv)
        return float(-np.mean(mx * mx / mv ** 2.5) / 16.0)
    if index == -1:
        _require_positive(m)
        return float(np.mean(np.sqrt(mv)))
    if index == 0:
        return float(np.mean(mv))
    if index == 1:
        return float(0.5 * np.mean(u.samples * mv))
    ux = _d(u.samples)
    return float(np.mean(spectral.mean(u) * u.samples ** 2
                         + 0.5 * u.samples * ux * ux))


def _gradient_h2(u: RealField, k: float = 0.0) -> RealField:
    uv = u.samples
    mu = spectral.mean(u)
    ux, uxx = _d(uv), _d(uv, 2)
    inner = np.mean(uv * uv) + 2.0 * mu * uv - 0.5 * ux * ux - uv * uxx
    if k:
        inner = inner + k * (mu - uxx)
    return spectral.apply_A_inverse(RealField(u.grid, inner))


def gradient(index: int, u: RealField) -> RealField:
    """Variational derivative dH_index/dm as a field."""
    _check_id(index)
    grid = u.grid
    if index == 0:
        return grid.constant(1.0)
    if index == 1:
        return u
    if index == 2:
        return _gradient_h2(u)
    m = momentum(u)
    _require_positive(m)
    mv = m.samples
    if index == -1:
        return RealField(grid, 0.5 / np.sqrt(mv))
    m1, m2 = _d(mv), _d(mv, 2)
    if index == -2:
        return RealField(grid, m2 / (8 * mv ** 2.5) - 5 * m1 ** 2 / (32 * mv ** 3.5))
    m3, m4 = _d(mv, 3), _d(mv, 4)
    values = (1155 * m1 ** 4 / (1024 * mv ** 6.5)
              - 231 * m1 ** 2 * m2 / (128 * mv ** 5.5)
              + 21 * m2 ** 2 / (64 * mv ** 4.5)
              + 7 * m1 * m3 / (16 * mv ** 4.5)
              - m4 / (16 * mv ** 3.5))
    return RealField(grid, values)


def lower(f: RealField, m: RealField) -> RealField:
    """One step down the ladder: -(1/(2 sqrt m)) * int^x (1/sqrt m) f_xxx.

    The antiderivative is the zero-mean periodic one; it only exists when the
    integrand has zero mean, which is checked.
    """
    _require_positive(m)
    root = np.sqrt(m.samples)
    integrand = _d(f.samples, 3) / root
    scale = max(1.0, float(np.max(np.abs(integrand))))
    if abs(np.mean(integrand)) > ZERO_MEAN_TOL * scale:
        raise NonPeriodicAntiderivative(
            f"(1/sqrt m) f_xxx has mean {np.mean(integrand):.3g}; "
            "no periodic antiderivative")
    return RealField(m.grid, -_primitive_zero_mean(integrand) / (2.0 * root))


def kernel_fit(candidate: RealField, target: RealField, m: RealField):
    """Least-squares alpha with candidate + alpha/sqrt(m) ~ target.

    Returns (alpha, sup residual).
    """
    direction = 1.0 / np.sqrt(m.samples)
    diff = target.samples - candidate.samples
    alpha = float(np.dot(direction, diff) / np.dot(direction, direction))
    return alpha, float(np.max(np.abs(diff - alpha * direction)))


def hn_from_gradient(n: int, u: RealField) -> float:
    """H_{-n} = (3/2 - n)^{-1} int m dH_{-n}/dm."""
    if n not in (1, 2, 3):
        raise InvalidInput("n must be 1, 2 or 3")
    m = momentum(u)
    g = gradient(-n, u)
    return float(np.mean(m.samples * g.samples) / (1.5 - n))


def flow_field(index: int, u: RealField) -> RealField:
    """m_t = B1 dH_index/dm."""
    return b1(momentum(u), gradient(index, u))


def bihamiltonian_residual(u: RealField) -> tuple[float, float]:
    m = momentum(u)
    lp = b1(m, u).samples
    frozen = b2(gradient(2, u)).samples
    ux = _d(u.samples)
    explicit = -2.0 * m.samples * ux - _d(m.samples) * u.samples
    return (float(np.max(np.abs(lp - frozen))),
            float(np.max(np.abs(lp - explicit))))


# ---------------------------------------------------------------------------
# Virasoro side

class VirasoroPoint:
    """Point (m, a) of the Virasoro dual; ``a`` is the central coordinate."""

    __slots__ = ("m", "a")

    def __init__(self, m: RealField, a: float):
        self.m = m
        self.a = float(a)

    def __repr__(self):
        return f"VirasoroPoint(n={self.m.n}, a={self.a!r})"


def virasoro_coadjoint(v: RealField, b: float, p: VirasoroPoint) -> VirasoroPoint:
    """ad*_{(v,b)}(m, a) = (m_x v + 2 m v_x + a v_xxx, 0); ``b`` drops out."""
    mv, vv = p.m.samples, v.samples
    values = _d(mv) * vv + 2.0 * mv * _d(vv) + p.a * _d(vv, 3)
    return VirasoroPoint(RealField(v.grid, values), 0.0)


def frozen_flow(h_grad: RealField, p0: VirasoroPoint) -> RealField:
    """m_t for the bracket frozen at p0 with Hamiltonian gradient ``h_grad``."""
    m0, g = p0.m.samples, h_grad.samples
    return RealField(h_grad.grid,
                     -_d(m0) * g - 2.0 * m0 * _d(g) - p0.a * _d(g, 3))


def virasoro_equivalence_residual(u: RealField, k: float) -> float:
    """Largest pairwise gap between three evaluations of m_t.

    (i) A applied to the evolution right-hand side with shift k;
    (ii) the Euler (Lie-Poisson) flow at central charge a = -k, evaluated at
         the shifted field u - k;
    (iii) the bracket frozen at (0, -1) applied to dH2/dm with the k m term,
         also at u - k.
    """
    grid = u.grid
    via_rhs = spectral.apply_A(rhs(u, k)).samples
    w = u - k
    point = VirasoroPoint(momentum(w), -k)
    via_lp = -virasoro_coadjoint(w, 0.0, point).m.samples
    via_frozen = frozen_flow(_gradient_h2(w, k),
                             VirasoroPoint(grid.constant(0.0), -1.0)).samples
    gaps = (via_rhs - via_lp, via_rhs - via_frozen, via_lp - via_frozen)
    return float(max(np.max(np.abs(g)) for g in gaps))
