"""Legendre elliptic integrals in the parameter convention.

    F(phi | r) = int_0^phi (1 - r sin^2 t)^{-1/2} dt
    E(phi | r) = int_0^phi (1 - r sin^2 t)^{1/2} dt

For r > 1 the integrand is real only while r sin^2 t <= 1.  Those cases go
through the reciprocal-parameter transformation, which turns the endpoint
r sin^2 phi = 1 into a complete integral instead of a square-root singularity.
"""
from __future__ import annotations

from enum import Enum

import numpy as np
from scipy import special

from .errors import DomainError

ENDPOINT_SLACK = 1e-12


class Kind(str, Enum):
    F = "F"
    E_INCOMPLETE = "E_incomplete"
    K = "K"
    E_COMPLETE = "E_complete"


def _incomplete(phi, r: float):
    """(F(phi|r), E(phi|r)) for scalar or array ``phi`` and scalar ``r``."""
    phi = np.asarray(phi, dtype=float)
    r = float(r)
    if r <= 1.0:
        return special.ellipkinc(phi, r), special.ellipeinc(phi, r)
    sin = np.abs(np.sin(phi))
    s = np.sqrt(r) * sin
    if np.any(s > 1.0 + ENDPOINT_SLACK) or np.any(np.abs(phi) > np.pi / 2):
        raise DomainError(
            f"r sin^2(phi) = {np.max(s) ** 2:.15g} > 1: integrand not real "
            "on the range")
    # 1 - r sin^2 without cancellation keeps beta accurate next to the branch point
    rest = np.maximum(np.cos(phi) ** 2 - (r - 1.0) * sin ** 2, 0.0)
    beta = np.copysign(np.arctan2(np.minimum(s, 1.0), np.sqrt(rest)), phi)
    q = 1.0 / r
    root = np.sqrt(r)
    f_q = special.ellipkinc(beta, q)
    return f_q / root, root * special.ellipeinc(beta, q) - (r - 1.0) / root * f_q


def _out(value):
    return float(value) if np.ndim(value) == 0 else value


def ellip_f(phi, r: float):
    return _out(_incomplete(phi, r)[0])


def ellip_e(phi, r: float):
    return _out(_incomplete(phi, r)[1])


def ellip_k(r: float) -> float:
    """Complete first kind; K(1) = inf."""
    r = float(r)
    if r > 1.0:
        raise DomainError(f"K(r) needs r <= 1, got {r}")
    return float(special.ellipk(r))


def ellip_e_complete(r: float) -> float:
    r = float(r)
    if r > 1.0:
        raise DomainError(f"E(r) needs r <= 1, got {r}")
    return float(special.ellipe(r))


def elliptic(kind, phi: float | None, r: float) -> float:
    """Dispatch on ``kind``; ``phi`` is ignored for the complete integrals."""
    kind = Kind(kind)
    if kind is Kind.F:
        return ellip_f(phi, r)
    if kind is Kind.E_INCOMPLETE:
        return ellip_e(phi, r)
    if kind is Kind.K:
        return ellip_k(r)
    return ellip_e_complete(r)
