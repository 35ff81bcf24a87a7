"""Seeded property suite behind ``muhs selftest``.

Each check draws its inputs from one ``numpy.random.Generator`` so a given
seed always exercises the same cases.  Oracles here use only the runtime
dependencies (closed forms and ``scipy.integrate.quad``).
"""
from __future__ import annotations

import sys
import time

import numpy as np
from scipy import integrate

from . import elliptic, evolution, geometry, hierarchy, spectral, waves
from .errors import ParseError
from .initspec import parse_init, random_spec
from .spectral import PeriodicGrid, RealField


def _rel(a: RealField, b: RealField) -> float:
    scale = max(spectral.sup_norm(b), 1e-300)
    return float(np.max(np.abs(a.samples - b.samples)) / scale)


def check_operators(rng):
    grid = PeriodicGrid(128)
    worst = 0.0
    for _ in range(20):
        u = spectral.random_bandlimited(grid, rng, kmax=40)
        for method in ("spectral", "quadrature"):
            back = spectral.apply_A(spectral.apply_A_inverse(u, method))
            worst = max(worst, _rel(back, u))
        worst = max(worst, _rel(spectral.apply_A_inverse(u, "quadrature"),
                                spectral.apply_A_inverse(u)))
        composed = spectral.derivative(spectral.apply_A_inverse(u))
        worst = max(worst, spectral.sup_norm(spectral.ainv_dx(u) - composed)
                    / spectral.sup_norm(u))
        id2 = spectral.apply_A_inverse(spectral.derivative(u, 2))
        worst = max(worst, _rel(id2, spectral.mean(u) - u))
    return worst, spectral.EPS_OP


def check_parseval(rng):
    grid = PeriodicGrid(64)
    worst = 0.0
    for _ in range(20):
        u = spectral.random_bandlimited(grid, rng)
        direct = float(np.mean(u.samples ** 2))
        worst = max(worst, abs(spectral.parseval_energy(u) - direct) / direct)
    return worst, spectral.EPS_FFT


def check_grammar(rng):
    for _ in range(100):
        spec = random_spec(rng)
        if parse_init(spec.render()).terms != spec.terms:
            return 1.0, 0.0
    try:
        parse_init("cos(1")
    except ParseError as exc:
        return float(exc.offset != 5), 0.5
    return 1.0, 0.0


def check_elliptic(rng):
    worst = 0.0
    for _ in range(20):
        r = float(rng.uniform(-2.0, 0.95))
        phi = float(rng.uniform(0.0, np.pi / 2))
        f_ref = integrate.quad(lambda t: (1 - r * np.sin(t) ** 2) ** -0.5, 0, phi,
                               epsabs=0, epsrel=1e-13)[0]
        e_ref = integrate.quad(lambda t: (1 - r * np.sin(t) ** 2) ** 0.5, 0, phi,
                               epsabs=0, epsrel=1e-13)[0]
        worst = max(worst, abs(elliptic.ellip_f(phi, r) - f_ref) / f_ref,
                    abs(elliptic.ellip_e(phi, r) - e_ref) / e_ref)
    return worst, 1e-12


def _quad_stats(c, m, M, mu):
    """Period and integral of a mu > 0 wave by Gauss-Jacobi-type quadrature."""
    if M < c:  # smooth: phi in [m, M], weight ((phi-m)(M-phi))^(-1/2)
        lo, hi, weight = m, M, (-0.5, -0.5)
        f = lambda p: np.sqrt((c - p) / (2 * mu))  # noqa: E731
    else:      # cusped: phi in [m, c], weight (phi-m)^(-1/2) (c-phi)^(1/2)
        lo, hi, weight = m, c, (-0.5, 0.5)
        f = lambda p: 1.0 / np.sqrt(2 * mu * (M - p))  # noqa: E731
    opts = dict(weight="alg", wvar=weight, epsabs=0, epsrel=1e-13, limit=200)
    period = 2 * integrate.quad(f, lo, hi, **opts)[0]
    total = 2 * integrate.quad(lambda p: p * f(p), lo, hi, **opts)[0]
    return period, total


def check_wave_stats(rng):
    worst = 0.0
    for _ in range(10):
        c = float(rng.uniform(0.5, 2.0))
        m = c * float(rng.uniform(0.05, 0.9))
        if rng.random() < 0.5:
            M = m + (c - m) * float(rng.uniform(0.05, 0.95))
        else:
            M = c + (c - m) * float(rng.uniform(0.1, 5.0))
        mu = float(rng.uniform(0.25, 4.0))
        got = waves.wave_stats(c, m, M, mu)
        ref = _quad_stats(c, m, M, mu)
        worst = max(worst, *(abs(g - r) / abs(r) for g, r in zip(got, ref)))
        scaled = waves.wave_stats(c, m, M, 4 * mu)
        worst = max(worst, *(abs(s - 0.5 * g) / abs(g) for s, g in zip(scaled, got)))
    return worst, 1e-9


def check_hierarchy(rng):
    grid = PeriodicGrid(128)
    worst = 0.0
    for _ in range(5):
        w = spectral.random_bandlimited(grid, rng, kmax=4, zero_mean=True)
        m = 1.0 + w * (0.3 / spectral.sup_norm(w))
        u = spectral.apply_A_inverse(m)
        kernel = hierarchy.b1(hierarchy.momentum(u), hierarchy.gradient(-1, u))
        worst = max(worst, spectral.sup_norm(kernel), *hierarchy.bihamiltonian_residual(u))
    return worst, 1e-7


def check_virasoro(rng):
    grid = PeriodicGrid(128)
    u = 1.0 + 0.01 * spectral.random_bandlimited(grid, rng, kmax=3, zero_mean=True)
    return max(hierarchy.virasoro_equivalence_residual(u, k) for k in (0.0, 0.5)), 1e-7


def check_curvature(rng):
    grid = PeriodicGrid(32)
    worst = 0.0
    for _ in range(10):
        u = spectral.random_bandlimited(grid, rng, kmax=6)
        v = spectral.random_bandlimited(grid, rng, kmax=6)
        a, b = geometry.curvature_quadratic(u, v), geometry.curvature_expanded(u, v)
        worst = max(worst, abs(a - b) / max(abs(a), 1.0))
    return worst, 1e-10


def check_conservation(rng):
    grid = PeriodicGrid(64)
    u0 = 1.0 + 0.05 * spectral.random_bandlimited(grid, rng, kmax=3, zero_mean=True)
    traj = evolution.integrate(u0, evolution.EvolutionConfig(n=64, t_end=0.05))
    return max(traj.drift("H1", True), traj.drift("r0", True)), 1e-7


CHECKS = (
    ("operator identities", check_operators),
    ("Parseval", check_parseval),
    ("init grammar round trip", check_grammar),
    ("elliptic integrals vs quadrature", check_elliptic),
    ("wave statistics vs quadrature", check_wave_stats),
    ("hierarchy identities", check_hierarchy),
    ("Virasoro three-way agreement", check_virasoro),
    ("curvature two-formula agreement", check_curvature),
    ("short-run conservation", check_conservation),
)


def run_selftest(seed: int = 12345, stream=None) -> int:
    """Run every check; print one line each and return the failure count."""
    stream = stream or sys.stdout
    failures = 0
    for index, (name, check) in enumerate(CHECKS):
        rng = np.random.default_rng([seed, index])
        start = time.perf_counter()
        try:
            value, limit = check(rng)
            ok = bool(value <= limit)
            detail = f"{value:.3e} (limit {limit:.1e})"
        except Exception as exc:  # a crash is a failure, not an abort
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        failures += not ok
        print(f"{'PASS' if ok else 'FAIL'}  {name:<34} {detail}  "
              f"[{time.perf_counter() - start:.2f}s]", file=stream)
    print(f"{len(CHECKS) - failures}/{len(CHECKS)} checks passed (seed {seed})", file=stream)
    return failures
