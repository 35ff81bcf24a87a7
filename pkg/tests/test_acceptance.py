"""Acceptance criteria, one test per criterion.

Each test prints a single line, e.g.

    AC05 PASS  local conservation law          1.62s (limit 60s)

and a FAIL line lists the sub-checks that missed their tolerance.  Run on
its own with ``python3 -m pytest tests/test_acceptance.py -v``.
"""
import json
import time

import numpy as np
import pytest

from muhs import evolution as ev
from muhs import geometry as geo
from muhs import hierarchy as hi
from muhs import spectral, waves
from muhs.cli import main
from muhs.errors import MuHSError, NumericalFailure
from muhs.initspec import parse_init, random_spec
from muhs.spectral import PeriodicGrid, RealField
from muhs.waves import Family

from test_waves import quad_stats

TWO_PI = 2 * np.pi


class Criterion:
    def __init__(self, number, title, limit_s, capsys):
        self.number, self.title, self.limit = number, title, limit_s
        self.capsys = capsys
        self.failed = []
        self.start = time.perf_counter()

    def check(self, name, ok, detail=""):
        if not ok:
            self.failed.append(f"{name} ({detail})" if detail else name)

    def attempt(self, name, fn):
        """Run ``fn``; an exception counts as a failed sub-check."""
        try:
            return fn()
        except MuHSError as exc:
            self.check(name, False, f"{type(exc).__name__}: {exc}")
            return None

    def conclude(self):
        elapsed = time.perf_counter() - self.start
        self.check("runtime", elapsed < self.limit, f"{elapsed:.1f}s")
        status = "PASS" if not self.failed else "FAIL"
        line = f"AC{self.number:02d} {status}  {self.title:<34}{elapsed:7.2f}s (limit {self.limit}s)"
        if self.failed:
            line += "  failed: " + "; ".join(self.failed)
        with self.capsys.disabled():
            print("\n" + line)
        assert not self.failed, line


@pytest.fixture
def criterion(capsys):
    def make(number, title, limit_s):
        return Criterion(number, title, limit_s, capsys)
    return make


def on_grid(n, func):
    return PeriodicGrid(n).from_function(func)


def sup(f):
    return spectral.sup_norm(f)


def test_ac01_operator_identities(criterion):
    crit = criterion(1, "operator identities", 5)
    rng = np.random.default_rng(12345)
    worst = dict.fromkeys(["A A^-1", "spectral vs quadrature", "id_1", "id_2"], 0.0)
    for _ in range(50):
        u = spectral.random_bandlimited(PeriodicGrid(128), rng)
        scale = sup(u)
        inv = spectral.apply_A_inverse(u)
        worst["A A^-1"] = max(worst["A A^-1"], sup(spectral.apply_A(inv) - u) / scale)
        quad = spectral.apply_A_inverse(u, "quadrature")
        worst["spectral vs quadrature"] = max(worst["spectral vs quadrature"], sup(inv - quad) / sup(inv))
        id1 = spectral.ainv_dx(u) - spectral.derivative(inv)
        worst["id_1"] = max(worst["id_1"], sup(id1) / scale)
        id2 = spectral.apply_A_inverse(spectral.derivative(u, 2)) - (spectral.mean(u) - u)
        worst["id_2"] = max(worst["id_2"], sup(id2) / scale)
    for name, value in worst.items():
        crit.check(name, value <= 1e-10, f"{value:.2e}")
    crit.conclude()


def test_ac02_conservation(criterion):
    crit = criterion(2, "conservation", 30)
    traj = ev.integrate(on_grid(256, lambda x: 1 + 0.3 * np.cos(TWO_PI * x)), ev.EvolutionConfig(n=256, t_end=0.5))
    crit.check("completed", traj.verdict.kind == ev.COMPLETED, str(traj.verdict))
    crit.check("mu drift", traj.drift("mu") < 1e-9, f"{traj.drift('mu'):.2e}")
    crit.check("H1 drift", traj.drift("H1", True) < 1e-7, f"{traj.drift('H1', True):.2e}")
    crit.check("r0 drift", traj.drift("r0", True) < 1e-7, f"{traj.drift('r0', True):.2e}")
    crit.conclude()


def test_ac03_threshold_family(criterion):
    crit = criterion(3, "blow-up threshold family", 60)
    family = lambda a, n=256: on_grid(n, lambda x: a + np.cos(TWO_PI * x))  # noqa: E731
    for a, tag in [(0.0, ev.BLOWUP_CERTIFIED), (0.5, ev.BLOWUP_CERTIFIED), (1.11, ev.BLOWUP_CERTIFIED),
                   (4 * np.pi ** 2, ev.GLOBAL), (50.0, ev.GLOBAL)]:
        got = ev.classify_initial(family(a)).tag
        crit.check(f"classify a={a:.4g}", got == tag, got)

    blow = ev.integrate(family(0.2), ev.EvolutionConfig(n=256, t_end=1.0))
    t_est = blow.verdict.t_est
    crit.check("a=0.2 blow-up detected", blow.verdict.is_blowup and t_est <= 1.1 / np.pi, str(blow.verdict))

    glob = ev.integrate(family(4 * np.pi ** 2), ev.EvolutionConfig(n=256, t_end=2.0))
    crit.check("a=4pi^2 completes t=2", glob.verdict.kind == ev.COMPLETED and glob.times[-1] == 2.0, str(glob.verdict))
    crit.check("a=4pi^2 mu drift", glob.drift("mu") < 1e-9, f"{glob.drift('mu'):.2e}")
    crit.check("a=4pi^2 H1 drift", glob.drift("H1", True) < 1e-7, f"{glob.drift('H1', True):.2e}")
    crit.check("a=4pi^2 r0 drift", glob.drift("r0", True) < 1e-7, f"{glob.drift('r0', True):.2e}")
    # A u0 >= 0 with a double zero; the momentum must stay non-negative
    lowest = min(float(np.min(spectral.apply_A(u).samples)) for _, u in glob.samples)
    crit.check("a=4pi^2 sign preservation min Au >= -1e-6", lowest >= -1e-6, f"min Au = {lowest:.3g}")
    crit.conclude()


def test_ac04_hs_reduction(criterion):
    crit = criterion(4, "zero-mean reduction blow-up time", 30)
    u0 = on_grid(256, lambda x: np.cos(TWO_PI * x))
    t_crit = np.sqrt(2) / np.pi * np.arctan(1 / np.sqrt(2))
    crit.check("analytic formula", abs(ev.hs_blowup_time(u0) - t_crit) < 1e-12 * t_crit)
    traj = ev.integrate(u0, ev.EvolutionConfig(n=256, t_end=1.0))
    est = traj.verdict.t_est
    crit.check("blow-up detected", traj.verdict.is_blowup, str(traj.verdict))
    if est is not None:
        crit.check("t_est within 5%", abs(est - t_crit) <= 0.05 * t_crit, f"{est:.5f} vs {t_crit:.5f}")
    crit.conclude()


def test_ac05_local_conservation(criterion):
    crit = criterion(5, "local conservation law", 60)
    traj = ev.integrate(on_grid(256, lambda x: 1 + 0.01 * np.cos(TWO_PI * x)), ev.EvolutionConfig(n=256, t_end=0.2))
    crit.check("completed", traj.verdict.kind == ev.COMPLETED)
    residual = ev.local_conservation_residual(traj, ev.flow_map(traj))
    crit.check("residual < 1e-5", residual < 1e-5, f"{residual:.2e}")
    crit.conclude()


def test_ac06_hierarchy(criterion):
    crit = criterion(6, "bihamiltonian hierarchy", 10)
    m = on_grid(256, lambda x: 1 + 0.3 * np.cos(TWO_PI * x))
    u = spectral.apply_A_inverse(m)
    kernel = sup(hi.b1(m, RealField(m.grid, 0.5 / np.sqrt(m.samples))))
    crit.check("kernel identity", kernel < 1e-9, f"{kernel:.2e}")
    pair = hi.bihamiltonian_residual(u)
    crit.check("bihamiltonian pair", max(pair) < 1e-7, f"{max(pair):.2e}")
    for n in (1, 2):
        gap = abs(hi.hn_from_gradient(n, u) - hi.functional_value(-n, u))
        crit.check(f"H-{n} identity", gap < 1e-8, f"{gap:.2e}")
    _, fit = hi.kernel_fit(hi.lower(hi.gradient(-2, u), m), hi.gradient(-3, u), m)
    crit.check("dH-3 after kernel fit", fit < 1e-6, f"{fit:.2e}")
    crit.conclude()


def test_ac07_gradients(criterion):
    crit = criterion(7, "gradient correctness", 10)
    u = spectral.apply_A_inverse(on_grid(256, lambda x: 1 + 0.3 * np.cos(TWO_PI * x)))
    rng = np.random.default_rng(12345)
    eps = 1e-5
    for index in (-2, -1, 0, 1, 2):
        grad = hi.gradient(index, u)
        worst = 0.0
        for _ in range(10):
            v = spectral.random_bandlimited(u.grid, rng, kmax=6, decay=2.0) * 0.01
            fd = (hi.functional_value(index, u + eps * v) - hi.functional_value(index, u - eps * v)) / (2 * eps)
            exact = float(np.mean(grad.samples * spectral.apply_A(v).samples))
            worst = max(worst, abs(fd - exact) / max(abs(exact), 1e-12))
        crit.check(f"dH{index}", worst < 1e-5, f"{worst:.2e}")
    crit.conclude()


def test_ac08_traveling_waves(criterion):
    crit = criterion(8, "traveling waves", 60)
    grid = [(m, m + f * (1 - m)) for m in np.linspace(0.05, 0.85, 5) for f in (0.1, 0.3, 0.5, 0.7, 0.9)]
    grid += [(m, 1 + f) for m in np.linspace(0.05, 0.85, 5) for f in (0.1, 0.5, 1.0, 2.5, 6.0)]
    worst = max(np.max(np.abs(np.subtract(waves.wave_stats(1.0, m, M, 1.0), quad_stats(1.0, m, M, 1.0))
                              / np.asarray(quad_stats(1.0, m, M, 1.0)))) for m, M in grid)
    crit.check("stats vs quadrature", worst <= 1e-9, f"{worst:.2e}")
    for args in [(1.0, 0.2, 0.6), (1.0, 0.2, 1.5)]:
        base = np.array(waves.wave_stats(*args, 1.0))
        for mu in (0.25, 1.0, 4.0):
            scaled = np.array(waves.wave_stats(*args, mu))
            crit.check(f"1/sqrt(mu) scaling mu={mu}", np.allclose(scaled * np.sqrt(mu), base, rtol=1e-14, atol=0))

    for family, anchor, samples in [(Family.SMOOTH, 0.3, 1024), (Family.CUSPED, 0.3, 8192)]:
        label = f"{family.value} m_anchor={anchor}"
        params = crit.attempt(label, lambda: waves.solve_period_one(1.0, family, anchor))
        if params is None:
            continue
        period = waves.muhs_period(params.c, params.m_lo, params.M_hi)
        crit.check(f"{label} period", abs(period - 1) < 1e-10, f"{period - 1:.2e}")
        mean = waves.profile_integral(waves.profile(params, samples))
        crit.check(f"{label} mean = mu", abs(mean - params.mu) < 1e-6, f"{mean - params.mu:.2e}")
        if family is Family.CUSPED:
            exponent = waves.cusp_exponent(waves.profile(params, 64))
            crit.check("cusp exponent", 0.63 <= exponent <= 0.70, f"{exponent:.4f}")

    for c, mu in ((1.0, -1.0), (-1.0, 1.0)):
        integral = waves.profile_integral(waves.solitary_profile(c, mu, 4001))
        crit.check(f"solitary sign c={c}", np.sign(integral) == -np.sign(mu), f"{integral:.3g}")
    crit.conclude()


def test_ac09_wave_evolution(criterion):
    crit = criterion(9, "wave evolution cross-check", 120)
    params = waves.solve_period_one(1.0, Family.SMOOTH, 0.92)
    t_end = 1.0 / params.c
    err, shift = waves.shape_preservation_error(params, 512, t_end, return_shift=True)
    crit.check("shape error < 1e-3", err < 1e-3, f"{err:.2e}")
    gap = abs((shift - params.c * t_end + 0.5) % 1.0 - 0.5)
    crit.check("shift within 1e-3 of ct", gap < 1e-3, f"{gap:.2e}")
    crit.conclude()


def test_ac10_curvature(criterion):
    crit = criterion(10, "curvature", 10)
    g = PeriodicGrid(64)
    rng = np.random.default_rng(12345)
    worst = 0.0
    for _ in range(20):
        u, v = (spectral.random_bandlimited(g, rng, kmax=6) for _ in range(2))
        a, b = geo.curvature_quadratic(u, v), geo.curvature_expanded(u, v)
        worst = max(worst, abs(a - b) / max(1.0, abs(a)))
    crit.check("two formulas", worst <= 1e-10, f"{worst:.2e}")

    ident, lowest = 0.0, np.inf
    for _ in range(200):
        u, v = (spectral.random_bandlimited(g, rng, kmax=8, zero_mean=True) for _ in range(2))
        pair = geo.orthonormal_pair(u, v)
        k = geo.curvature_quadratic(pair.u, pair.v)
        cross = spectral.mean(spectral.derivative(pair.u) * pair.v)
        ident = max(ident, abs(k - (0.25 - 3 * cross ** 2)))
        lowest = min(lowest, k)
    crit.check("horizontal identity", ident < 1e-9, f"{ident:.2e}")
    crit.check("horizontal bound", lowest >= 0.25 * (1 - 3 / np.pi ** 2) - 1e-9, f"{lowest:.4f}")

    one = g.constant(1.0)
    vertical = 0.0
    for _ in range(10):
        v = spectral.random_bandlimited(g, rng, kmax=6, zero_mean=True)
        v = v * (1 / np.sqrt(spectral.mean(spectral.derivative(v) ** 2)))
        vertical = max(vertical, abs(geo.curvature_quadratic(one, v) - spectral.mean(v * v)))
    crit.check("K(1,v) = int v^2", vertical < 1e-9, f"{vertical:.2e}")
    for n in range(1, 6):
        v = g.from_function(lambda x: np.sqrt(2) * np.sin(TWO_PI * n * x) / (TWO_PI * n))
        k = geo.sectional(one, v)
        crit.check(f"v_{n} sequence", abs(k - 1 / (4 * np.pi ** 2 * n ** 2)) < 1e-9, f"{k:.6g}")
    crit.conclude()


def test_ac11_isospectrality(criterion):
    crit = criterion(11, "isospectrality", 120)
    traj = ev.integrate(on_grid(256, lambda x: 1 + 0.01 * np.cos(TWO_PI * x)), ev.EvolutionConfig(n=256, t_end=0.2))
    drift = ev.isospectrality_drift(traj, 5)
    crit.check("completed", traj.verdict.kind == ev.COMPLETED)
    crit.check("5 eigenvalues drift < 1e-4", drift < 1e-4, f"{drift:.2e}")
    crit.conclude()


def test_ac12_virasoro(criterion):
    crit = criterion(12, "Virasoro three-way agreement", 5)
    u = spectral.apply_A_inverse(on_grid(256, lambda x: 1 + 0.3 * np.cos(TWO_PI * x)))
    for k in (0.0, 0.5):
        residual = hi.virasoro_equivalence_residual(u, k)
        crit.check(f"k={k}", residual < 1e-7, f"{residual:.2e}")
    crit.conclude()


def test_ac13_cli(criterion, tmp_path, monkeypatch, capsys):
    crit = criterion(13, "command line", 10)
    outputs = []
    for run in ("a", "b"):
        out = tmp_path / run
        code = main(["simulate", "--init", "0.2+cos(1)", "--n", "128", "--t-end", "0.5", "--out", str(out)])
        crit.check(f"simulate exit 0 ({run})", code == 0, str(code))
        outputs.append(out)
    for name in ("diagnostics.csv", "snapshots.csv"):
        crit.check(f"byte-identical {name}", (outputs[0] / name).read_bytes() == (outputs[1] / name).read_bytes())
    docs = [json.loads((o / "manifest.json").read_text()) for o in outputs]
    for doc in docs:
        doc["summary"].pop("wall_time_s")
    crit.check("manifests agree", docs[0] == docs[1])

    crit.check("exit 2 on parse error", main(["simulate", "--init", "cos(1", "--out", str(tmp_path / "c")]) == 2)
    crit.check("exit 2 on anchor above c", main(["wave", "--c", "1", "--family", "cusped", "--m-anchor", "1.5"]) == 2)
    crit.check("exit 4 on NoBracket", main(["wave", "--c", "1", "--family", "smooth", "--m-anchor", "0.3"]) == 4)

    def broken(*_):
        raise NumericalFailure("injected")

    with monkeypatch.context() as patch:
        patch.setattr(ev, "classify_initial", broken)
        crit.check("exit 3 on numerical failure", main(["classify", "--init", "1"]) == 3)
    capsys.readouterr()

    rng = np.random.default_rng(12345)
    mismatches = 0
    for _ in range(100):
        spec = random_spec(rng)
        mismatches += parse_init(spec.render()).terms != spec.terms
    crit.check("grammar round trip (100 specs)", mismatches == 0, f"{mismatches} mismatches")
    crit.conclude()
