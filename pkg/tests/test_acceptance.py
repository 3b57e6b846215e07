"""End-to-end acceptance suite: one test per criterion, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -v``; the summary lines are printed
even when output capture is on.
"""
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from u1aba import aba, colored as C, nonadditive as NA, sl2r as S, verify as V, xxz as X
from u1aba.aba import AbaContext, _labelled
from u1aba.common import Lattice
from u1aba.tensor import permutation

LAMS = (0.11 + 0.07j, -0.23 + 0.19j, 0.37 - 0.05j)


def _line(capsys, n, ok, detail):
    with capsys.disabled():
        print(f"\n[criterion {n}] {'PASS' if ok else 'FAIL'}: {detail}")


def _coprime(N):
    return [k for k in range(1, N) if math.gcd(k, N) == 1]


def compact_families(Ns):
    """(name, spec, provider, closed-form eigenvalue, real-only) for every compact family."""
    out = []
    for N in Ns:
        sp = X.XxzSpec(N, 0.37)
        out.append((f"xxz N={N}", sp, X.provider(sp), X.lambda_eig_xxz, False))
        for k in _coprime(N):
            sp = C.ColoredSpec(N, k, 0.3 + 0.2j)
            out.append((f"colored N={N} k={k}", sp, C.provider(sp), C.lambda_eig_colored, False))
        for k in NA.omega_choices(N):
            sp = NA.NonAddSpec(N, k, allow_complex=True)
            out.append((f"nonadditive N={N} k={k}", sp, NA.provider(sp), NA.lambda_eig_nonadd, True))
    return out


def _lattice(rng, L, real):
    x = rng.uniform(-0.3, 0.3, L)
    if real:
        return Lattice(tuple(x))
    return Lattice(tuple(x + 1j * rng.uniform(-0.3, 0.3, L)))


# -- 1: identity suite ---------------------------------------------------------


def test_criterion_1_identity_suite(capsys):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst = {"ice": 0.0, "ybe": 0.0, "unitarity": 0.0, "braid": 0.0, "commute": 0.0}
    failed = []

    def take(name, rep, key):
        worst[key] = max(worst[key], rep.max_residual)
        if not rep.passed:
            failed.append(f"{name}:{rep.check_name}={rep.max_residual:.2e}")

    def suite(name, pv, lat):
        for rep in V.identity_suite(pv, lat, samples=5, seed=1):
            key = rep.check_name.split("-")[0].replace("transfer", "commute")
            take(name, rep, key)

    for N in range(2, 6):
        for gamma in rng.uniform(0.15, 1.3, 3):
            sp = X.XxzSpec(N, float(gamma))
            pv = X.provider(sp)
            suite(f"xxz{N}", pv, _lattice(rng, 3 if N <= 3 else 2, False))
            take(f"xxz{N}", V.check_braid(X.braid_matrix(sp), N), "braid")
    for N in (3, 4, 5):
        for k in _coprime(N):
            sp = C.ColoredSpec(N, k, 0.3 + 0.2j)
            suite(f"col{N},{k}", C.provider(sp), _lattice(rng, 3 if N <= 3 else 2, False))
            take(f"col{N},{k}", V.check_braid(C.colored_braid(sp), N), "braid")
    for N in (2, 3, 4):
        P = permutation(N)
        for k in NA.omega_choices(N):
            sp = NA.NonAddSpec(N, k)
            suite(f"na{N},{k}", NA.provider(sp), _lattice(rng, 3 if N <= 3 else 2, True))
            fam = lambda g1, g2, sp=sp: P @ NA.r_matrix_nonadd(sp, g1, g2)
            take(f"na{N},{k}", V.check_colored_braid(fam, N, samples=5, seed=1), "braid")
    for s in (-0.5, -0.7, -1.5):
        suite(f"sl2r{s}", S.provider(S.Sl2rSpec(s)), None)
    elapsed = time.perf_counter() - t0
    ok = not failed and worst["ice"] == 0.0 and elapsed <= 120
    detail = ", ".join(f"{k} {v:.1e}" for k, v in worst.items()) + f", {elapsed:.1f}s"
    _line(capsys, 1, ok, detail + (f" failures {failed}" if failed else ""))
    assert ok


# -- 2 and 3: on-shell grid ----------------------------------------------------


@pytest.fixture(scope="module")
def onshell_grid():
    rows = []
    for name, sp, pv, closed, real in compact_families((2, 3)):
        for L in (2, 3):
            rng = np.random.default_rng(10 * sp.N + L)
            lat = _lattice(rng, L, real)
            for n in (1, 2):
                sol = aba.solve_bae(pv, lat, n, n_random=20, rng=rng)
                for br in sol.solutions:
                    for lam in LAMS:
                        lam = lam.real if real else lam
                        g = aba.eigenvalue_generic(pv, lat, br.roots, lam)
                        c = closed(sp, lat, br.roots, lam)
                        ev = np.linalg.eigvals(aba.transfer(pv, lat, lam).block(n))
                        _, res = aba.eigen_residual(pv, lat, br.roots, lam)
                        rows.append(
                            dict(
                                where=(name, L, n, br.roots, lam),
                                closed=abs(g - c) / max(abs(g), 1e-300),
                                dense=float(np.abs(ev - g).min()),
                                resid=res,
                            )
                        )
    return rows


def test_criterion_2_onshell(onshell_grid, capsys):
    wc = max(r["closed"] for r in onshell_grid)
    wd = max(r["dense"] for r in onshell_grid)
    ok = bool(onshell_grid) and wc <= 1e-10 and wd <= 1e-8
    _line(capsys, 2, ok, f"{len(onshell_grid)} (roots, lam) cases, generic vs closed {wc:.1e}, dense match {wd:.1e}")
    assert ok


def test_criterion_3_eigenvector(onshell_grid, capsys):
    wr = max(r["resid"] for r in onshell_grid)
    ok = bool(onshell_grid) and wr <= 1e-8
    _line(capsys, 3, ok, f"max eigenvector residual {wr:.1e}")
    assert ok


# -- 4: off-shell decomposition ------------------------------------------------


def test_criterion_4_offshell(capsys):
    roots = (0.37 + 0.21j, -0.52 + 0.33j)
    worst = 0.0
    for name, sp, pv, _, real in compact_families((2, 3)):
        lat = Lattice((0.13, -0.21)) if real else Lattice((0.13 + 0.05j, -0.21 + 0.02j))
        rr = (0.37, -0.52) if real else roots
        lam = 0.29 if real else 0.29 - 0.14j
        for n in (1, 2):
            worst = max(worst, aba.offshell_decomposition_check(pv, lat, rr[:n], lam))
    compact = worst
    lat = Lattice((0.13 + 0.05j, -0.21 + 0.02j))
    for s in (-2.0, -3.0):
        pv = S.provider(S.Sl2rSpec(s))
        for n in (1, 2):
            worst = max(worst, aba.offshell_decomposition_check(pv, lat, roots[:n], 0.29 - 0.14j, aux_cap=20))
    ok = worst <= 1e-8
    _line(capsys, 4, ok, f"compact {compact:.1e}, with SL(2,R) s in (-2,-3) at cutoff 20: {worst:.1e}")
    assert ok


# -- 5: closed forms against recurrences ----------------------------------------


def _closed_families():
    for N in (2, 3, 4, 5):
        sp = X.XxzSpec(N, 0.37)
        yield f"xxz{N}", sp, X.provider(sp), X.f_closed_xxz, N, False
    for N in (3, 4, 5):
        for k in _coprime(N):
            sp = C.ColoredSpec(N, k, 0.3 + 0.2j)
            yield f"col{N},{k}", sp, C.provider(sp), C.f_closed_colored, N, False
    for N in (2, 3, 4):
        for k in NA.omega_choices(N):
            sp = NA.NonAddSpec(N, k)
            yield f"na{N},{k}", sp, NA.provider(sp), NA.f_closed_nonadd, N, True
    for s in (-0.5, -0.7, -1.5):
        sp = S.Sl2rSpec(s)
        yield f"sl2r{s}", sp, S.provider(sp), S.f_closed_sl2r, None, False


def test_criterion_5_closed_vs_recurrence(capsys):
    rng = np.random.default_rng(5)
    worst_mod = worst_phase = 0.0
    phases = {}
    for name, sp, pv, closed, N, real in _closed_families():
        bmax = min(4, N - 1) if N else 3
        for b in range(1, bmax + 1):
            for a in range(1, (N - b if N else 4) + 1):
                for c in (0, b):
                    ratios = []
                    for _ in range(5):
                        if real:
                            lam, raps = rng.uniform(-0.9, 0.9), list(rng.uniform(-0.9, 0.9, b))
                        else:
                            lam = complex(*rng.uniform(-0.8, 0.8, 2))
                            raps = list(rng.uniform(-0.8, 0.8, b) + 1j * rng.uniform(-0.8, 0.8, b))
                        ctx = AbaContext(pv, aux_cap=None if N else a + b + 1)
                        ratios.append(ctx.F(c, b, a, lam, _labelled(raps)) / closed(sp, c, b, a, lam, raps))
                    ratios = np.array(ratios)
                    phases[(name, c, b, a)] = complex(np.round(ratios[0], 8))
                    worst_mod = max(worst_mod, float(np.abs(np.abs(ratios) - 1).max()))
                    worst_phase = max(worst_phase, float(np.abs(ratios - ratios[0]).max()))
    nontrivial = sum(1 for v in phases.values() if abs(v - 1) > 1e-8)
    ok = worst_mod <= 1e-10 and worst_phase <= 1e-10
    _line(
        capsys,
        5,
        ok,
        f"{len(phases)} (family,c,b,a) cells, |ratio|-1 {worst_mod:.1e}, phase spread {worst_phase:.1e}, "
        f"{nontrivial} cells carry a constant phase -1",
    )
    assert ok


# -- 6: non-compact Hamiltonian ---------------------------------------------------


def test_criterion_6_hamiltonian(capsys):
    worst_r = worst_sym = 0.0
    for s in (-0.5, -0.7, -1.0, -1.5):
        sp = S.Sl2rSpec(s)
        for n in range(0, 5):
            worst_r = max(worst_r, float(np.abs(S.hamiltonian_from_r(sp, n) - S.two_site_block(sp, n)).max()))
        for L in (2, 3, 4):
            for n in range(0, 4):
                H = S.build_hamiltonian(sp, L, n)
                worst_sym = max(worst_sym, float(np.abs(H - H.T).max()))
    half = S.Sl2rSpec(-0.5)
    exact = all(S.h1(half, k) == 1 / k for k in range(1, 8)) and all(
        S.h2(half, k, m1, m2) == -1 / k for k in range(1, 5) for m1 in range(4) for m2 in range(k, k + 4)
    )
    ok = worst_r <= 1e-8 and worst_sym <= 1e-12 and exact
    _line(capsys, 6, ok, f"from_r vs action {worst_r:.1e}, symmetry {worst_sym:.1e}, s=-1/2 reductions exact={exact}")
    assert ok


# -- 7: coordinate against algebraic ---------------------------------------------


def test_criterion_7_cba(capsys):
    worst_e = worst_psi = worst_bae = 0.0
    for s in (-0.5, -1.0):
        sp = S.Sl2rSpec(s)
        for L in (3, 4):
            sols = S.cba_two_particle(sp, L)
            Es = np.array([x.energy for x in sols])
            ev = np.linalg.eigvalsh(S.build_hamiltonian(sp, L, 2))
            worst_e = max(worst_e, max(float(np.abs(Es - e).min()) for e in ev))
            worst_psi = max(worst_psi, max(x.eigen_residual for x in sols))
            lat = Lattice.homogeneous(L, 0.0)
            for x in sols:
                ks = [k for k in (x.k1, x.k2) if abs(k) > 1e-9]
                if ks:
                    roots = [S.rapidity_from_momentum(sp, k) for k in ks]
                    worst_bae = max(worst_bae, max(abs(v) for v in S.bae_residual_sl2r(sp, lat, roots)))
    ok = worst_e <= 1e-8 and worst_psi <= 1e-8 and worst_bae <= 1e-8
    _line(capsys, 7, ok, f"energy match {worst_e:.1e}, psi residual {worst_psi:.1e}, BAE via rapidity map {worst_bae:.1e}")
    assert ok


# -- 8: limit correspondence ------------------------------------------------------


def test_criterion_8_limit(capsys):
    def inside(r):
        return all(0.4 <= x <= 0.6 for x in r)

    theta_r, f_r = [], []
    for s in (-0.5, -0.7):
        _, tr, fr = S.limit_table(S.Sl2rSpec(s), route="colored")
        theta_r += list(tr)
        f_r += list(fr)
    _, tr, fr = S.limit_table(S.Sl2rSpec(-0.5), route="xxz")
    xxz_theta, xxz_f = list(tr), list(fr)

    lam, mu = 0.31 + 0.17j, -0.42 + 0.08j
    lat = Lattice((0.1 + 0.02j, -0.3j, 0.25))
    spec_err = 0.0
    for N in (3, 4, 5, 7):
        for k in _coprime(N):
            cs, xs = C.specialize_to_xxz(C.ColoredSpec(N, k, 0.3))
            spec_err = max(
                spec_err,
                abs(C.theta_colored(cs, lam, mu) - X.theta_xxz(xs, lam, mu)),
                abs(C.lambda_eig_colored(cs, lat, [], lam) - X.lambda_eig_xxz(xs, lat, [], lam)),
            )
    parts = {
        "theta": inside(theta_r),
        "F": inside(f_r),
        "xxz route": inside(xxz_theta) and inside(xxz_f),
        "specialization": spec_err <= 1e-10,
    }
    ok = all(parts.values())
    fmt = lambda r: "[" + ", ".join(f"{x:.3f}" for x in r) + "]"
    _line(
        capsys,
        8,
        ok,
        f"theta ratios {fmt(theta_r)}, F ratios {fmt(f_r)}, xxz route theta {fmt(xxz_theta)} F {fmt(xxz_f)}, "
        f"specialization {spec_err:.1e}; parts {parts}",
    )
    assert ok


# -- 9: determinism ----------------------------------------------------------------


CLI_RUNS = [
    ["verify", "--model", "xxz", "--N", "3", "--gamma", "0.41", "--L", "2", "--samples", "3"],
    ["bethe", "--model", "colored", "--N", "3", "--k", "1", "--gbar", "0.3+0.2j", "--L", "2", "--n", "1"],
    ["offshell", "--model", "sl2r", "--s", "-2", "--L", "2", "--n", "1", "--format", "csv"],
    ["hamiltonian", "--model", "sl2r", "--s", "-0.5", "--L", "3", "--format", "human"],
]


def test_criterion_9_determinism(capsys):
    same = []
    for args in CLI_RUNS:
        outs = [
            subprocess.run([sys.executable, "-m", "u1aba.cli", *args, "--seed", "7"], capture_output=True).stdout
            for _ in range(2)
        ]
        same.append(outs[0] == outs[1] and len(outs[0]) > 0)
    ok = all(same)
    _line(capsys, 9, ok, f"{sum(same)}/{len(same)} CLI runs byte-identical on repeat")
    assert ok
