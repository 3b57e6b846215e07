import cmath
import itertools
import math

import numpy as np
import pytest

from u1aba import aba
from u1aba import colored as C
from u1aba import kernels
from u1aba import nonadditive as NA
from u1aba import sl2r as S
from u1aba import xxz as X
from u1aba.aba import AbaContext, _labelled
from u1aba.common import CoincidentRootsError, Lattice

GAMMA = 0.37
LAM = 0.29 - 0.14j
LAT2 = Lattice((0.13 + 0.05j, -0.21 + 0.02j))


def providers():
    """(id, provider, real arguments only) covering every family."""
    x3 = X.XxzSpec(3, GAMMA)
    c4 = C.ColoredSpec(4, 3, 0.3 + 0.2j)
    n3 = NA.NonAddSpec(3, 2)
    s = S.Sl2rSpec(-0.7)
    return [
        ("xxz3", X.provider(x3), False),
        ("colored4", C.provider(c4), False),
        ("nonadd3", NA.provider(n3), True),
        ("sl2r", S.provider(s), False),
    ]


PROVIDERS = providers()
COMPACT = [p for p in PROVIDERS if p[1].compact]


def _pts(real, rng, n):
    if real:
        return list(rng.uniform(-0.8, 0.8, n))
    return list(rng.uniform(-0.8, 0.8, n) + 1j * rng.uniform(-0.8, 0.8, n))


@pytest.mark.parametrize("backend", ["python", "compiled"])
def test_backends_agree(backend, rng):
    fn = kernels.python_path_sum if backend == "python" else kernels.compiled_path_sum
    if fn is None:
        pytest.skip("compiled kernel not built")
    pv = X.provider(X.XxzSpec(3, GAMMA))
    W = np.stack([pv.site(LAM, mu) for mu in (0.1, -0.2j, 0.3)])
    ref = kernels.python_path_sum(W)
    np.testing.assert_allclose(fn(W), ref, atol=1e-13)


def test_single_site_monodromy_convention():
    pv = X.provider(X.XxzSpec(2, GAMMA))
    M = aba.monodromy(pv, Lattice((0.2,)), LAM)
    t = pv.tensor(LAM, 0.2)
    for a, b, c, d in itertools.product(range(1, 3), repeat=4):
        assert M.op(a, c)[b - 1, d - 1] == t[a - 1, b - 1, c - 1, d - 1]


@pytest.mark.parametrize("pid,pv,real", COMPACT, ids=[p[0] for p in COMPACT])
def test_reference_state_triangular(pid, pv, real):
    lat = Lattice((0.13, -0.21)) if real else LAT2
    lam = 0.29 if real else LAM
    M = aba.monodromy(pv, lat, lam)
    v0 = aba.reference_state(pv, lat)
    N = pv.local_dim
    for a in range(1, N + 1):
        for b in range(1, a):
            assert np.abs(M.op(a, b) @ v0).max() <= 1e-13
        w = aba.omega_a(pv, lat, a, lam)
        np.testing.assert_allclose(M.op(a, a) @ v0, w * v0, atol=1e-13)


def test_omega_values_six_vertex():
    sp = X.XxzSpec(2, GAMMA)
    pv = X.provider(sp)
    assert aba.omega_a(pv, LAT2, 1, LAM) == pytest.approx(1)
    want = np.prod([cmath.sinh(LAM - m) / cmath.sinh(LAM - m + 1j * GAMMA) for m in LAT2.mus])
    assert aba.omega_a(pv, LAT2, 2, LAM) == pytest.approx(want)


@pytest.mark.parametrize("pid,pv,real", COMPACT, ids=[p[0] for p in COMPACT])
def test_transfer_on_vacuum(pid, pv, real):
    lat = Lattice((0.13, -0.21)) if real else LAT2
    lam = 0.29 if real else LAM
    T = aba.transfer(pv, lat, lam)
    total = sum(aba.omega_a(pv, lat, a, lam) for a in range(1, pv.local_dim + 1))
    v0 = aba.reference_state(pv, lat)
    np.testing.assert_allclose(T.matrix @ v0, total * v0, atol=1e-12)
    assert T.block(0).shape == (1, 1)
    assert T.off_block_mass() <= 1e-13


def test_sector_dimensions():
    pv = X.provider(X.XxzSpec(3, GAMMA))
    lat = Lattice((0.1, 0.2, -0.1))
    blocks = aba.transfer(pv, lat, LAM).sector_blocks
    for n, B in blocks.items():
        count = sum(1 for c in itertools.product(range(3), repeat=3) if sum(c) == n)
        assert B.shape == (count, count)


def test_transfer_commutes_three_states():
    pv = X.provider(X.XxzSpec(3, GAMMA))
    A = aba.transfer(pv, LAT2, LAM).matrix
    B = aba.transfer(pv, LAT2, -0.4 + 0.3j).matrix
    assert np.linalg.norm(A @ B - B @ A) <= 1e-10 * np.linalg.norm(A) * np.linalg.norm(B)


@pytest.mark.parametrize("pid,pv,real", PROVIDERS, ids=[p[0] for p in PROVIDERS])
def test_theta_identities(pid, pv, real):
    lam = 0.29 if real else LAM
    assert aba.theta(pv, lam, 0.1) * aba.theta(pv, 0.1, lam) == pytest.approx(1)
    assert aba.theta_lt(pv, 2, 1, lam, 0.1) == 1
    assert aba.theta_lt(pv, 1, 2, lam, 0.1) == aba.theta(pv, lam, 0.1)


@pytest.mark.parametrize("pid,pv,real", PROVIDERS, ids=[p[0] for p in PROVIDERS])
def test_p_a_edges(pid, pv, real):
    lam, mu = (0.29, -0.33) if real else (LAM, -0.33 + 0.2j)
    w = lambda l, m, *i: pv.weight(l, m, *i)
    assert aba.p_a(pv, 1, lam, mu) == pytest.approx(w(mu, lam, 1, 1, 1, 1) / w(mu, lam, 2, 1, 2, 1))
    if pv.compact:
        N = pv.local_dim
        assert aba.p_a(pv, N, lam, mu) == pytest.approx(w(lam, mu, N, 2, N, 2) / w(lam, mu, N, 1, N, 1))


@pytest.mark.parametrize(
    "spec,mod,real",
    [(X.XxzSpec(3, GAMMA), X, False), (C.ColoredSpec(4, 3, 0.3 + 0.2j), C, False), (NA.NonAddSpec(3, 2), NA, True)],
    ids=["xxz3", "colored4", "nonadd3"],
)
def test_generic_eigenvalue_matches_closed(spec, mod, real, rng):
    pv = mod.provider(spec)
    closed = {X: X.lambda_eig_xxz, C: C.lambda_eig_colored, NA: NA.lambda_eig_nonadd}[mod]
    lat = Lattice((0.13, -0.21)) if real else LAT2
    for n in (0, 1, 2):
        roots = _pts(real, rng, n)
        lam = 0.29 if real else LAM
        g = aba.eigenvalue_generic(pv, lat, roots, lam)
        assert abs(g - closed(spec, lat, roots, lam)) <= 1e-10 * max(1, abs(g))


def test_generic_rejects_coincident_roots():
    pv = X.provider(X.XxzSpec(2, GAMMA))
    with pytest.raises(CoincidentRootsError):
        aba.eigenvalue_generic(pv, LAT2, [0.1, 0.1], LAM)


@pytest.mark.parametrize("pid,pv,real", COMPACT, ids=[p[0] for p in COMPACT])
def test_f_initial_sign(pid, pv, real):
    lam, mu = (0.29, -0.33) if real else (LAM, -0.33 + 0.2j)
    ctx = AbaContext(pv)
    for a in range(1, pv.local_dim):
        f0 = ctx.F(0, 1, a, lam, [(1, mu)])
        assert ctx.F(1, 1, a, lam, [(1, mu)]) == -f0
        t = pv.tensor(lam, mu)
        assert f0 == pytest.approx(t[a, 0, a - 1, 1] / t[a, 0, a, 0])


def test_f_initial_six_vertex_ratio():
    pv = X.provider(X.XxzSpec(2, GAMMA))
    # off-diagonal over diagonal weight of the six-vertex model
    want = pv.weight(LAM, 0.1, 2, 1, 1, 2) / pv.weight(LAM, 0.1, 2, 1, 2, 1)
    assert aba.f_initial(pv, 1, LAM, 0.1) == pytest.approx(want)


@pytest.mark.parametrize("pid,pv,real", PROVIDERS, ids=[p[0] for p in PROVIDERS])
def test_middle_amplitude_product(pid, pv, real, rng):
    ctx = AbaContext(pv, aux_cap=None if pv.compact else 4)
    amax = pv.local_dim - 2 if pv.compact else 2
    for _ in range(3):
        lam, l1, l2 = _pts(real, rng, 3)
        rho = ctx.w(l2, l1, 1, 1, 1, 1) / ctx.w(l2, l1, 2, 1, 2, 1)
        for a in range(1, amax + 1):
            got = ctx.F(1, 2, a, lam, [(1, l1), (2, l2)])
            want = ctx.F(0, 1, a, lam, [(2, l2)]) * ctx.F(1, 1, a + 1, lam, [(1, l1)]) * rho
            assert abs(got - want) <= 1e-12 * max(1, abs(want))


@pytest.mark.parametrize("pid,pv,real", PROVIDERS, ids=[p[0] for p in PROVIDERS])
@pytest.mark.parametrize("b", [2, 3])
def test_factorized_ansatz_with_q(pid, pv, real, b, rng):
    if pv.compact and b > pv.local_dim - 1:
        pytest.skip("b above N - 1")
    amax = pv.local_dim - b if pv.compact else 2
    for a in range(1, amax + 1):
        for c in (0, b):
            consts = []
            lam = _pts(real, rng, 1)[0]
            for _ in range(4):
                raps = _pts(real, rng, b)
                ctx = AbaContext(pv, aux_cap=None if pv.compact else a + b + 1)
                f = ctx.F(c, b, a, lam, _labelled(raps))
                q = np.prod([aba.q_function(pv, raps[i], raps[j]) for i, j in itertools.combinations(range(b), 2)])
                if c == 0:
                    single = np.prod([ctx.F(0, 1, a + b - 1, lam, [(1, r)]) for r in raps])
                else:
                    single = np.prod([ctx.F(1, 1, a, lam, [(1, r)]) for r in raps])
                consts.append(f / (q * single))
            consts = np.array(consts)
            # the constant is rapidity independent at fixed spectral parameter
            assert np.abs(consts - consts[0]).max() <= 1e-10 * abs(consts[0])


def test_amplitude_table_covers_reachable():
    pv = X.provider(X.XxzSpec(4, GAMMA))
    tab = aba.amplitude_table(pv, LAM, [0.1 + 0.2j, -0.3, 0.4j])
    assert set(tab.entries) == {(c, b, a) for b in (1, 2, 3) for a in range(1, 5 - b) for c in range(b + 1)}
    assert tab.source == "recurrence"


def test_phi_one_particle():
    pv = X.provider(X.XxzSpec(3, GAMMA))
    l1 = 0.4 + 0.1j
    M = aba.monodromy(pv, LAT2, l1)
    v0 = aba.reference_state(pv, LAT2)
    np.testing.assert_allclose(aba.phi_state(pv, LAT2, [l1]), M.op(1, 2) @ v0, atol=1e-14)


def test_phi_two_particles_hand_expansion():
    pv = X.provider(X.XxzSpec(3, GAMMA))
    l1, l2 = 0.4 + 0.1j, -0.25 + 0.3j
    ctx = AbaContext(pv, LAT2)
    M1 = aba.monodromy(pv, LAT2, l1)
    v0 = aba.reference_state(pv, LAT2)
    # e = 1: T12(l1) T12(l2)|0>; e = 2: T13(l1) 1F1^(2)(l1, l2) omega_1(l2) |0>
    want = M1.op(1, 2) @ aba.phi_state(pv, LAT2, [l2]) + M1.op(1, 3) @ v0 * ctx.F(1, 1, 2, l1, [(2, l2)]) * ctx.omega(1, l2)
    np.testing.assert_allclose(aba.phi_state(pv, LAT2, [l1, l2]), want, atol=1e-13)


def test_known_root_solved():
    pv = X.provider(X.XxzSpec(2, GAMMA))
    lat = Lattice.homogeneous(2, 0.0)
    rep = aba.solve_bae(pv, lat, 1, rng=np.random.default_rng(0))
    roots = [br.roots[0] for br in rep.solutions]
    assert any(abs(r + 0.5j * GAMMA) <= 1e-8 for r in roots)
    for br in rep.solutions:
        assert max(br.residuals) <= 1e-9


def test_solver_rejects_coincident_seeds():
    pv = X.provider(X.XxzSpec(2, GAMMA))
    rep = aba.solve_bae(pv, LAT2, 2, seeds=[[0.2, 0.2]], n_random=0)
    assert rep.solutions == ()
    assert rep.failures == 1


def test_solver_needs_particles():
    with pytest.raises(ValueError):
        aba.solve_bae(X.provider(X.XxzSpec(2, GAMMA)), LAT2, 0)


@pytest.mark.parametrize("n", [1, 2])
def test_unwanted_amplitudes_vanish_on_shell(n):
    pv = X.provider(X.XxzSpec(3, GAMMA))
    rep = aba.solve_bae(pv, LAT2, n, rng=np.random.default_rng(4))
    assert rep.solutions
    for br in rep.solutions:
        labels = list(range(1, n + 1))
        for t in range(1, n + 1):
            for sel in itertools.combinations(labels, t):
                for p in range(t):
                    for first in itertools.combinations(sel, p):
                        rest = [l for l in sel if l not in first]
                        h = aba.h_amp(pv, LAT2, p, t, list(first) + rest, br.roots)
                        assert abs(h) <= 1e-9


def test_unwanted_amplitude_one_particle_collapse():
    pv = X.provider(X.XxzSpec(3, GAMMA))
    ctx = AbaContext(pv, LAT2)
    r = 0.35 + 0.2j
    want = ctx.omega(2, r) - ctx.omega(1, r)
    assert aba.h_amp(pv, LAT2, 0, 1, [1], [r]) == pytest.approx(want)
    assert abs(want) > 1e-3


@pytest.mark.parametrize("pid,pv,real", COMPACT, ids=[p[0] for p in COMPACT])
@pytest.mark.parametrize("n", [1, 2])
def test_offshell_decomposition(pid, pv, real, n):
    lat = Lattice((0.13, -0.21)) if real else LAT2
    roots = (0.37, -0.52) if real else (0.37 + 0.21j, -0.52 + 0.33j)
    lam = 0.29 if real else LAM
    assert aba.offshell_decomposition_check(pv, lat, roots[:n], lam) <= 1e-8


def test_offshell_noncompact_truncation():
    pv = S.provider(S.Sl2rSpec(-2.0))
    roots = (0.37 + 0.21j, -0.52 + 0.33j)
    assert aba.offshell_decomposition_check(pv, LAT2, roots, LAM, aux_cap=20) <= 1e-8


def test_eigen_residual_off_shell_is_large():
    pv = X.provider(X.XxzSpec(2, GAMMA))
    _, res = aba.eigen_residual(pv, LAT2, [0.37 + 0.21j], LAM)
    assert res > 1e-4
