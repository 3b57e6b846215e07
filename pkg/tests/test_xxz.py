import cmath
import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from u1aba import aba
from u1aba import xxz as X
from u1aba.common import CoincidentRootsError, Lattice, PoleError

GAMMA = 0.37
LAM, MU = 0.31 + 0.17j, -0.42 + 0.08j


@pytest.fixture(params=[2, 3, 4])
def spec(request):
    return X.XxzSpec(request.param, GAMMA)


def test_w_func_empty_and_single():
    q = cmath.exp(-0.74j)
    assert X.w_func(q, 0, 0, 3) == 1
    assert X.w_func(q, 1, 0, 3) == pytest.approx(1 - q)


def test_w_func_shifted_expansion():
    q = cmath.exp(-0.74j)
    assert X.w_func(q, 2, 1, 3) == pytest.approx((1 - q**-2) * (1 - q**-1), abs=1e-15)


def test_w_func_rejects_negative():
    with pytest.raises(ValueError):
        X.w_func(0.5, -1, 0, 2)


def test_braid_weight_all_ones_two_states():
    sp = X.XxzSpec(2, GAMMA)
    assert X.braid_weight(sp, 1, 1, 1, 1) == pytest.approx(-sp.q, abs=1e-15)


def test_braid_weight_charge_violation(spec):
    N = spec.N
    for a, b, c, d in itertools.product(range(1, N + 1), repeat=4):
        if a + b != c + d:
            assert X.braid_weight(spec, a, b, c, d) == 0


def test_braid_relation_three_states():
    S = X.braid_matrix(X.XxzSpec(3, GAMMA))
    I = np.eye(3)
    S12, S23 = np.kron(S, I), np.kron(I, S)
    assert np.abs(S12 @ S23 @ S12 - S23 @ S12 @ S23).max() <= 1e-10


def test_projectors_three_states():
    sp = X.XxzSpec(3, GAMMA)
    Ps = [X.projector(sp, j) for j in range(3)]
    np.testing.assert_allclose(sum(Ps), np.eye(9), atol=1e-10)
    for i, j in itertools.combinations(range(3), 2):
        assert np.abs(Ps[i] @ Ps[j]).max() <= 1e-10
    for P in Ps:
        ev = np.linalg.eigvals(P)
        assert np.all(np.minimum(np.abs(ev), np.abs(ev - 1)) <= 1e-10)


def test_projector_index_range():
    with pytest.raises((IndexError, ValueError)):
        X.projector(X.XxzSpec(3, GAMMA), 3)


@pytest.mark.parametrize("gamma", [np.pi / 3, np.pi / 2, 2 * np.pi / 5])
def test_spec_rejects_root_of_unity(gamma):
    with pytest.raises(ValueError, match="generic"):
        X.XxzSpec(3, gamma)


def test_spec_cap():
    with pytest.raises(ValueError):
        X.XxzSpec(9, GAMMA)
    assert X.XxzSpec(9, GAMMA, cap=10).N == 9


def test_r_weight_normalization(spec, rng):
    for _ in range(5):
        lam, mu = rng.normal(size=2) * 0.5 + 1j * rng.normal(size=2) * 0.3
        assert X.r_weight(spec, lam, mu, 1, 1, 1, 1) == pytest.approx(1, abs=1e-12)


def test_six_vertex_weight():
    sp = X.XxzSpec(2, GAMMA)
    x = LAM - MU
    expect = cmath.sinh(x) / cmath.sinh(x + 1j * GAMMA)
    assert X.r_weight(sp, LAM, MU, 2, 1, 2, 1) == pytest.approx(expect, abs=1e-12)
    assert X.diag_weight(sp, LAM, MU, 2) == pytest.approx(expect, abs=1e-15)


def test_ice_rule_exact(spec):
    N = spec.N
    for a, b, c, d in itertools.product(range(1, N + 1), repeat=4):
        if a + b != c + d:
            assert X.r_weight(spec, LAM, MU, a, b, c, d) == 0


def test_diag_weight_first_is_one(spec):
    assert X.diag_weight(spec, LAM, MU, 1) == 1


def test_diag_weight_matches_matrix():
    sp = X.XxzSpec(4, GAMMA)
    for a in range(1, 5):
        assert abs(X.diag_weight(sp, LAM, MU, a) - X.r_weight(sp, LAM, MU, a, 1, a, 1)) <= 1e-10


def test_pole_guard():
    sp = X.XxzSpec(3, GAMMA)
    # sinh(i gamma - lam + mu) = 0 at lam - mu = i gamma
    with pytest.raises(PoleError):
        X.r_weight(sp, 1j * GAMMA, 0.0, 2, 1, 2, 1)


def test_theta_diagonal(spec):
    assert X.theta_xxz(spec, LAM, LAM) == pytest.approx(1)


def test_theta_inverse(spec):
    assert abs(X.theta_xxz(spec, LAM, MU) * X.theta_xxz(spec, MU, LAM) - 1) <= 1e-12


def test_theta_matches_determinant_ratio():
    sp = X.XxzSpec(3, GAMMA)
    assert abs(X.theta_xxz(sp, LAM, MU) - aba.theta(X.provider(sp), LAM, MU)) <= 1e-10


def test_vacuum_eigenvalue_single_site():
    sp = X.XxzSpec(2, GAMMA)
    lat = Lattice((0.2 - 0.1j,))
    x = LAM - lat.mus[0]
    expect = 1 + cmath.sinh(x) / cmath.sinh(x + 1j * GAMMA)
    assert X.lambda_eig_xxz(sp, lat, [], LAM) == pytest.approx(expect, abs=1e-14)
    T = aba.transfer(X.provider(sp), lat, LAM).block(0)
    assert T[0, 0] == pytest.approx(expect, abs=1e-14)


def test_vacuum_eigenvalue_sum_of_omegas(spec):
    lat = Lattice((0.1, -0.2 + 0.05j))
    pv = X.provider(spec)
    total = sum(aba.omega_a(pv, lat, a, LAM) for a in range(1, spec.N + 1))
    assert X.lambda_eig_xxz(spec, lat, [], LAM) == pytest.approx(total, abs=1e-13)


def test_known_root_two_sites():
    sp = X.XxzSpec(2, GAMMA)
    lat = Lattice.homogeneous(2, 0.0)
    root = -0.5j * GAMMA
    assert max(abs(r) for r in X.bae_residual_xxz(sp, lat, [root])) <= 1e-12
    pv = X.provider(sp)
    for lam in (0.2 + 0.1j, -0.4 + 0.3j):
        ev = np.linalg.eigvals(aba.transfer(pv, lat, lam).block(1))
        assert np.abs(ev - X.lambda_eig_xxz(sp, lat, [root], lam)).min() <= 1e-8


def test_bae_empty():
    assert X.bae_residual_xxz(X.XxzSpec(2, GAMMA), Lattice((0.1,)), []) == []


def test_bae_offshell_nonzero():
    sp = X.XxzSpec(3, GAMMA)
    r = X.bae_residual_xxz(sp, Lattice((0.1, -0.2)), [0.3 + 0.1j])
    assert abs(r[0]) > 1e-3


def test_bae_coincident():
    with pytest.raises(CoincidentRootsError):
        X.bae_residual_xxz(X.XxzSpec(2, GAMMA), Lattice((0.1, 0.2)), [0.3, 0.3])


def test_bae_shifted_form_agrees_on_shell():
    sp = X.XxzSpec(2, GAMMA)
    lat = Lattice.homogeneous(2, 0.0)
    # the symmetric convention moves the root -i gamma / 2 to the origin
    assert max(abs(r) for r in X.bae_residual_xxz(sp, lat, [0.0], shifted=True)) <= 1e-12


@pytest.mark.parametrize("a", [1, 2])
def test_f_closed_b1_sign(a):
    sp = X.XxzSpec(3, GAMMA)
    f0 = X.f_closed_xxz(sp, 0, 1, a, LAM, [MU])
    f1 = X.f_closed_xxz(sp, 1, 1, a, LAM, [MU])
    assert f0 == pytest.approx(-f1)


@pytest.mark.parametrize("a", [1, 2])
def test_f_closed_b1_matches_initial_condition(a):
    sp = X.XxzSpec(3, GAMMA)
    assert abs(X.f_closed_xxz(sp, 0, 1, a, LAM, [MU]) - aba.f_initial(X.provider(sp), a, LAM, MU)) <= 1e-10


@pytest.mark.parametrize("c", [0, 2])
def test_f_closed_b2_matches_recurrence(c):
    sp = X.XxzSpec(3, GAMMA)
    raps = [0.2 + 0.1j, -0.3 + 0.25j]
    got = aba.f_recur(X.provider(sp), c, 2, 1, LAM, raps)
    want = X.f_closed_xxz(sp, c, 2, 1, LAM, raps)
    assert abs(got / want - 1) <= 1e-10


def test_f_closed_domain():
    sp = X.XxzSpec(3, GAMMA)
    with pytest.raises(ValueError):
        X.f_closed_xxz(sp, 1, 2, 1, LAM, [0.1, 0.2])
    with pytest.raises(ValueError):
        X.f_closed_xxz(sp, 0, 3, 1, LAM, [0.1, 0.2, 0.3])


_x = st.floats(-0.8, 0.8, allow_nan=False)


@given(_x, _x, _x, _x, st.integers(2, 4))
def test_unitarity_property(a, b, c, d, N):
    sp = X.XxzSpec(N, GAMMA)
    lam, mu = complex(a, b), complex(c, d)
    if abs(cmath.sinh(lam - mu)) < 1e-3:
        return
    Rc = X.rcheck_matrix(sp, lam, mu) @ X.rcheck_matrix(sp, mu, lam)
    assert np.abs(Rc - np.eye(N * N)).max() <= 1e-12 * max(1, np.abs(Rc).max())


@given(_x, _x, _x, _x, st.integers(2, 4))
def test_theta_reciprocal_property(a, b, c, d, N):
    sp = X.XxzSpec(N, GAMMA)
    lam, mu = complex(a, b), complex(c, d)
    try:
        t = X.theta_xxz(sp, lam, mu) * X.theta_xxz(sp, mu, lam)
    except PoleError:
        return
    assert abs(t - 1) <= 1e-12 * max(1.0, abs(X.theta_xxz(sp, lam, mu)))
