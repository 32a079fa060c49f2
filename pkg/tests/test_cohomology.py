import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qdouble.cohomology import (AbelianCocycle, Cochain, H3, carry_cocycle, coboundary, em_trace,
                                enumerate_h3, epsilon_dual, ext_class, ext_classes, inflate, is_abelian,
                                is_cocycle, is_ghat_coboundary, lambda_map, lambda_report, omega_slice,
                                product_cocycle, pullback, solve_tau, symmetrize_dual, xi)
from qdouble.config import use_caps
from qdouble.errors import CapExceeded, NotACocycle, NotAbelian, NotQuadratic
from qdouble.groups import FinAbGroup, automorphisms

SMALL = [(2,), (3,), (4,), (2, 2), (6,), (3, 3), (2, 4), (9,)]
groups = st.sampled_from(SMALL).map(FinAbGroup)


def G(*f):
    return FinAbGroup.from_orders(f)


def random_cochain(Gr, arity, den, seed):
    rng = np.random.default_rng(seed)
    num = rng.integers(0, den, size=(Gr.order,) * arity)
    for ax in range(arity):
        np.moveaxis(num, ax, 0)[0] = 0
    return Cochain(Gr, num, den)


def triple_product():
    """x1*y2*z3 / 2 on Z2^3: a cocycle whose antisymmetrization is nonzero."""
    return Cochain.from_function(G(2, 2, 2), 3, lambda x, y, z: x[0] * y[1] * z[2], 2)


def test_coboundary_examples():
    Z2 = G(2)
    assert coboundary(Cochain.zero(Z2, 1)).is_zero()
    c = Cochain(Z2, np.array([0, 1]), 2)
    # delta c(1,1) = c(1) - c(0) + c(1) = 1 = 0 mod 1
    assert coboundary(c).is_zero()
    d = Cochain(G(3), np.array([0, 1, 0]), 3)
    # delta d(1,1) = d(1) - d(2) + d(1)
    assert str(coboundary(d).value(1, 1)) == "2/3"


@given(groups, st.integers(1, 2), st.integers(0, 10 ** 6))
def test_delta_squared_is_zero(Gr, arity, seed):
    c = random_cochain(Gr, arity, 12, seed)
    assert coboundary(coboundary(c)).is_zero()


def test_is_cocycle_and_abelian():
    Z3 = G(3)
    assert is_cocycle(Cochain.zero(Z3, 3)) and is_abelian(Cochain.zero(Z3, 3))
    w = enumerate_h3(Z3).representative((1,))
    bad = Cochain(Z3, w.num.copy(), w.den)
    bad.num[1, 1, 2] = (bad.num[1, 1, 2] + 1) % bad.den
    assert not is_cocycle(bad)
    with pytest.raises(NotACocycle):
        is_abelian(bad)
    b = random_cochain(G(2, 2), 2, 4, 3)
    assert is_abelian(coboundary(b))
    tp = triple_product()
    assert is_cocycle(tp) and not is_abelian(tp)
    with pytest.raises(NotAbelian):
        solve_tau(tp)


def test_slice_formula():
    w = enumerate_h3(G(4)).representative((1,))
    s = omega_slice(w, 1)
    for x in range(4):
        for y in range(4):
            exp = (w.num[1, x, y] + w.num[x, y, 1] - w.num[x, 1, y]) % w.den
            assert s.num[x, y] * (w.den // s.den) % w.den == exp


@pytest.mark.parametrize("f,order", [((2,), 2), ((3,), 3), ((4,), 4), ((5,), 5), ((6,), 6), ((8,), 8)])
def test_h3_cyclic(f, order):
    H = enumerate_h3(G(*f))
    assert H.order == order
    assert H.abelian_subgroup().order == order


def test_h3_rank_two():
    H = enumerate_h3(G(3, 3))
    assert H.order == 27 and H.abelian_subgroup().order == 27
    H = enumerate_h3(G(2, 2))
    assert H.order == 8 and H.abelian_subgroup().order == 8
    with pytest.raises(CapExceeded):
        H3(G(16))
    with use_caps(cohomology=8, elements=64), pytest.raises(CapExceeded):
        H3(G(9))


def test_h3_nonabelian_part():
    H = enumerate_h3(G(2, 2, 2))
    assert H.order == 128 and H.abelian_subgroup().order == 64
    assert H.class_of(triple_product()) not in {c for c, _ in H.abelian_classes()}


@given(groups, st.integers(0, 10 ** 6))
def test_class_of_ignores_coboundaries(Gr, seed):
    H = enumerate_h3(Gr)
    rng = np.random.default_rng(seed)
    k = int(rng.integers(H.order))
    c = tuple(int(v) for v in H.group.element_array()[k])
    w = H.representative(c)
    assert is_cocycle(w) and w.is_normalized()
    b = random_cochain(Gr, 2, 4 * Gr.order, seed)
    assert H.class_of(w + coboundary(b)) == c


def test_solve_tau():
    Z4 = G(4)
    tau = solve_tau(Cochain.zero(Z4, 3))
    assert not tau.table.any()
    for _, w in enumerate_h3(G(2, 2)).abelian_classes():
        tau = solve_tau(w)
        for x in range(4):
            assert coboundary(tau.cochain(x)) == omega_slice(w, x)


def test_lambda_examples():
    Z2, Z3 = G(2), G(3)
    assert not lambda_map(Cochain.zero(Z3, 3)).table.any()
    w2 = enumerate_h3(Z2).representative((1,))
    assert is_ghat_coboundary(lambda_map(w2))
    w3 = enumerate_h3(Z3).representative((1,))
    assert not is_ghat_coboundary(lambda_map(w3))


def test_lambda_class_independent_of_tau():
    w = enumerate_h3(G(4)).representative((1,))
    tau = solve_tau(w)
    # any character-valued shift of tau is another solution
    shifted = type(tau)(tau.group, (tau.table + tau.den // 4 * np.outer(np.arange(4), np.arange(4))) % tau.den,
                        tau.den)
    assert ext_class(lambda_map(w, tau)) == ext_class(lambda_map(w, shifted))


@pytest.mark.parametrize("f", [(2,), (3,), (4,), (2, 2), (6,)])
def test_lambda_additive(f):
    Gr = G(*f)
    cls = enumerate_h3(Gr).abelian_classes()
    for _, a in cls[:4]:
        for _, b in cls[:4]:
            lhs = lambda_map(a + b) - lambda_map(a) - lambda_map(b)
            assert is_ghat_coboundary(lhs)


def test_xi_and_epsilon():
    Z3 = G(3)
    assert xi(carry_cocycle(Z3, [[0]])).is_zero()
    beta = carry_cocycle(Z3, [[1]])
    w = xi(beta)
    assert is_abelian(w)
    assert is_ghat_coboundary(lambda_map(w) - symmetrize_dual(beta))
    for b in ext_classes(G(3, 3)):
        assert ext_class(epsilon_dual(epsilon_dual(b))) == ext_class(b)
        s = symmetrize_dual(b)
        assert ext_class(epsilon_dual(s)) == ext_class(s)


@pytest.mark.parametrize("f", [(2,), (3,), (4,), (2, 2), (6,), (3, 3)])
def test_kernel_and_image_of_lambda(f):
    rep = lambda_report(G(*f))
    assert len(rep.kernel) == rep.omega2_order
    assert rep.image == rep.image_s


def test_odd_order_lambda_injective():
    for f in [(3,), (5,), (3, 3), (9,)]:
        rep = lambda_report(G(*f))
        assert len(rep.kernel) == 1


def test_inflation_and_products():
    Z2 = G(2)
    w = enumerate_h3(Z2).representative((1,))
    Z4 = G(4)
    infl = inflate(w, Z4, np.array([[1]]))
    assert is_cocycle(infl)
    assert inflate(Cochain.zero(Z2, 3), Z4, np.array([[1]])).is_zero()
    z, P = product_cocycle(w, enumerate_h3(G(3)).representative((1,)))
    assert P.group.factors == (6,) and is_cocycle(z)


def test_pullback_by_automorphism_preserves_abelian_subgroup():
    Gr = G(3, 3)
    H = enumerate_h3(Gr)
    ab = {c for c, _ in H.abelian_classes()}
    for M in automorphisms(Gr)[:10]:
        for c, w in H.abelian_classes()[:5]:
            assert H.class_of(pullback(w, Gr, M)) in ab


def test_em_trace():
    Z4 = G(4)
    t = em_trace(AbelianCocycle(Cochain.zero(Z4, 3), Cochain.zero(Z4, 2)))
    assert t.is_zero()
    b = Cochain.from_function(Z4, 2, lambda x, y: x[0] * y[0], 4)
    c = AbelianCocycle(Cochain.zero(Z4, 3), b)
    assert c.is_valid()
    assert [str(v) for v in (em_trace(c).value(i) for i in range(4))] == ["0/1", "1/4", "0/1", "1/4"]
    bad = AbelianCocycle(Cochain.zero(Z4, 3), Cochain.from_function(Z4, 2, lambda x, y: int(x == y == (1,)), 4))
    with pytest.raises(NotQuadratic):
        em_trace(bad)
