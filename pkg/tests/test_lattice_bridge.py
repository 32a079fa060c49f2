import json
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qdouble.cohomology import enumerate_h3, is_abelian, is_cocycle
from qdouble.errors import NotEven, NotSelfDual, SingularGram
from qdouble.groups import FinAbGroup
from qdouble.lattice_bridge import (LatticePair, RationalLattice, canonical_section, cocycle_from_lattice,
                                    discriminant_space, dual_lattice, hyperbolic_plane, lattice_to_gamma,
                                    pairing_is_perfect, realize_space_as_lattice, solve_alternating_c)
from qdouble.quadratic import QuadSpace, equivalent, find_metabolizers
from qdouble.twisted_double import DoubleAlgebra, verify_tau

GLUE_3 = [[F(1, 3), F(-1, 3)]]

GLUES = [
    (1, GLUE_3),
    (1, [[F(1, 3), F(1, 3)]]),
    (1, [[F(1, 9), 0]]),
    (1, [[F(1, 2), F(1, 4)]]),
    (2, [[F(1, 3), 0, 0, 0], [0, F(1, 3), F(1, 9), F(1, 3)]]),
]


def glued(copies, glue):
    return LatticePair.from_glue(hyperbolic_plane(copies), glue)


# ---------------------------------------------------------------------------
# lattices


def test_rational_lattice_flags():
    U = RationalLattice(hyperbolic_plane(1))
    assert U.is_even() and U.is_unimodular() and U.det == -1
    odd = RationalLattice([[1]])
    assert odd.is_integral() and not odd.is_even()
    with pytest.raises(SingularGram):
        dual_lattice([[0, 0], [0, 1]])


def test_dual_lattice_examples():
    # unimodular: the dual is the lattice itself
    D = dual_lattice(hyperbolic_plane(1))
    assert sorted(map(tuple, D)) == [(0, 1), (1, 0)]
    # Z with <x, y> = xy/5 has dual 5Z
    assert dual_lattice([[F(1, 5)]]) == [[5]]
    # the double dual of a sublattice spans the sublattice again
    gram = [[F(2, 3), F(1, 3)], [F(1, 3), F(4, 3)]]
    B = [[1, 1], [0, 2]]
    DD = dual_lattice(gram, dual_lattice(gram, B))
    assert abs(np.linalg.det(np.array(DD, dtype=float))) == pytest.approx(abs(np.linalg.det(B)))
    both = np.linalg.solve(np.array(B, dtype=float).T, np.array(DD, dtype=float).T)
    assert np.allclose(both, np.round(both))


def test_pair_rejects_bad_sublattices():
    with pytest.raises(NotEven):
        LatticePair([[1, 0], [0, -1]], [[1, 0], [0, 1]])
    with pytest.raises(NotSelfDual):
        LatticePair([[2, 0], [0, 2]], [[1, 0], [0, 1]])


def test_index_three_glue():
    pair = glued(*GLUES[0])
    assert pair.index == 3
    assert pair.glue_group().group.factors == (3,)
    disc = discriminant_space(pair)
    assert disc.space.group.factors == (9,)
    assert disc.metabolizer.order == 3
    assert pairing_is_perfect(pair)


@pytest.mark.parametrize("copies,glue", GLUES)
def test_index_square_law_and_pairing(copies, glue):
    pair = glued(copies, glue)
    disc = discriminant_space(pair)
    assert disc.space.group.order == pair.index ** 2
    assert disc.space.is_nondegenerate() and disc.space.is_metabolizer(disc.metabolizer)
    assert pairing_is_perfect(pair)


def test_trivial_pair():
    pair = LatticePair(hyperbolic_plane(1), [[1, 0], [0, 1]])
    disc = discriminant_space(pair)
    assert disc.space.group.order == 1
    lc = cocycle_from_lattice(pair)
    assert lc.omega.group.order == 1 and not lc.omega.num.any()


# ---------------------------------------------------------------------------
# alternating form and cocycle


def test_alternating_form_on_m_basis():
    pair = LatticePair(hyperbolic_plane(2), np.eye(4, dtype=int).tolist())
    c = solve_alternating_c(pair)
    for i in range(4):
        for j in range(4):
            assert (c.value(np.eye(4, dtype=int)[i], np.eye(4, dtype=int)[j])
                    - pair.M.gram[i][j] / 2) % 1 == 0


@given(st.lists(st.integers(-20, 20), min_size=2, max_size=2))
def test_alternating_form_vanishes_on_diagonal(x):
    c = solve_alternating_c(glued(*GLUES[0]))
    assert c.value(x, x) == 0


def test_alternating_form_meets_m_constraints():
    pair = glued(*GLUES[0])
    c = solve_alternating_c(pair)
    T = pair.T
    for a in range(2):
        for b in range(2):
            assert (c.value(T[a], T[b]) - pair.M.gram[a][b] / 2) % 1 == 0


def test_canonical_section_normalized():
    pair = glued(*GLUES[2])
    sec = canonical_section(pair)
    assert not sec(0).any()
    assert (pair.glue_group().image(sec.reps) == sec.group.element_array()).all()
    assert (canonical_section(pair).reps == sec.reps).all()


@pytest.mark.parametrize("copies,glue", GLUES)
def test_cocycle_from_lattice(copies, glue):
    pair = glued(copies, glue)
    lc = cocycle_from_lattice(pair)
    assert is_cocycle(lc.omega) and is_abelian(lc.omega)
    # the tau family solves the slices exactly
    verify_tau(lc.omega, lc.tau)
    ident = lattice_to_gamma(pair, lc)
    assert sorted(ident.perm.tolist()) == list(range(pair.index ** 2))


def test_cocycle_is_deterministic():
    a = cocycle_from_lattice(glued(*GLUES[0])).to_json()
    b = cocycle_from_lattice(glued(*GLUES[0])).to_json()
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


# ---------------------------------------------------------------------------
# realisation


def test_realize_trivial_space():
    pair = realize_space_as_lattice(QuadSpace.trivial())
    assert pair.index == 1 and pair.M.is_unimodular()


def test_realize_cyclic_nine():
    # a nontrivial class on Z_3 has Gamma = Z_9
    Z3 = FinAbGroup.from_orders([3])
    w = enumerate_h3(Z3).representative(np.array([1]))
    space = DoubleAlgebra(Z3, w).quadratic_form()
    assert space.group.factors == (9,)
    pair = realize_space_as_lattice(space)
    assert pair.index == 3
    disc = discriminant_space(pair)
    assert disc.space.group.factors == (9,)
    assert equivalent(disc.space, space).equivalent


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_realize_hyperbolic(n):
    space = QuadSpace.from_polynomial(FinAbGroup.from_orders([n, n]), [0, 0], {(0, 1): f"1/{n}"})
    pair = realize_space_as_lattice(space)
    assert pair.index == n
    assert equivalent(discriminant_space(pair).space, space).equivalent


@pytest.mark.parametrize("fac", [(2,), (3,), (4,), (2, 2), (9,), (8,)])
def test_realize_round_trip_all_abelian_classes(fac):
    G = FinAbGroup.from_orders(fac)
    for _, w in enumerate_h3(G).abelian_classes():
        space = DoubleAlgebra(G, w, check=False).quadratic_form()
        for met in find_metabolizers(space)[:2]:
            pair = realize_space_as_lattice(space, met)
            disc = discriminant_space(pair)
            assert equivalent(disc.space, space).equivalent
            assert disc.space.group.order == pair.index ** 2
            lattice_to_gamma(pair)


def test_pair_json_round_trip():
    pair = glued(*GLUES[4])
    again = LatticePair.from_json(json.loads(json.dumps(pair.to_json())))
    assert again.to_json() == pair.to_json()
    assert again.index == pair.index == 27
