import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from qdouble.classification import (FusionProfile, ab_labels, aut_orbits_on_abelian_classes,
                                    braided_bijection, braided_count, brute_force_profile_census,
                                    closed_form_braided, conjugate_partition, dual_profile, duality_table,
                                    fusion_profiles, gauge_partition, profile_group, render_group,
                                    table_one, total_braided_count)
from qdouble.errors import ValidationError
from qdouble.groups import FinAbGroup


def prof(n, k, m_tail, p=3):
    """Profile from ``(m_1, ..., m_n)``, filling ``m_0`` so the sum is ``k``."""
    return FusionProfile(p, n, k, (k - sum(m_tail),) + tuple(m_tail))


# ---------------------------------------------------------------------------
# partitions and profiles


@given(st.lists(st.integers(1, 8), max_size=8))
def test_conjugate_partition_is_involution(parts):
    lam = tuple(sorted(parts, reverse=True))
    assert conjugate_partition(conjugate_partition(lam)) == lam
    assert sum(conjugate_partition(lam)) == sum(lam)


def test_conjugate_partition_example():
    assert conjugate_partition((3, 1)) == (2, 1, 1)
    assert conjugate_partition(()) == ()


@pytest.mark.parametrize("n,k,count", [(1, 1, 2), (2, 3, 10), (0, 4, 1), (3, 0, 1)])
def test_profile_counts(n, k, count):
    assert len(fusion_profiles(3, n, k)) == count


def test_profile_rejects_bad_input():
    with pytest.raises(ValidationError):
        fusion_profiles(2, 1, 1)
    with pytest.raises(ValidationError):
        fusion_profiles(9, 1, 1)
    with pytest.raises(ValidationError):
        FusionProfile(3, 2, 3, (1, 1, 0))


def test_profile_groups():
    assert profile_group(prof(2, 3, (0, 3))).factors == (81, 81, 81)
    assert sorted(profile_group(prof(2, 3, (1, 1))).factors) == sorted([81, 27, 9, 9, 3])
    assert profile_group(prof(2, 3, (0, 0))).factors == (9,) * 6


def test_dual_profile_examples():
    assert dual_profile(prof(2, 3, (0, 3))).m[1:] == (0, 0, 2)
    assert dual_profile(prof(2, 3, (2, 1))).m[1:] == (1, 0, 1)
    assert dual_profile(prof(2, 3, (0, 0))).m[1:] == (0, 0, 0)


@given(st.integers(0, 6), st.integers(0, 6), st.data())
def test_duality_involution_preserves_f_and_order(n, k, data):
    profs = fusion_profiles(None, n, k)
    pr = profs[data.draw(st.integers(0, len(profs) - 1))]
    du = dual_profile(pr)
    assert (du.n, du.k) == (k, n)
    assert dual_profile(du) == pr
    assert du.f == pr.f
    assert sum(pr.exponents()) == 2 * n * k == sum(du.exponents())


@pytest.mark.parametrize("n", range(0, 7))
@pytest.mark.parametrize("k", range(0, 7))
def test_profile_count_is_binomial(n, k):
    assert len(fusion_profiles(None, n, k)) == math.comb(n + k, k)


def test_duality_is_a_bijection():
    profs = fusion_profiles(None, 3, 4)
    duals = {dual_profile(pr).m for pr in profs}
    assert duals == {pr.m for pr in fusion_profiles(None, 4, 3)}


# ---------------------------------------------------------------------------
# counts


@pytest.mark.parametrize("n", range(1, 7))
@pytest.mark.parametrize("k", [1, 2, 3])
def test_closed_forms(n, k):
    assert total_braided_count(None, n, k) == closed_form_braided(n, k)


def test_closed_form_examples():
    assert closed_form_braided(1, 3) == 7
    assert closed_form_braided(2, 1) == 5
    assert closed_form_braided(1, 4) is None


@pytest.mark.parametrize("n,k", [(2, 3), (3, 3), (2, 5)])
def test_braided_total_symmetric(n, k):
    assert total_braided_count(None, n, k) == total_braided_count(None, k, n)


def test_ab_bijection():
    pr = prof(2, 3, (1, 2))
    assert braided_count(pr) == 4 == len(ab_labels(pr))
    pairs = braided_bijection(pr)
    assert len({a for a, _ in pairs}) == 4 and all(a == b for a, b in pairs)


# ---------------------------------------------------------------------------
# the (Z_{p^2})^3 table


def test_render_group():
    assert render_group([4, 4, 4]) == "Z_{p^4} x Z_{p^4} x Z_{p^4}"
    assert render_group([2] * 6) == "(Z_{p^2})^6"
    assert render_group([3, 1], 5) == "Z_{5^3} x Z_5"
    assert render_group([]) == "0"


def test_table_one_rows():
    t = table_one()
    assert len(t.rows) == 10
    rows = {r.m: r for r in t.rows}
    assert rows[(1, 2)].gamma_dual == "Z_{p^6} x Z_{p^5} x Z_p" and rows[(1, 2)].f == 2
    assert rows[(3, 0)].gamma_dual == "Z_{p^6} x Z_{p^3} x Z_{p^3}" and rows[(3, 0)].f == 1
    assert rows[(0, 0)].gamma == "(Z_{p^2})^6" and rows[(0, 0)].f == 0
    assert "Gamma'" in t.render().splitlines()[0]


def test_table_one_f_matches_dual_side():
    dual_side = {r.m: r for r in duality_table(3, 2).rows}
    for r in table_one().rows:
        assert dual_side[r.s].f == r.f
        assert dual_side[r.s].gamma == r.gamma_dual


def test_table_json_round_trip():
    obj = json.loads(json.dumps(table_one(3).to_json()))
    assert obj["n"] == 2 and obj["k"] == 3 and len(obj["rows"]) == 10
    assert obj["rows"][-1]["gamma"] == "(Z_{3^2})^6"


def test_table_one_rejects_even_prime():
    with pytest.raises(ValidationError):
        table_one(2)


# ---------------------------------------------------------------------------
# brute force


@pytest.mark.parametrize("p", [3, 5])
def test_census_n1_k1(p):
    rep = brute_force_profile_census(p, 1, 1)
    assert rep.ok
    counts = {b.group: b.classes for b in rep.buckets if b.classes}
    assert counts == {(p * p,): 2, (p, p): 1}
    assert rep.braided == 3 and rep.monoidal == 2


def test_census_json():
    obj = json.loads(json.dumps(brute_force_profile_census(3, 1, 1).to_json()))
    assert obj["ok"] is True


@pytest.mark.parametrize("fac", [(2,), (3,), (4,), (2, 2)])
def test_aut_orbits_match_gauge_partition(fac):
    G = FinAbGroup.from_orders(fac)
    norm = lambda parts: sorted(sorted(p) for p in parts)  # noqa: E731
    assert norm(aut_orbits_on_abelian_classes(G)) == norm(gauge_partition(G))
