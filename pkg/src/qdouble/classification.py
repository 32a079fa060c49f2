"""Fusion-rule profiles, partition duality and class counts for homogeneous p-groups.

For ``G = (Z_{p^n})^k`` with ``p`` odd, the group of group-likes is an
orthogonal sum ``sum_a m_a Gamma_a`` with ``Gamma_a = Z_{p^(n+a)} + Z_{p^(n-a)}``
and ``m_0 + ... + m_n = k``.  Conjugating the partition with ``m_i`` parts
equal to ``i`` gives the profile of the dual group ``(Z_{p^k})^n``.  The
brute-force census recounts everything from quadratic forms directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product as iproduct
from typing import Iterator

import numpy as np

from .config import check_cap
from .errors import ValidationError
from .groups import FinAbGroup, automorphism_generators, is_prime, subgroups_of_order

# ---------------------------------------------------------------------------
# partitions and profiles


def conjugate_partition(parts) -> tuple[int, ...]:
    lam = sorted((int(x) for x in parts if x > 0), reverse=True)
    if not lam:
        return ()
    return tuple(sum(1 for x in lam if x >= j) for j in range(1, lam[0] + 1))


@dataclass(frozen=True)
class FusionProfile:
    """Multiplicities ``m = (m_0, ..., m_n)`` with ``sum m = k``."""

    p: int | None
    n: int
    k: int
    m: tuple[int, ...]

    def __post_init__(self):
        if len(self.m) != self.n + 1 or any(x < 0 for x in self.m) or sum(self.m) != self.k:
            raise ValidationError(f"multiplicities {self.m} do not sum to k={self.k} over n+1 slots")

    @property
    def f(self) -> int:
        """Number of ``a >= 1`` with ``m_a >= 1``."""
        return sum(1 for a in range(1, self.n + 1) if self.m[a])

    def partition(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.n, 0, -1) for _ in range(self.m[i]))

    def exponents(self) -> list[int]:
        """Exponents ``e`` of the cyclic factors ``Z_{p^e}``, descending."""
        out = []
        for a, mult in enumerate(self.m):
            for _ in range(mult):
                out += [self.n + a, self.n - a]
        return sorted((e for e in out if e > 0), reverse=True)

    def to_json(self) -> dict:
        return {"p": self.p, "n": self.n, "k": self.k, "m": list(self.m), "f": self.f,
                "exponents": self.exponents()}


def _compositions(total: int, slots: int) -> Iterator[tuple[int, ...]]:
    if slots == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, slots - 1):
            yield (first,) + rest


def fusion_profiles(p: int | None, n: int, k: int) -> list[FusionProfile]:
    """All ``(m_0, ..., m_n)`` with ``sum = k``; ordered by ``(m_n, ..., m_1)`` descending."""
    if p is not None and (p == 2 or not is_prime(p)):
        raise ValidationError("p must be an odd prime")
    if n < 0 or k < 0:
        raise ValidationError("n and k must be non-negative")
    profs = [FusionProfile(p, n, k, m) for m in _compositions(k, n + 1)]
    profs.sort(key=lambda pr: tuple(pr.m[::-1]), reverse=True)
    return profs


def profile_group(profile: FusionProfile, p: int | None = None) -> FinAbGroup:
    p = p or profile.p
    if p is None:
        raise ValidationError("a prime is needed to build the group")
    return FinAbGroup.from_orders([p ** e for e in profile.exponents()])


def dual_profile(profile: FusionProfile) -> FusionProfile:
    """Profile for ``(Z_{p^k})^n`` obtained by conjugating the partition."""
    lam_t = conjugate_partition(profile.partition())
    s = [0] * (profile.k + 1)
    for part in lam_t:
        s[part] += 1
    s[0] = profile.n - sum(s[1:])
    return FusionProfile(profile.p, profile.k, profile.n, tuple(s))


def braided_count(profile: FusionProfile) -> int:
    return 2 ** profile.f


def total_braided_count(p: int | None, n: int, k: int) -> int:
    return sum(braided_count(pr) for pr in fusion_profiles(p, n, k))


def closed_form_braided(n: int, k: int) -> int | None:
    """The closed forms known for ``k <= 3``; ``None`` beyond."""
    if k == 1:
        return 2 * n + 1
    if k == 2:
        return 2 * n * n + 2 * n + 1
    if k == 3:
        num = 4 * n ** 3 + 6 * n ** 2 + 8 * n + 3
        return num // 3
    return None


def ab_labels(profile: FusionProfile) -> list[tuple[str, ...]]:
    """The ``2^f`` braided classes as A/B tuples, one letter per ``a >= 1`` with ``m_a >= 1``."""
    return [t for t in iproduct("AB", repeat=profile.f)]


def braided_bijection(profile: FusionProfile) -> list[tuple[tuple[str, ...], tuple[str, ...]]]:
    """Match braided classes of a profile and its dual by equal A/B tuples.

    Both sides have ``f`` letters, since the number of distinct parts of a
    partition equals that of its conjugate.
    """
    dual = dual_profile(profile)
    if dual.f != profile.f:
        raise ValidationError("f differs across the duality")
    return [(t, t) for t in ab_labels(profile)]


# ---------------------------------------------------------------------------
# the (Z_{p^2})^3 duality table


def render_group(exponents: list[int], p: int | None = None) -> str:
    sym = "p" if p is None else str(p)

    def cyc(e: int) -> str:
        return f"Z_{sym}" if e == 1 else f"Z_{{{sym}^{e}}}"

    if not exponents:
        return "0"
    if len(exponents) >= 4 and len(set(exponents)) == 1:
        return f"({cyc(exponents[0])})^{len(exponents)}"
    return " x ".join(cyc(e) for e in exponents)


@dataclass
class TableRow:
    m: tuple[int, ...]
    gamma: str
    s: tuple[int, ...]
    gamma_dual: str
    f: int

    def to_json(self) -> dict:
        return {"m": list(self.m), "gamma": self.gamma, "s": list(self.s),
                "gamma_dual": self.gamma_dual, "f": self.f}


@dataclass
class Table:
    n: int
    k: int
    rows: list[TableRow]

    def to_json(self) -> dict:
        return {"n": self.n, "k": self.k, "rows": [r.to_json() for r in self.rows]}

    def render(self) -> str:
        head = (f"m_1..m_{self.n}", "Gamma", f"s_1..s_{self.k}", "Gamma'", "f")
        body = [(str(r.m), r.gamma, str(r.s), r.gamma_dual, str(r.f)) for r in self.rows]
        widths = [max(len(row[i]) for row in [head] + body) for i in range(5)]
        lines = [" | ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in [head] + body]
        lines.insert(1, "-+-".join("-" * w for w in widths))
        return "\n".join(lines) + "\n"


def duality_table(n: int, k: int, p: int | None = None) -> Table:
    rows = []
    for pr in fusion_profiles(None, n, k):
        du = dual_profile(pr)
        if du.f != pr.f:
            raise ValidationError("f is not preserved by duality")
        rows.append(TableRow(pr.m[1:], render_group(pr.exponents(), p), du.m[1:],
                             render_group(du.exponents(), p), pr.f))
    return Table(n, k, rows)


def table_one(p: int | None = None) -> Table:
    """The duality table for ``G = (Z_{p^2})^3`` and ``G' = (Z_{p^3})^2``."""
    if p is not None and (p == 2 or not is_prime(p)):
        raise ValidationError("p must be an odd prime")
    return duality_table(2, 3, p)


# ---------------------------------------------------------------------------
# brute-force census


def _partitions(total: int, max_part: int | None = None) -> Iterator[tuple[int, ...]]:
    max_part = total if max_part is None else max_part
    if total == 0:
        yield ()
        return
    for first in range(min(total, max_part), 0, -1):
        for rest in _partitions(total - first, first):
            yield (first,) + rest


@dataclass
class CensusBucket:
    group: tuple[int, ...]
    forms: int
    classes: int
    expected: int | None
    profile: tuple[int, ...] | None

    def to_json(self) -> dict:
        return {"group": list(self.group), "forms": self.forms, "classes": self.classes,
                "expected_classes": self.expected,
                "profile": None if self.profile is None else list(self.profile)}


@dataclass
class CensusReport:
    p: int
    n: int
    k: int
    buckets: list[CensusBucket]
    expected_monoidal: int
    expected_braided: int

    @property
    def monoidal(self) -> int:
        return len(self.buckets)

    @property
    def braided(self) -> int:
        return sum(b.classes for b in self.buckets)

    @property
    def ok(self) -> bool:
        return (self.monoidal == self.expected_monoidal and self.braided == self.expected_braided
                and all(b.classes == b.expected for b in self.buckets))

    def to_json(self) -> dict:
        return {"p": self.p, "n": self.n, "k": self.k, "monoidal": self.monoidal,
                "braided": self.braided, "expected_monoidal": self.expected_monoidal,
                "expected_braided": self.expected_braided, "ok": self.ok,
                "buckets": [b.to_json() for b in self.buckets]}


def brute_force_profile_census(p: int, n: int, k: int, max_forms: int = 200_000) -> CensusReport:
    """Count, on every group of order ``p^(2nk)``, the equivalence classes of
    non-degenerate quadratic forms having a metabolizer isomorphic to ``(Z_{p^n})^k``."""
    from .quadratic import (all_quadratic_forms, batch_nondegenerate, form_orbit_labels)

    if p == 2 or not is_prime(p):
        raise ValidationError("p must be an odd prime")
    order = p ** (2 * n * k)
    check_cap("elements", order, "census group order")
    target = [p ** n] * k
    by_group = {tuple(pr.exponents()): pr for pr in fusion_profiles(p, n, k)}
    buckets = []
    for part in _partitions(2 * n * k):
        G = FinAbGroup.from_orders([p ** e for e in part])
        fam = all_quadratic_forms(G, max_forms=max_forms)
        nd = batch_nondegenerate(fam)
        mets = [S for S in subgroups_of_order(G, p ** (n * k)) if S.isomorphism_type() == target]
        has = np.zeros(fam.size, dtype=bool)
        for S in mets:
            has |= ~fam.Q[:, S.indices].any(axis=1)
        rows = np.nonzero(nd & has)[0]
        if rows.size == 0:
            continue
        classes, _ = form_orbit_labels(fam, automorphism_generators(G), rows)
        exps = tuple(sorted(part, reverse=True))
        prof = by_group.get(exps)
        buckets.append(CensusBucket(G.factors, int(rows.size), classes,
                                    braided_count(prof) if prof else None,
                                    prof.m if prof else None))
    return CensusReport(p, n, k, buckets, math.comb(n + k, k), total_braided_count(p, n, k))


# ---------------------------------------------------------------------------
# Aut(G)-orbits against gauge classes


def aut_orbits_on_abelian_classes(G: FinAbGroup) -> list[list[tuple[int, ...]]]:
    """Orbits of ``Aut(G)`` on ``H^3(G)_ab`` under pullback, as sorted class lists."""
    from .cohomology import enumerate_h3, pullback

    H = enumerate_h3(G)
    classes = {c: w for c, w in H.abelian_classes()}
    gens = automorphism_generators(G)
    parent = {c: c for c in classes}

    def find(c):
        while parent[c] != c:
            parent[c] = parent[parent[c]]
            c = parent[c]
        return c

    for c, w in classes.items():
        for M in gens:
            img = H.class_of(pullback(w, G, M))
            a, b = find(c), find(img)
            if a != b:
                parent[max(a, b)] = min(a, b)
    groups: dict = {}
    for c in classes:
        groups.setdefault(find(c), []).append(c)
    return sorted(sorted(v) for v in groups.values())


def gauge_partition(G: FinAbGroup) -> list[list[tuple[int, ...]]]:
    """Abelian classes grouped by equivalence of their quadratic spaces."""
    from .cohomology import enumerate_h3
    from .quadratic import equivalent
    from .twisted_double import DoubleAlgebra

    H = enumerate_h3(G)
    reps: list[tuple[object, list]] = []
    for c, w in H.abelian_classes():
        sp = DoubleAlgebra(G, w, check=False).quadratic_form()
        for rep, members in reps:
            if equivalent(rep, sp).equivalent:
                members.append(c)
                break
        else:
            reps.append((sp, [c]))
    return sorted(sorted(m) for _, m in reps)
