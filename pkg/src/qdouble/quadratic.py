"""Quadratic and bilinear spaces on finite abelian groups.

A quadratic space stores the numerators of ``q`` over a common denominator,
one entry per group element in the canonical element order.  The associated
form is ``b_q(x, y) = q(x + y) - q(x) - q(y)``.

Besides single-space operations (radical, metabolizers, equivalence, Gauss
sums, orthogonal and metabolic decompositions) the module has batch tools
that enumerate every quadratic function on a small group as one integer
array; the exhaustive checks and the census build on those.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import mpmath
import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .algebra_core import QZ, RootSum, cyclotomic_reduction_matrix, rootsum_norm_sq
from .config import check_cap
from .errors import (CapExceeded, CheckFailed, ConstructionFailed, Degenerate, NotOddPrime,
                     NotQuadratic, SnapAmbiguous, ValidationError)
from .groups import (FinAbGroup, Product, Subgroup, Subquotient, closure, direct_product,
                     prime_factors, subgroups_of_order, sylow)

GAUSS_TOLERANCE = 1e-6
GAUSS_PRECISION = 128


def _reduce_fraction_table(num: np.ndarray, den: int) -> tuple[np.ndarray, int]:
    num = np.asarray(num, dtype=np.int64) % den
    g = math.gcd(den, *(int(v) for v in np.unique(num)))
    return num // g, den // g


def _qz_strings(num: np.ndarray, den: int) -> list[str]:
    return [str(QZ(int(v), den)) for v in np.ravel(num)]


def _parse_qz_list(values: Sequence) -> tuple[np.ndarray, int]:
    qs = [v if isinstance(v, QZ) else QZ.parse(str(v)) for v in values]
    den = math.lcm(1, *(q.denominator for q in qs))
    return np.array([q.numerator * (den // q.denominator) for q in qs], dtype=np.int64), den


def _is_square(n: int) -> bool:
    return math.isqrt(n) ** 2 == n


def _subgroup_of(G: FinAbGroup, idx) -> Subgroup:
    return Subgroup(G, np.asarray(idx, dtype=np.int64))


# ---------------------------------------------------------------------------
# bilinear spaces


class BilinSpace:
    """A symmetric bilinear form ``b: G x G -> Q/Z`` stored as ``num / den``."""

    def __init__(self, group: FinAbGroup, b: np.ndarray, den: int, check: bool = True):
        n = group.order
        b = np.asarray(b, dtype=np.int64)
        if b.shape != (n, n):
            raise ValidationError(f"bilinear table must have shape ({n}, {n})")
        self.group = group
        self.b, self.den = _reduce_fraction_table(b, int(den))
        if check:
            self.validate()

    def validate(self) -> None:
        G = self.group
        if (self.b != self.b.T).any():
            raise ValidationError("bilinear form is not symmetric")
        T = G.add_table()
        # additivity in the first slot against generators implies it everywhere
        for g in G.generators():
            gi = G.index(g)
            if ((self.b[T[:, gi], :] - self.b - self.b[gi][None, :]) % self.den).any():
                raise ValidationError("form is not bilinear")

    def value(self, i: int, j: int) -> QZ:
        return QZ(int(self.b[i, j]), self.den)

    def perp(self, S: Subgroup) -> Subgroup:
        if S.order == 1:
            return _subgroup_of(self.group, np.arange(self.group.order))
        cols = self.group.index(S.gens)
        return _subgroup_of(self.group, np.nonzero(~self.b[:, np.atleast_1d(cols)].any(axis=1))[0])

    def radical(self) -> Subgroup:
        return self.perp(_subgroup_of(self.group, np.arange(self.group.order)))

    def is_nondegenerate(self) -> bool:
        return self.radical().order == 1

    def restrict(self, S: Subgroup) -> tuple["BilinSpace", Subquotient]:
        sq = Subquotient(S)
        H = sq.group
        lifted = self.group.index(sq.lift(H.element_array())) if H.rank else np.array([0])
        lifted = np.atleast_1d(lifted)
        return BilinSpace(H, self.b[np.ix_(lifted, lifted)], self.den, check=False), sq

    def to_json(self) -> dict:
        return {"group": self.group.to_json(),
                "b": [_qz_strings(row, self.den) for row in self.b]}

    @classmethod
    def from_json(cls, obj: dict) -> "BilinSpace":
        G = FinAbGroup.from_json(obj["group"])
        flat, den = _parse_qz_list([v for row in obj["b"] for v in row])
        return cls(G, flat.reshape(G.order, G.order), den)


# ---------------------------------------------------------------------------
# quadratic spaces


class QuadSpace:
    """A quadratic function ``q: G -> Q/Z`` given by numerators over ``den``."""

    def __init__(self, group: FinAbGroup, q: np.ndarray, den: int, check: bool = True):
        q = np.asarray(q, dtype=np.int64).ravel()
        if q.shape != (group.order,):
            raise ValidationError(f"q table must have {group.order} entries")
        self.group = group
        self.q, self.den = _reduce_fraction_table(q, int(den))
        self._b = None
        if check:
            self.validate()

    # construction --------------------------------------------------------

    @classmethod
    def from_function(cls, group: FinAbGroup, fn: Callable[[tuple[int, ...]], QZ],
                      check: bool = True) -> "QuadSpace":
        vals, den = _parse_qz_list([fn(tuple(int(v) for v in x)) for x in group.element_array()])
        return cls(group, vals, den, check=check)

    @classmethod
    def from_polynomial(cls, group: FinAbGroup, diag: Sequence, cross: dict | None = None,
                        check: bool = True) -> "QuadSpace":
        """``q(x) = sum_i a_i x_i^2 + sum_{i<j} c_ij x_i x_j`` with values in Q/Z."""
        cross = cross or {}
        a = [v if isinstance(v, QZ) else QZ.parse(str(v)) for v in diag]
        c = {k: (v if isinstance(v, QZ) else QZ.parse(str(v))) for k, v in cross.items()}
        den = math.lcm(1, *(v.denominator for v in a), *(v.denominator for v in c.values()))
        E = group.element_array().astype(np.int64)
        q = np.zeros(group.order, dtype=np.int64)
        for i, v in enumerate(a):
            q += E[:, i] ** 2 * (v.numerator * (den // v.denominator))
        for (i, j), v in c.items():
            q += E[:, i] * E[:, j] * (v.numerator * (den // v.denominator))
        return cls(group, q % den, den, check=check)

    @classmethod
    def trivial(cls) -> "QuadSpace":
        return cls(FinAbGroup(()), np.zeros(1, dtype=np.int64), 1)

    def validate(self) -> None:
        G = self.group
        q, den = self.q, self.den
        if q[0]:
            raise NotQuadratic("q(0) must be 0")
        for a in range(G.exponent() + 1):
            if ((q[G.scalar_table(a)] - a * a * q) % den).any():
                raise NotQuadratic(f"q(ax) != a^2 q(x) for a = {a}")
        try:
            BilinSpace(G, self.bilinear()[0], self.bilinear()[1], check=True)
        except ValidationError as exc:
            raise NotQuadratic("associated form is not bilinear") from exc

    # basic data ----------------------------------------------------------

    @property
    def order(self) -> int:
        return self.group.order

    def value(self, i: int) -> QZ:
        return QZ(int(self.q[i]), self.den)

    def bilinear(self) -> tuple[np.ndarray, int]:
        """``(num, den)`` with ``b_q(x, y) = num[x, y] / den``."""
        if self._b is None:
            T = self.group.add_table()
            self._b = (self.q[T] - self.q[:, None] - self.q[None, :]) % self.den
        return self._b, self.den

    def bilinear_space(self) -> BilinSpace:
        b, den = self.bilinear()
        return BilinSpace(self.group, b, den, check=False)

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, QuadSpace) and self.group == other.group
                and self.den == other.den and bool((self.q == other.q).all()))

    def __hash__(self) -> int:
        return hash((self.group, self.den, self.q.tobytes()))

    def __repr__(self) -> str:
        return f"QuadSpace({self.group.label()}, den={self.den})"

    def fingerprint(self) -> tuple:
        """Multiset of ``(element order, q value)``; an equivalence invariant."""
        orders = self.group.element_orders()
        pairs = sorted(zip(orders.tolist(), (QZ(int(v), self.den) for v in self.q)),
                       key=lambda t: (t[0], t[1].as_fraction()))
        return tuple((o, str(v)) for o, v in pairs)

    # subgroups ----------------------------------------------------------

    def perp(self, S: Subgroup) -> Subgroup:
        return self.bilinear_space().perp(S)

    def radical(self) -> Subgroup:
        return self.bilinear_space().radical()

    def is_nondegenerate(self) -> bool:
        return self.radical().order == 1

    def is_isotropic(self, S: Subgroup) -> bool:
        return not self.q[S.indices].any()

    def is_metabolizer(self, S: Subgroup) -> bool:
        return self.is_isotropic(S) and self.perp(S) == S

    def restrict(self, S: Subgroup) -> tuple["QuadSpace", Subquotient]:
        return self.quotient(S, None)

    def quotient(self, B: Subgroup, A: Subgroup | None) -> tuple["QuadSpace", Subquotient]:
        """The induced form on ``B / A``; needs ``A`` isotropic and ``B <= A^perp``."""
        if A is not None:
            if not self.is_isotropic(A):
                raise ValidationError("A is not isotropic")
            if not self.perp(A).mask()[B.indices].all():
                raise ValidationError("B is not contained in A^perp")
        sq = Subquotient(B, A)
        H = sq.group
        if not H.rank:
            return QuadSpace(H, np.zeros(1, dtype=np.int64), 1, check=False), sq
        lifted = np.atleast_1d(self.group.index(sq.lift(H.element_array())))
        return QuadSpace(H, self.q[lifted], self.den, check=False), sq

    def pullback(self, M: np.ndarray, src: FinAbGroup | None = None) -> "QuadSpace":
        """``q o j`` for the homomorphism ``j: src -> group`` with matrix ``M``."""
        src = src or self.group
        idx = np.atleast_1d(self.group.index(src.element_array() @ np.asarray(M, dtype=np.int64)))
        return QuadSpace(src, self.q[idx], self.den, check=False)

    # serialisation ---------------------------------------------------------

    def to_json(self) -> dict:
        return {"group": self.group.to_json(), "q": _qz_strings(self.q, self.den)}

    @classmethod
    def from_json(cls, obj: dict) -> "QuadSpace":
        G = FinAbGroup.from_json(obj["group"])
        q, den = _parse_qz_list(obj["q"])
        return cls(G, q, den)


def radical(space: QuadSpace | BilinSpace) -> Subgroup:
    return space.radical()


def is_nondegenerate(space: QuadSpace | BilinSpace) -> bool:
    return space.is_nondegenerate()


# ---------------------------------------------------------------------------
# orthogonal sums


def orthogonal_sum_with_maps(*spaces: QuadSpace) -> tuple[QuadSpace, Product]:
    prod = direct_product(*(s.group for s in spaces))
    P = prod.group
    den = math.lcm(1, *(s.den for s in spaces))
    q = np.zeros(P.order, dtype=np.int64)
    E = P.element_array()
    for s, proj in zip(spaces, prod.projections):
        if not s.group.rank:
            continue
        idx = np.atleast_1d(s.group.index(E @ proj))
        q += s.q[idx] * (den // s.den)
    return QuadSpace(P, q % den, den, check=False), prod


def orthogonal_sum(s1: QuadSpace, s2: QuadSpace, *more: QuadSpace) -> QuadSpace:
    return orthogonal_sum_with_maps(s1, s2, *more)[0]


# ---------------------------------------------------------------------------
# metabolizers


def _isotropic_chains(space: QuadSpace, target: int, first_only: bool) -> list[np.ndarray]:
    """Isotropic subgroups of order ``target`` grown one prime step at a time."""
    G = space.group
    T = G.add_table()
    b, _ = space.bilinear()
    iso = space.q == 0
    primes = prime_factors(G.order) if G.order > 1 else []
    times = {p: G.scalar_table(p) for p in primes}

    def vp(m: int, p: int) -> int:
        e = 0
        while m % p == 0:
            m //= p
            e += 1
        return e

    layer = {np.array([0], dtype=np.int64).tobytes(): np.array([0], dtype=np.int64)}
    found: list[np.ndarray] = []
    while layer:
        nxt: dict[bytes, np.ndarray] = {}
        for S in layer.values():
            if S.size == target:
                found.append(S)
                if first_only:
                    return found
                continue
            inS = np.zeros(G.order, dtype=bool)
            inS[S] = True
            orth = ~b[:, S].any(axis=1)
            for p in primes:
                if vp(target, p) <= vp(S.size, p):
                    continue
                cand = np.nonzero(iso & orth & ~inS & inS[times[p]])[0]
                for g in cand:
                    parts, shift = [S], S
                    for _ in range(p - 1):
                        shift = T[shift, g]
                        parts.append(shift)
                    new = np.unique(np.concatenate(parts))
                    nxt.setdefault(new.tobytes(), new)
        layer = nxt
    return found


def find_metabolizers(space: QuadSpace, first_only: bool = False) -> list[Subgroup]:
    """All metabolizers ``N = N^perp`` with ``q|_N = 0``, sorted canonically."""
    G = space.group
    check_cap("subgroups", G.order, f"metabolizer search on {G.label()}")
    if not _is_square(G.order):
        return []
    target = math.isqrt(G.order)
    out = []
    for S in _isotropic_chains(space, target, first_only=False):
        sub = _subgroup_of(G, S)
        if space.perp(sub) == sub:
            out.append(sub)
            if first_only:
                break
    out.sort(key=lambda s: s.key)
    return out


def has_metabolizer(space: QuadSpace) -> bool:
    return bool(find_metabolizers(space, first_only=True))


# ---------------------------------------------------------------------------
# equivalence


@dataclass
class EquivalenceVerdict:
    equivalent: bool
    witness: np.ndarray | None = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.equivalent

    def to_json(self) -> dict:
        return {"equivalent": self.equivalent,
                "witness": None if self.witness is None else self.witness.tolist(),
                "reason": self.reason}


def equivalent(s1: QuadSpace, s2: QuadSpace) -> EquivalenceVerdict:
    """Find an isomorphism ``j`` with ``q2 o j = q1``, or certify there is none.

    Generator images are tried identity-first, then in element order, so the
    witness is deterministic.

    ``j`` is returned as the matrix whose row ``i`` is the image of the
    ``i``-th canonical generator of ``s1.group``.
    """
    G1, G2 = s1.group, s2.group
    if G1.factors != G2.factors:
        return EquivalenceVerdict(False, None, "groups are not isomorphic")
    check_cap("isomorphism", G1.order, f"equivalence search on {G1.label()}")
    if s1.fingerprint() != s2.fingerprint():
        return EquivalenceVerdict(False, None, "q-value multisets differ")
    if s1.radical().order != s2.radical().order:
        return EquivalenceVerdict(False, None, "radicals differ")
    r = G1.rank
    if r == 0:
        return EquivalenceVerdict(True, np.zeros((0, 0), dtype=np.int64), "trivial groups")
    den = math.lcm(s1.den, s2.den)
    q1 = s1.q * (den // s1.den)
    q2 = s2.q * (den // s2.den)
    b1 = s1.bilinear()[0] * (den // s1.den)
    b2 = s2.bilinear()[0] * (den // s2.den)
    gens1 = [G1.index(e) for e in G1.generators()]
    orders2 = G2.element_orders()
    cands = []
    for d, g in zip(G1.factors, gens1):
        c = np.nonzero((orders2 == d) & (q2 == q1[g]))[0]
        # try the identity image first so equal spaces get the identity witness
        cands.append(np.concatenate([c[c == g], c[c != g]]))
    need_span = not s1.is_nondegenerate()
    E2 = G2.element_array()

    def rec(i: int, chosen: list[int]) -> list[int] | None:
        if i == r:
            if need_span:
                span = closure(G2, np.array([0], dtype=np.int64), chosen)
                if span.size != G2.order:
                    return None
            return chosen
        for y in cands[i]:
            ok = all(b2[y, chosen[j]] == b1[gens1[i], gens1[j]] for j in range(i))
            if ok:
                res = rec(i + 1, chosen + [int(y)])
                if res is not None:
                    return res
        return None

    res = rec(0, [])
    if res is None:
        return EquivalenceVerdict(False, None, "search exhausted")
    W = E2[res].copy()
    if (s2.pullback(W, G1).q * (den // s2.den) % den != q1 % den).any():
        raise CheckFailed("equivalence witness does not transport q")
    return EquivalenceVerdict(True, W, "witness found")


# ---------------------------------------------------------------------------
# Gauss sums


_EIGHTH_LABELS = ("1", "e^{i pi/4}", "i", "e^{3i pi/4}", "-1", "e^{5i pi/4}", "-i", "e^{7i pi/4}")


@dataclass
class GaussSum:
    """``gamma = G(M, q) / sqrt|M| = exp(2 pi i k / 8)``."""

    k: int
    exact: RootSum
    order: int
    numeric: complex

    @property
    def label(self) -> str:
        return _EIGHTH_LABELS[self.k]

    def to_json(self) -> dict:
        return {"k": self.k, "gamma": self.label, "order": self.order,
                "gamma_numeric": [self.numeric.real, self.numeric.imag],
                "sum_coefficients": list(self.exact.coeffs)}


def _eighth_root(k: int) -> RootSum:
    c = [0] * 8
    c[k % 8] = 1
    return RootSum(8, c)


def gauss_sum(space: QuadSpace) -> GaussSum:
    """Classify ``gamma`` among the eighth roots of unity, with exact certificates."""
    if not space.is_nondegenerate():
        raise Degenerate("Gauss sum needs a non-degenerate form")
    n = space.order
    hist = np.bincount(space.q, minlength=space.den)
    S = RootSum(space.den, hist.tolist())
    if rootsum_norm_sq(S) != n:
        raise CheckFailed(f"|G(M,q)|^2 != {n}")
    with mpmath.workprec(GAUSS_PRECISION):
        g = S.numeric(GAUSS_PRECISION) / mpmath.sqrt(n)
        hits = [k for k in range(8)
                if abs(g - mpmath.expjpi(mpmath.mpf(k) / 4)) < GAUSS_TOLERANCE]
        value = complex(g)
    if len(hits) != 1:
        raise SnapAmbiguous(f"gamma = {value} is not within {GAUSS_TOLERANCE} of an eighth root")
    k = hits[0]
    # G^2 = gamma^2 |M| pins gamma up to sign; the snap picks the sign
    if S * S != _eighth_root(2 * k) * RootSum.constant(n):
        raise CheckFailed("exact certificate G^2 = gamma^2 |M| fails")
    return GaussSum(k, S, n, value)


# ---------------------------------------------------------------------------
# anisotropic reduction


@dataclass
class AnisotropicReduction:
    isotropic: Subgroup
    perp: Subgroup
    space: QuadSpace
    gamma_k: int

    def to_json(self) -> dict:
        return {"isotropic": self.isotropic.to_json(), "perp": self.perp.to_json(),
                "space": self.space.to_json(), "gamma_k": self.gamma_k}


def anisotropic_reduction(space: QuadSpace) -> AnisotropicReduction:
    """Greedy maximal isotropic ``N`` and the anisotropic quotient ``N^perp / N``."""
    if not space.is_nondegenerate():
        raise Degenerate("anisotropic reduction needs a non-degenerate form")
    G = space.group
    b, _ = space.bilinear()
    N = np.array([0], dtype=np.int64)
    for g in range(G.order):
        if space.q[g] or np.isin(g, N) or b[g, N].any():
            continue
        N = closure(G, N, [g])
    Nsub = _subgroup_of(G, N)
    P = space.perp(Nsub)
    V, _ = space.quotient(P, Nsub)
    k = gauss_sum(space).k
    if gauss_sum(V).k != k:
        raise CheckFailed("Gauss sum changed under anisotropic reduction")
    if V.order > 1 and (V.q[1:] == 0).any():
        raise CheckFailed("quotient is not anisotropic")
    return AnisotropicReduction(Nsub, P, V, k)


# ---------------------------------------------------------------------------
# Wall labels and orthogonal decomposition


@dataclass(frozen=True)
class WallLabel:
    p: int
    k: int
    label: str

    def to_json(self) -> dict:
        return {"p": self.p, "k": self.k, "label": self.label}


def _prime_power(n: int) -> tuple[int, int]:
    ps = prime_factors(n)
    if len(ps) != 1:
        raise ValidationError(f"{n} is not a prime power")
    p, k = ps[0], 0
    while n > 1:
        n //= p
        k += 1
    return p, k


def wall_label(space: QuadSpace | BilinSpace) -> WallLabel:
    """Type A or B of a non-degenerate form on a cyclic group of odd prime-power order."""
    G = space.group
    if G.rank != 1:
        raise ValidationError("Wall labels are defined for cyclic groups")
    p, k = _prime_power(G.order)
    if p == 2:
        raise NotOddPrime("Wall labels are defined for odd p only")
    if isinstance(space, QuadSpace):
        bxx = QZ(2 * int(space.q[1]), space.den)
    else:
        bxx = QZ(int(space.b[1, 1]), space.den)
    if bxx.denominator != G.order:
        raise Degenerate("form is degenerate on the cyclic group")
    eps = bxx.numerator % p
    return WallLabel(p, k, "A" if pow(eps, (p - 1) // 2, p) == 1 else "B")


@dataclass
class Summand:
    """An orthogonal summand: a space on its own canonical group plus the
    parent-coordinates images of that group's generators."""

    space: QuadSpace
    generators: np.ndarray
    p: int

    @property
    def factors(self) -> tuple[int, ...]:
        return self.space.group.factors

    @property
    def wall(self) -> WallLabel | None:
        if self.p != 2 and self.space.group.rank == 1:
            return wall_label(self.space)
        return None

    def key(self) -> tuple:
        return (self.p, self.space.order, self.factors, tuple(self.space.q.tolist()), self.space.den)

    def to_json(self) -> dict:
        w = self.wall
        return {"p": self.p, "space": self.space.to_json(),
                "generators": self.generators.tolist(),
                "wall": None if w is None else w.label}


def _cyclic_summand(space: QuadSpace, x: int, m: int, p: int) -> Summand:
    G = space.group
    E = G.element_array()
    Cm = FinAbGroup((m,))
    # normalise the generator to the unit multiple with the smallest q value
    best = None
    for u in range(1, m):
        if math.gcd(u, m) != 1:
            continue
        y = G.index(E[x] * u)
        key = QZ(int(space.q[y]), space.den).as_fraction()
        if best is None or key < best[0]:
            best = (key, y)
    y = best[1] if best else x
    mult = np.atleast_1d(G.index(np.outer(np.arange(m), E[y])))
    sub = QuadSpace(Cm, space.q[mult], space.den, check=False)
    return Summand(sub, E[[y]].copy(), p)


def _split_prime_part(space: QuadSpace, W: np.ndarray, p: int, out: list[Summand]) -> None:
    G = space.group
    b, den = space.bilinear()
    orders = G.element_orders()
    while W.size > 1:
        inW = np.zeros(G.order, dtype=bool)
        inW[W] = True
        # b(x, x) = 2 q(x) has order exactly ord(x) on a non-degenerate line
        bxx = np.array([den // math.gcd(den, int(b[x, x])) for x in W])
        line = W[(bxx == orders[W]) & (orders[W] > 1)]
        if line.size:
            m = int(orders[line].max())
            x = int(line[orders[line] == m][0])
            s = _cyclic_summand(space, x, m, p)
            U = closure(G, np.array([0], dtype=np.int64), [x])
        else:
            m = int(orders[W].max())
            x = int(W[orders[W] == m][0])
            found = None
            for y in W:
                if orders[y] != m or b[x, y] == 0:
                    continue
                U = closure(G, np.array([0], dtype=np.int64), [x, int(y)])
                if U.size != m * m:
                    continue
                sub = b[np.ix_(U, U)]
                if (sub.any(axis=1)[1:]).all():
                    found = U
                    break
            if found is None:
                raise ConstructionFailed("no non-degenerate rank-2 summand found")
            U = found
            Usub = _subgroup_of(G, U)
            rspace, sq = space.restrict(Usub)
            gens = sq.lift(rspace.group.generators())
            s = Summand(rspace, gens, p)
        out.append(s)
        perp = ~b[:, U].any(axis=1)
        W = W[perp[W]]


def decompose_orthogonal(space: QuadSpace) -> list[Summand]:
    """Split a non-degenerate space into cyclic lines and, for p = 2 only when
    needed, rank-2 blocks.  The list is sorted by prime, order and table."""
    if not space.is_nondegenerate():
        raise Degenerate("orthogonal decomposition needs a non-degenerate form")
    G = space.group
    check_cap("elements", G.order, f"orthogonal decomposition on {G.label()}")
    out: list[Summand] = []
    for p in (prime_factors(G.order) if G.order > 1 else []):
        _split_prime_part(space, sylow(G, p).indices, p, out)
    _check_reassembly(space, out)
    out.sort(key=lambda s: s.key())
    return out


def _check_reassembly(space: QuadSpace, parts: list[Summand]) -> None:
    G = space.group
    b, _ = space.bilinear()
    spans = []
    for s in parts:
        gens = np.atleast_1d(G.index(s.generators)) if s.generators.size else np.array([], dtype=np.int64)
        spans.append(closure(G, np.array([0], dtype=np.int64), gens))
    if math.prod(int(S.size) for S in spans) != G.order:
        raise CheckFailed("summand orders do not multiply to |M|")
    for i in range(len(spans)):
        for j in range(i):
            if b[np.ix_(spans[i], spans[j])].any():
                raise CheckFailed("summands are not orthogonal")


def factor_shapes(space: QuadSpace) -> dict[int, list[tuple[int, ...]]]:
    """Per prime, the groups of the orthogonal summands (reported, not asserted)."""
    shapes: dict[int, list[tuple[int, ...]]] = {}
    for s in decompose_orthogonal(space):
        shapes.setdefault(s.p, []).append(s.factors)
    return shapes


# ---------------------------------------------------------------------------
# metabolic forms


class MetabolicForm:
    """A bilinear space with a metabolizer ``G = G^perp``."""

    def __init__(self, space: BilinSpace, metabolizer: Subgroup, check: bool = True):
        self.space = space
        self.metabolizer = metabolizer
        if check and space.perp(metabolizer) != metabolizer:
            raise ValidationError("metabolizer is not its own perpendicular")

    @classmethod
    def from_quadratic(cls, space: QuadSpace, metabolizer: Subgroup) -> "MetabolicForm":
        if not space.is_isotropic(metabolizer):
            raise ValidationError("q does not vanish on the metabolizer")
        if metabolizer.order ** 2 != space.order:
            raise ValidationError("|G|^2 != |Gamma|")
        return cls(space.bilinear_space(), metabolizer)

    def to_json(self) -> dict:
        out = self.space.to_json()
        out["metabolizer"] = self.metabolizer.gens.tolist()
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "MetabolicForm":
        space = BilinSpace.from_json(obj)
        gens = np.asarray(obj["metabolizer"], dtype=np.int64).reshape(-1, space.group.rank)
        return cls(space, Subgroup.generated_by(space.group, gens))


@dataclass
class MetabolicPiece:
    """A sub-metabolic summand ``(K, b|_K, H)`` with ``H`` cyclic."""

    K: Subgroup
    H: Subgroup
    form: MetabolicForm

    def to_json(self) -> dict:
        return {"K": self.K.to_json(), "H": self.H.to_json(), "form": self.form.to_json()}


def _find_submetabolic(b: np.ndarray, G: FinAbGroup, W: np.ndarray, GW: np.ndarray,
                       inG: np.ndarray) -> tuple[np.ndarray, np.ndarray] | None:
    orders = G.element_orders()
    zero = np.array([0], dtype=np.int64)
    for m in sorted({int(o) for o in orders[GW]} - {1}, reverse=True):
        seen: set[bytes] = set()
        for h in GW[orders[GW] == m]:
            Hc = closure(G, zero, [int(h)])
            if Hc.tobytes() in seen:
                continue
            seen.add(Hc.tobytes())
            for x in W:
                K = closure(G, Hc, [int(x)])
                if K.size != m * m or int(inG[K].sum()) != m:
                    continue
                if not b[np.ix_(K, K)].any(axis=1)[1:].all():
                    continue
                perpK = ~b[:, K].any(axis=1)
                Wr = W[perpK[W]]
                Gr = GW[perpK[GW]]
                if Gr.size * m == GW.size and Gr.size ** 2 == Wr.size:
                    return K, Hc
    return None


def decompose_metabolic(form: MetabolicForm) -> list[MetabolicPiece]:
    """Split a non-degenerate metabolic form into sub-metabolic pieces with cyclic metabolizers.

    Each step picks a cyclic ``H`` of maximal order inside the current
    metabolizer and a partner ``x`` so that ``K = <H, x>`` has order ``|H|^2``,
    is non-degenerate and meets the metabolizer exactly in ``H``; the search
    then continues in ``K^perp`` with metabolizer ``G cap K^perp``.
    """
    sp = form.space
    G = sp.group
    check_cap("elements", G.order, f"metabolic decomposition on {G.label()}")
    if not sp.is_nondegenerate():
        raise Degenerate("metabolic decomposition needs a non-degenerate form")
    inG = form.metabolizer.mask()
    pieces: list[MetabolicPiece] = []
    for p in (prime_factors(G.order) if G.order > 1 else []):
        W = sylow(G, p).indices
        GW = W[inG[W]]
        while W.size > 1:
            hit = _find_submetabolic(sp.b, G, W, GW, inG)
            if hit is None:
                raise ConstructionFailed("no sub-metabolic summand with cyclic metabolizer found")
            K, H = hit
            Ksub, Hsub = _subgroup_of(G, K), _subgroup_of(G, H)
            kspace, sq = sp.restrict(Ksub)
            Hin = Subgroup(kspace.group, sq.quotient_index_of(H))
            pieces.append(MetabolicPiece(Ksub, Hsub, MetabolicForm(kspace, Hin)))
            perpK = ~sp.b[:, K].any(axis=1)
            W, GW = W[perpK[W]], GW[perpK[GW]]
    _check_metabolic_reassembly(form, pieces)
    return pieces


def _check_metabolic_reassembly(form: MetabolicForm, pieces: list[MetabolicPiece]) -> None:
    G = form.space.group
    b = form.space.b
    if math.prod(pc.K.order for pc in pieces) != G.order:
        raise CheckFailed("piece orders do not multiply to |Gamma|")
    if math.prod(pc.H.order for pc in pieces) != form.metabolizer.order:
        raise CheckFailed("piece metabolizers do not multiply to |G|")
    for i in range(len(pieces)):
        if not form.metabolizer.mask()[pieces[i].H.indices].all():
            raise CheckFailed("piece metabolizer leaves the metabolizer")
        for j in range(i):
            if b[np.ix_(pieces[i].K.indices, pieces[j].K.indices)].any():
                raise CheckFailed("pieces are not orthogonal")


# ---------------------------------------------------------------------------
# gauge equivalence


@dataclass
class GaugeVerdict:
    equivalent: bool
    witness: np.ndarray | None
    space1: QuadSpace
    space2: QuadSpace
    reason: str = ""

    def __bool__(self) -> bool:
        return self.equivalent

    def to_json(self) -> dict:
        return {"equivalent": self.equivalent,
                "witness": None if self.witness is None else self.witness.tolist(),
                "reason": self.reason,
                "space1": self.space1.to_json(), "space2": self.space2.to_json()}


def gauge_equivalent(G1: FinAbGroup, omega1, G2: FinAbGroup, omega2) -> GaugeVerdict:
    """Decide gauge equivalence of two abelian twisted doubles through their
    quadratic spaces of group-likes."""
    from .cohomology import is_abelian
    from .errors import NotAbelian
    from .twisted_double import DoubleAlgebra

    for G, w in ((G1, omega1), (G2, omega2)):
        if w.group != G:
            raise ValidationError("cocycle does not live on the given group")
        if not is_abelian(w):
            raise NotAbelian("gauge-equivalence test needs abelian cocycles")
    check_cap("isomorphism", max(G1.order, G2.order) ** 2, "group-like spaces")
    s1 = DoubleAlgebra(G1, omega1, check=False).quadratic_form()
    s2 = DoubleAlgebra(G2, omega2, check=False).quadratic_form()
    v = equivalent(s1, s2)
    return GaugeVerdict(v.equivalent, v.witness, s1, s2, v.reason)


# ---------------------------------------------------------------------------
# batch enumeration of quadratic functions


@dataclass
class QuadFormFamily:
    """Every quadratic function on ``group``, one row of ``Q`` per form.

    Row ``i`` has parameters ``q(e_j) = a_j / m_j`` and
    ``b(e_j, e_l) = c_jl / g_jl`` in mixed radix (diagonal terms first), and
    ``Q[i, x] / den`` is ``q(x)``.
    """

    group: FinAbGroup
    radices: tuple[int, ...]
    den: int
    Q: np.ndarray
    features: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return int(self.Q.shape[0])

    def space(self, i: int) -> QuadSpace:
        return QuadSpace(self.group, self.Q[i], self.den, check=False)

    def param_index(self, Qrows: np.ndarray) -> np.ndarray:
        """Row indices of the forms whose tables are ``Qrows``."""
        G = self.group
        r = G.rank
        gens = [G.index(e) for e in G.generators()]
        den = self.den
        cols = []
        for j in range(r):
            cols.append(Qrows[:, gens[j]] * self.radices[j] // den)
        T = G.add_table()
        for j in range(r):
            for l in range(j + 1, r):
                bij = (Qrows[:, T[gens[j], gens[l]]] - Qrows[:, gens[j]] - Qrows[:, gens[l]]) % den
                cols.append(bij * self._rad_off(j, l) // den)
        idx = np.zeros(Qrows.shape[0], dtype=np.int64)
        for c, rad in zip(cols, self.radices):
            idx = idx * rad + c
        return idx

    def _rad_off(self, j: int, l: int) -> int:
        d = self.group.factors
        return math.gcd(d[j], d[l])


def _feature_matrix(G: FinAbGroup) -> tuple[np.ndarray, tuple[int, ...], int]:
    d = G.factors
    r = G.rank
    E = G.element_array().astype(np.int64)
    radices = [2 * dj if dj % 2 == 0 else dj for dj in d]
    feats = [E[:, j] ** 2 for j in range(r)]
    for j in range(r):
        for l in range(j + 1, r):
            radices.append(math.gcd(d[j], d[l]))
            feats.append(E[:, j] * E[:, l])
    den = math.lcm(1, *radices)
    F = np.stack(feats, axis=0) if feats else np.zeros((0, G.order), dtype=np.int64)
    return F, tuple(radices), den


def all_quadratic_forms(G: FinAbGroup, max_forms: int = 200_000) -> QuadFormFamily:
    """All quadratic functions on ``G`` (they are exactly the polynomials
    ``sum a_j x_j^2 + sum c_jl x_j x_l`` with the admissible denominators)."""
    F, radices, den = _feature_matrix(G)
    total = math.prod(radices)
    if total > max_forms:
        raise CapExceeded(f"{total} quadratic functions on {G.label()} exceed the batch limit {max_forms}")
    if not radices:
        return QuadFormFamily(G, (), 1, np.zeros((1, 1), dtype=np.int64), F)
    P = np.indices(radices).reshape(len(radices), -1).T
    scale = np.array([den // m for m in radices], dtype=np.int64)
    Q = ((P * scale) @ F) % den
    return QuadFormFamily(G, radices, den, Q, F)


def _chunks(m: int, size: int):
    for s in range(0, m, size):
        yield slice(s, min(m, s + size))


def batch_nondegenerate(fam: QuadFormFamily, chunk: int = 4096) -> np.ndarray:
    G = fam.group
    if not G.rank:
        return np.ones(fam.size, dtype=bool)
    T = G.add_table()
    gens = [G.index(e) for e in G.generators()]
    out = np.zeros(fam.size, dtype=bool)
    for sl in _chunks(fam.size, chunk):
        Q = fam.Q[sl]
        zero = np.ones(Q.shape, dtype=bool)
        for g in gens:
            zero &= ((Q[:, T[:, g]] - Q - Q[:, [g]]) % fam.den) == 0
        out[sl] = zero.sum(axis=1) == 1
    return out


def batch_metabolizer_mask(fam: QuadFormFamily, forms: np.ndarray | None = None) -> np.ndarray:
    """For non-degenerate forms: does some subgroup of order ``sqrt|G|`` carry ``q = 0``?"""
    G = fam.group
    Q = fam.Q if forms is None else fam.Q[forms]
    if not _is_square(G.order):
        return np.zeros(Q.shape[0], dtype=bool)
    out = np.zeros(Q.shape[0], dtype=bool)
    for S in subgroups_of_order(G, math.isqrt(G.order)):
        out |= ~Q[:, S.indices].any(axis=1)
    return out


def batch_gamma_is_one(fam: QuadFormFamily, forms: np.ndarray | None = None) -> np.ndarray:
    """Exact test of ``G(M, q) = sqrt|M|`` for groups of square order."""
    G = fam.group
    if not _is_square(G.order):
        raise ValidationError("exact batch test needs |M| to be a square")
    Q = fam.Q if forms is None else fam.Q[forms]
    m, D = Q.shape[0], fam.den
    hist = np.bincount((Q + D * np.arange(m)[:, None]).ravel(), minlength=m * D).reshape(m, D)
    hist[:, 0] -= math.isqrt(G.order)
    return ~(hist @ cyclotomic_reduction_matrix(D)).any(axis=1)


def form_orbit_labels(fam: QuadFormFamily, autos: Sequence[np.ndarray],
                      forms: np.ndarray | None = None) -> tuple[int, np.ndarray]:
    """Orbits of ``Aut(G)`` on forms (``q -> q o sigma``) as connected components.

    ``autos`` must generate the automorphism group; ``forms`` restricts the
    labels to an ``Aut``-stable subset of rows.
    """
    G = fam.group
    m = fam.size
    rows, cols = [], []
    for M in autos:
        perm = np.atleast_1d(G.index(G.element_array() @ np.asarray(M, dtype=np.int64)))
        img = fam.param_index(fam.Q[:, perm])
        rows.append(np.arange(m))
        cols.append(img)
    if rows:
        r = np.concatenate(rows)
        c = np.concatenate(cols)
    else:
        r = c = np.zeros(0, dtype=np.int64)
    graph = coo_matrix((np.ones(r.size, dtype=np.int8), (r, c)), shape=(m, m)).tocsr()
    _, labels = connected_components(graph, directed=True, connection="weak")
    if forms is not None:
        labels = labels[forms]
    uniq, relabeled = np.unique(labels, return_inverse=True)
    return int(uniq.size), relabeled
