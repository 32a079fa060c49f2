"""Finite abelian groups in invariant-factor form.

Elements are integer coordinate vectors ``x`` with ``0 <= x_i < d_i``.  The
element order used everywhere is lexicographic with the first coordinate most
significant, so ``index(x)`` is the mixed-radix number with digits ``x``.  A
homomorphism ``G -> H`` is an integer matrix ``M`` of shape
``(rank G, rank H)`` acting by ``x -> x @ M mod H.factors``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .algebra_core import (QZ, PrimePowerSNF, hermite_normal_form, matmul, rational_inverse,
                           smith_normal_form_full)
from .config import check_cap
from .errors import CheckFailed, ValidationError

GroupElement = tuple[int, ...]


def prime_factors(n: int) -> list[int]:
    out, p = [], 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


def is_prime(n: int) -> bool:
    return n >= 2 and prime_factors(n) == [n]


class FinAbGroup:
    """A finite abelian group ``Z_{d_1} x ... x Z_{d_r}`` with ``d_1 | ... | d_r``."""

    __slots__ = ("factors", "rank", "order", "_cache")

    def __init__(self, invariant_factors: Sequence[int] = ()):
        fs = tuple(int(d) for d in invariant_factors)
        if any(d < 2 for d in fs):
            raise ValidationError("invariant factors must be at least 2")
        if any(fs[i + 1] % fs[i] for i in range(len(fs) - 1)):
            raise ValidationError(f"{list(fs)} is not a divisibility chain")
        self.factors = fs
        self.rank = len(fs)
        self.order = math.prod(fs)
        self._cache: dict = {}

    @classmethod
    def from_orders(cls, orders: Sequence[int]) -> "FinAbGroup":
        """Canonical group isomorphic to the product of cyclic groups of the given orders."""
        return presentation_from_orders(orders).group

    def __eq__(self, other: object) -> bool:
        return isinstance(other, FinAbGroup) and self.factors == other.factors

    def __hash__(self) -> int:
        return hash(self.factors)

    def __repr__(self) -> str:
        return f"FinAbGroup({list(self.factors)})"

    def label(self) -> str:
        if not self.factors:
            return "1"
        return "x".join(f"Z{d}" for d in reversed(self.factors))

    def to_json(self) -> dict:
        return {"invariant_factors": list(self.factors)}

    @classmethod
    def from_json(cls, obj: dict) -> "FinAbGroup":
        try:
            return cls(obj["invariant_factors"])
        except (KeyError, TypeError) as exc:
            raise ValidationError("group JSON needs an invariant_factors list") from exc

    # -- element tables ---------------------------------------------------

    def _cached(self, key, fn):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    @property
    def strides(self) -> np.ndarray:
        def make():
            s = np.ones(self.rank, dtype=np.int64)
            for i in range(self.rank - 2, -1, -1):
                s[i] = s[i + 1] * self.factors[i + 1]
            return s
        return self._cached("strides", make)

    @property
    def mods(self) -> np.ndarray:
        return self._cached("mods", lambda: np.array(self.factors, dtype=np.int64))

    def element_array(self) -> np.ndarray:
        """All elements as an ``(order, rank)`` array in canonical order."""
        def make():
            if not self.rank:
                return np.zeros((1, 0), dtype=np.int64)
            grids = np.indices(self.factors).reshape(self.rank, -1).T
            return grids.astype(np.int64)
        return self._cached("elements", make)

    def index(self, coords) -> np.ndarray | int:
        """Mixed-radix index of one coordinate vector or a stack of them."""
        a = np.asarray(coords, dtype=np.int64)
        if not self.rank:
            return 0 if a.ndim <= 1 else np.zeros(a.shape[0], dtype=np.int64)
        a = a % self.mods
        out = a @ self.strides
        return int(out) if a.ndim == 1 else out

    def reduce(self, coords) -> np.ndarray:
        return np.asarray(coords, dtype=np.int64) % self.mods if self.rank else np.asarray(coords, dtype=np.int64)

    def add_table(self) -> np.ndarray:
        """``T[i, j] = index(x_i + x_j)``."""
        def make():
            E = self.element_array()
            S = (E[:, None, :] + E[None, :, :])
            return self.index(S.reshape(-1, self.rank)).reshape(self.order, self.order) if self.rank \
                else np.zeros((1, 1), dtype=np.int64)
        return self._cached("add", make)

    def neg_table(self) -> np.ndarray:
        return self._cached("neg", lambda: self.index(-self.element_array()) if self.rank
                            else np.zeros(1, dtype=np.int64))

    def scalar_table(self, k: int) -> np.ndarray:
        if not self.rank:
            return np.zeros(1, dtype=np.int64)
        return self.index(k * self.element_array())

    def element_orders(self) -> np.ndarray:
        def make():
            E = self.element_array()
            out = np.ones(self.order, dtype=np.int64)
            for i, d in enumerate(self.factors):
                oi = d // np.gcd(E[:, i], d)
                out = np.lcm(out, oi)
            return out
        return self._cached("orders", make)

    def generators(self) -> np.ndarray:
        return np.eye(self.rank, dtype=np.int64)

    def exponent(self) -> int:
        return self.factors[-1] if self.factors else 1

    def primary_exponents(self, p: int) -> list[int]:
        """Exponents ``e`` of the cyclic factors ``Z_{p^e}`` in the p-part, ascending."""
        out = []
        for d in self.factors:
            e = 0
            while d % p == 0:
                d //= p
                e += 1
            if e:
                out.append(e)
        return out


def elements(G: FinAbGroup) -> Iterator[GroupElement]:
    """Elements of ``G`` in lexicographic order, identity first."""
    check_cap("elements", G.order, f"elements of {G.label()}")
    return itertools.product(*(range(d) for d in G.factors))


def trivial_group() -> FinAbGroup:
    return FinAbGroup(())


# ---------------------------------------------------------------------------
# presentations


@dataclass(frozen=True)
class Presentation:
    """The finite group ``Z^n / rowspan(relations)`` in canonical form.

    ``to_group`` (n x r) sends generator coordinates to group coordinates;
    ``from_group`` (r x n) sends group coordinates back to a preimage.
    """

    group: FinAbGroup
    to_group: np.ndarray
    from_group: np.ndarray

    def image(self, x) -> np.ndarray:
        return self.group.reduce(np.asarray(x, dtype=np.int64) @ self.to_group)


def presentation(relations: Sequence[Sequence[int]], ngens: int | None = None) -> Presentation:
    rel = [[int(v) for v in row] for row in relations]
    n = ngens if ngens is not None else (len(rel[0]) if rel else 0)
    if n == 0:
        return Presentation(trivial_group(), np.zeros((0, 0), dtype=np.int64),
                            np.zeros((0, 0), dtype=np.int64))
    if not rel:
        raise ValidationError("presentation defines an infinite group")
    _, D, V, Vinv = smith_normal_form_full(rel)
    diag = [D[i][i] if i < len(D) else 0 for i in range(n)]
    if any(d == 0 for d in diag):
        raise ValidationError("presentation defines an infinite group")
    keep = [i for i, d in enumerate(diag) if d > 1]
    expo = math.lcm(1, *(diag[i] for i in keep))
    # the exponent kills Z^n modulo the relations, so preimages reduce modulo it
    to_group = np.array([[V[r][c] % diag[c] for c in keep] for r in range(n)],
                        dtype=np.int64).reshape(n, len(keep))
    from_group = np.array([[Vinv[c][r] % expo for r in range(n)] for c in keep],
                          dtype=np.int64).reshape(len(keep), n)
    return Presentation(FinAbGroup([diag[i] for i in keep]), to_group, from_group)


def p_presentation(relations: np.ndarray, p: int, K: int) -> Presentation:
    """Presentation whose relation lattice contains ``p^K Z^n``, reduced modulo ``p^K``."""
    rel = np.asarray(relations, dtype=np.int64)
    n = rel.shape[1]
    mod = p ** K
    S = PrimePowerSNF(rel, p, K, track_cols=True)
    orders = [mod] * n
    for (_, c, v) in S.pivots:
        orders[c] = p ** v
    keep = sorted((c for c in range(n) if orders[c] > 1), key=lambda c: (orders[c], c))
    to_group = np.stack([S.V[:, c] % orders[c] for c in keep], axis=1) if keep \
        else np.zeros((n, 0), dtype=np.int64)
    from_group = np.stack([S.Vinv[c, :] for c in keep], axis=0) if keep \
        else np.zeros((0, n), dtype=np.int64)
    return Presentation(FinAbGroup([orders[c] for c in keep]), to_group, from_group)


def presentation_from_orders(orders: Sequence[int]) -> Presentation:
    n = len(orders)
    rel = [[int(orders[i]) if i == j else 0 for j in range(n)] for i in range(n)]
    return presentation(rel, n)


def isomorphism_type(obj: "FinAbGroup | Subgroup | Sequence[int]") -> list[int]:
    """Invariant factors of a group, a subgroup, or a list of cyclic orders."""
    if isinstance(obj, FinAbGroup):
        return list(obj.factors)
    if isinstance(obj, Subgroup):
        return obj.isomorphism_type()
    return list(presentation_from_orders(list(obj)).group.factors)


def is_isomorphic(a, b) -> bool:
    return isomorphism_type(a) == isomorphism_type(b)


@dataclass(frozen=True)
class Product:
    group: FinAbGroup
    embeddings: tuple[np.ndarray, ...]
    projections: tuple[np.ndarray, ...]


def direct_product(*groups: FinAbGroup) -> Product:
    """Canonical form of ``G_1 x ... x G_m`` with embedding and projection matrices."""
    orders = [d for G in groups for d in G.factors]
    P = presentation_from_orders(orders)
    emb, proj, off = [], [], 0
    for G in groups:
        r = G.rank
        emb.append(P.to_group[off:off + r, :])
        pr = P.from_group[:, off:off + r]
        proj.append(pr % G.mods if r else pr)
        off += r
    return Product(P.group, tuple(emb), tuple(proj))


# ---------------------------------------------------------------------------
# homomorphisms


def hom_perm(src: FinAbGroup, tgt: FinAbGroup, M: np.ndarray) -> np.ndarray:
    """Index map of the homomorphism ``x -> x @ M``: ``out[index(x)] = index(image)``."""
    if not tgt.rank:
        return np.zeros(src.order, dtype=np.int64)
    if not src.rank:
        return np.zeros(1, dtype=np.int64)
    return tgt.index(src.element_array() @ np.asarray(M, dtype=np.int64))


def is_homomorphism(src: FinAbGroup, tgt: FinAbGroup, M: np.ndarray) -> bool:
    M = np.asarray(M, dtype=np.int64)
    for i, d in enumerate(src.factors):
        if tgt.rank and ((d * M[i]) % tgt.mods).any():
            return False
    return True


def compose(M1: np.ndarray, M2: np.ndarray, tgt: FinAbGroup) -> np.ndarray:
    """Matrix of ``x -> (x @ M1) @ M2``."""
    return (np.asarray(M1) @ np.asarray(M2)) % tgt.mods if tgt.rank else np.asarray(M1) @ np.asarray(M2)


# ---------------------------------------------------------------------------
# characters


@dataclass(frozen=True)
class Character:
    """The character ``x -> sum_i a_i x_i / d_i`` of ``G``, indexed by ``a`` in ``G``."""

    group: FinAbGroup
    coords: GroupElement

    def values_on_generators(self) -> list[QZ]:
        return [QZ(a, d) for a, d in zip(self.coords, self.group.factors)]

    def __call__(self, x: Sequence[int]) -> QZ:
        return eval_char(self, x)


def dual_group(G: FinAbGroup) -> tuple[FinAbGroup, list[Character]]:
    """Character group with its basis; uses the diagonal pairing, so ``G^ = G``."""
    basis = [Character(G, tuple(int(i == j) for j in range(G.rank))) for i in range(G.rank)]
    return G, basis


def eval_char(chi: Character, x: Sequence[int]) -> QZ:
    G = chi.group
    L = G.exponent()
    num = sum(a * xi * (L // d) for a, xi, d in zip(chi.coords, x, G.factors))
    return QZ(num, L)


def pairing_numerators(G: FinAbGroup) -> tuple[np.ndarray, int]:
    """``P[a, x]`` with ``chi_a(x) = P[a, x] / exponent`` for all pairs of elements."""
    L = G.exponent()
    E = G.element_array()
    w = np.array([L // d for d in G.factors], dtype=np.int64)
    P = ((E * w) @ E.T) % L if G.rank else np.zeros((1, 1), dtype=np.int64)
    return P, L


# ---------------------------------------------------------------------------
# subgroups


class Subgroup:
    """A subgroup of ``parent`` stored as its sorted element indices.

    ``gens`` is canonical: the Hermite form of the preimage lattice reduced
    modulo the parent factors, with zero rows removed.
    """

    __slots__ = ("parent", "indices", "_gens", "_key")

    def __init__(self, parent: FinAbGroup, indices: Iterable[int]):
        self.parent = parent
        self.indices = np.unique(np.asarray(list(indices) if not isinstance(indices, np.ndarray)
                                            else indices, dtype=np.int64))
        self._gens = None
        self._key = None

    @classmethod
    def generated_by(cls, parent: FinAbGroup, gens) -> "Subgroup":
        if not parent.rank:
            return cls(parent, [0])
        gens = np.asarray(gens, dtype=np.int64).reshape(-1, parent.rank)
        idx = closure(parent, np.array([0], dtype=np.int64), parent.index(gens) if len(gens) else [])
        return cls(parent, idx)

    @property
    def order(self) -> int:
        return int(self.indices.size)

    @property
    def key(self) -> tuple[int, ...]:
        if self._key is None:
            self._key = tuple(int(i) for i in self.indices)
        return self._key

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Subgroup) and self.parent == other.parent and self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def __repr__(self) -> str:
        return f"Subgroup(order={self.order}, gens={self.gens.tolist()})"

    def contains(self, x) -> bool:
        i = self.parent.index(x)
        j = np.searchsorted(self.indices, i)
        return bool(j < self.indices.size and self.indices[j] == i)

    def mask(self) -> np.ndarray:
        m = np.zeros(self.parent.order, dtype=bool)
        m[self.indices] = True
        return m

    def elements(self) -> np.ndarray:
        return self.parent.element_array()[self.indices]

    @property
    def gens(self) -> np.ndarray:
        if self._gens is None:
            G = self.parent
            if not G.rank:
                self._gens = np.zeros((0, 0), dtype=np.int64)
            else:
                E = self.elements()
                # a small generating set: greedy, in element order
                chosen, cur = [], np.array([0], dtype=np.int64)
                for e, idx in zip(E, self.indices):
                    if not np.isin(idx, cur):
                        chosen.append(e)
                        cur = closure(G, cur, [idx])
                        if cur.size == self.order:
                            break
                rows = [list(map(int, r)) for r in chosen]
                rows += [[d if i == j else 0 for j in range(G.rank)] for i, d in enumerate(G.factors)]
                H = hermite_normal_form(rows, G.rank)
                out = [np.array(r, dtype=np.int64) % G.mods for r in H]
                out = [r for r in out if r.any()]
                self._gens = np.array(out, dtype=np.int64).reshape(len(out), G.rank)
        return self._gens

    def isomorphism_type(self) -> list[int]:
        return abelian_type_from_orders(self.parent.element_orders()[self.indices])

    def is_isomorphic_to(self, other) -> bool:
        return self.isomorphism_type() == isomorphism_type(other)

    def to_json(self) -> dict:
        return {"generators": self.gens.tolist()}


class Subquotient:
    """Canonical form of ``B / A`` for subgroups ``A <= B`` of a common parent.

    ``to_quotient(x)`` maps parent coordinates of elements of ``B`` to the
    canonical group; ``lift(y)`` returns a preimage in parent coordinates.
    """

    def __init__(self, B: Subgroup, A: Subgroup | None = None):
        G = B.parent
        self.parent = G
        r = G.rank
        diag = [[d if i == j else 0 for j in range(r)] for i, d in enumerate(G.factors)]
        if A is not None and not np.all(B.mask()[A.indices]):
            raise ValidationError("A is not contained in B")
        HB = hermite_normal_form([list(map(int, g)) for g in B.gens] + diag, r)
        HA = hermite_normal_form(([list(map(int, g)) for g in A.gens] if A is not None else []) + diag, r)
        inv = rational_inverse(HB) if r else []
        X = [[int(v) for v in row] for row in matmul(HA, inv)] if r else []
        den = math.lcm(1, *(v.denominator for row in inv for v in row))
        self._HB = np.array(HB, dtype=object).reshape(r, r)
        self._inv_num = np.array([[int(v * den) for v in row] for row in inv], dtype=object).reshape(r, r)
        self._inv_den = den
        self.pres = presentation(X, r)
        self.group = self.pres.group

    def _coords(self, x: np.ndarray) -> np.ndarray:
        c = np.asarray(x, dtype=object) @ self._inv_num
        if np.any(c % self._inv_den != 0):
            raise ValidationError("element is not in the subgroup")
        return (c // self._inv_den).astype(np.int64)

    def to_quotient(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.int64)
        if not self.group.rank:
            return np.zeros(x.shape[:-1] + (0,), dtype=np.int64)
        return self.pres.image(self._coords(x))

    def lift(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=np.int64)
        if not self.parent.rank:
            return np.zeros(y.shape[:-1] + (0,), dtype=np.int64)
        c = (y @ self.pres.from_group).astype(object) @ self._HB
        return self.parent.reduce(np.asarray(c % np.array(self.parent.mods, dtype=object), dtype=np.int64))

    def quotient_index_of(self, idx: np.ndarray) -> np.ndarray:
        """Canonical-group indices of parent elements given by index."""
        E = self.parent.element_array()[np.asarray(idx, dtype=np.int64)]
        if not self.group.rank:
            return np.zeros(len(E), dtype=np.int64)
        return np.asarray(self.group.index(self.to_quotient(E)), dtype=np.int64)


def closure(G: FinAbGroup, base: np.ndarray, new_idx: Iterable[int]) -> np.ndarray:
    """Sorted indices of the subgroup generated by the subgroup ``base`` and new elements."""
    T = G.add_table()
    cur = np.unique(np.asarray(base, dtype=np.int64))
    for g in np.atleast_1d(np.asarray(list(new_idx) if not isinstance(new_idx, np.ndarray) else new_idx,
                                      dtype=np.int64)):
        if np.isin(g, cur):
            continue
        layer = cur
        parts = [cur]
        while True:
            layer = T[layer, g]
            if np.isin(layer[0], cur):
                break
            parts.append(layer)
        cur = np.unique(np.concatenate(parts))
    return cur


def abelian_type_from_orders(orders: np.ndarray) -> list[int]:
    """Invariant factors of a finite abelian group from the multiset of its element orders."""
    orders = np.asarray(orders, dtype=np.int64)
    n = orders.size
    parts: dict[int, list[int]] = {}
    for p in prime_factors(n):
        # c_j = #{x : p^j x = 0} = p^(sum_i min(j, e_i))
        e_max = 0
        while n % p ** (e_max + 1) == 0:
            e_max += 1
        logs = [0]
        for j in range(1, e_max + 1):
            c = int(np.count_nonzero((p ** j) % orders == 0))
            logs.append(round(math.log(c, p)))
        # number of cyclic factors of exponent >= j is logs[j] - logs[j-1]
        ge = [logs[j] - logs[j - 1] for j in range(1, e_max + 1)] + [0]
        exps = []
        for j in range(1, e_max + 1):
            exps += [j] * (ge[j - 1] - ge[j])
        parts[p] = sorted(exps)
    return _factors_from_primary(parts)


def _factors_from_primary(parts: dict[int, list[int]]) -> list[int]:
    r = max((len(v) for v in parts.values()), default=0)
    out = [1] * r
    for p, exps in parts.items():
        exps = sorted(exps)
        for i, e in enumerate(exps):
            out[r - len(exps) + i] *= p ** e
    return out


def omega_p(G: FinAbGroup, p: int) -> Subgroup:
    """The subgroup ``{x : p x = 0}``."""
    if not G.rank:
        return Subgroup(G, [0])
    m = (p % G.element_orders()) == 0
    return Subgroup(G, np.nonzero(m)[0])


def sylow(G: FinAbGroup, p: int) -> Subgroup:
    orders = G.element_orders()
    m = np.array([o == p ** round(math.log(o, p)) if o > 1 else True for o in orders], dtype=bool)
    return Subgroup(G, np.nonzero(m)[0])


def _p_subgroup_layers(G: FinAbGroup, p: int, max_order: int | None = None) -> list[list[np.ndarray]]:
    """Subgroups of the Sylow p-subgroup, grouped by order p^0, p^1, ..."""
    P = sylow(G, p).indices
    T = G.add_table()
    times_p = G.scalar_table(p)
    layers = [[np.array([0], dtype=np.int64)]]
    while True:
        nxt: dict[bytes, np.ndarray] = {}
        for S in layers[-1]:
            if max_order is not None and S.size * p > max_order:
                continue
            inS = np.zeros(G.order, dtype=bool)
            inS[S] = True
            cand = P[(~inS[P]) & inS[times_p[P]]]
            for g in cand:
                # S has index p in <S, g>; fill the remaining cosets
                parts = [S]
                shift = S
                for _ in range(p - 1):
                    shift = T[shift, g]
                    parts.append(shift)
                new = np.unique(np.concatenate(parts))
                key = new.tobytes()
                if key not in nxt:
                    nxt[key] = new
        if not nxt:
            break
        layers.append([nxt[k] for k in sorted(nxt)])
    return layers


def subgroups(G: FinAbGroup) -> list[Subgroup]:
    """All subgroups, each once, ordered by (order, element indices)."""
    check_cap("subgroups", G.order, f"subgroup lattice of {G.label()}")
    return _subgroups(G, None)


def subgroups_of_order(G: FinAbGroup, m: int) -> list[Subgroup]:
    check_cap("elements", G.order, f"subgroups of {G.label()}")
    if m < 1 or G.order % m:
        return []
    return _subgroups(G, m)


def _subgroups(G: FinAbGroup, m: int | None) -> list[Subgroup]:
    T = G.add_table()
    primes = prime_factors(G.order)
    per_prime = []
    for p in primes:
        if m is None:
            per_prime.append([S for layer in _p_subgroup_layers(G, p) for S in layer])
        else:
            e = 0
            while m % p ** (e + 1) == 0:
                e += 1
            layers = _p_subgroup_layers(G, p, p ** e)
            per_prime.append(layers[e] if e < len(layers) else [])
    out = []
    for combo in itertools.product(*per_prime):
        cur = np.array([0], dtype=np.int64)
        for S in combo:
            cur = np.unique(T[cur][:, S].ravel())
        out.append(Subgroup(G, cur))
    out.sort(key=lambda S: (S.order, S.key))
    return out


# ---------------------------------------------------------------------------
# automorphisms


def aut_order(G: FinAbGroup) -> int:
    """``|Aut(G)|`` from the closed formula for abelian p-groups, multiplied over primes."""
    total = 1
    for p in prime_factors(G.order):
        e = G.primary_exponents(p)
        r = len(e)
        a = 1
        for k in range(1, r + 1):
            dk = max(l for l in range(1, r + 1) if e[l - 1] == e[k - 1])
            ck = min(l for l in range(1, r + 1) if e[l - 1] == e[k - 1])
            a *= (p ** dk - p ** (k - 1))
            a *= p ** (e[k - 1] * (r - dk))
            a *= p ** ((e[k - 1] - 1) * (r - ck + 1))
        total *= a
    return total


def automorphisms(G: FinAbGroup) -> list[np.ndarray]:
    """Every automorphism once, as an ``r x r`` matrix, in lexicographic order of
    generator images.  The count is checked against :func:`aut_order`."""
    check_cap("automorphisms", G.order, f"automorphisms of {G.label()}")
    r = G.rank
    if r == 0:
        return [np.zeros((0, 0), dtype=np.int64)]
    E = G.element_array()
    orders = G.element_orders()
    cand = [np.nonzero(d % orders == 0)[0] for d in G.factors]
    out: list[np.ndarray] = []

    def rec(i: int, chosen: list[int], span: np.ndarray):
        if i == r:
            if span.size == G.order:
                out.append(E[chosen].copy())
            return
        # the remaining generators can add at most a factor prod(d_j, j >= i)
        if span.size * math.prod(G.factors[i:]) < G.order:
            return
        for c in cand[i]:
            rec(i + 1, chosen + [int(c)], closure(G, span, [int(c)]))

    rec(0, [], np.array([0], dtype=np.int64))
    if len(out) != aut_order(G):
        raise CheckFailed(f"found {len(out)} automorphisms of {G.label()}, expected {aut_order(G)}")
    return out


def automorphism_generators(G: FinAbGroup) -> list[np.ndarray]:
    """Elementary automorphisms: unit scalings, admissible transvections and swaps."""
    r = G.rank
    d = G.factors
    out = []
    I = np.eye(r, dtype=np.int64)
    for i in range(r):
        for u in range(2, d[i]):
            if math.gcd(u, d[i]) == 1:
                M = I.copy()
                M[i, i] = u
                out.append(M)
    for i in range(r):
        for j in range(r):
            if i != j:
                M = I.copy()
                M[i, j] = d[j] // math.gcd(d[i], d[j])
                out.append(M % G.mods)
                if d[i] == d[j]:
                    S = I.copy()
                    S[[i, j]] = S[[j, i]]
                    out.append(S)
    return out


def is_automorphism(G: FinAbGroup, M: np.ndarray) -> bool:
    if not is_homomorphism(G, G, M):
        return False
    return np.unique(hom_perm(G, G, M)).size == G.order
