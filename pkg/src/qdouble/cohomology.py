"""Bar-complex cochains with Q/Z values and the maps built on them.

A k-cochain is a dense table ``G^k -> Q/Z`` stored as integer numerators over
one denominator.  Coboundaries use trivial action:

    (delta c)(x_1..x_{k+1}) = c(x_2..) + sum_i (-1)^i c(..x_i+x_{i+1}..)
                              + (-1)^{k+1} c(x_1..x_k)

Ghat-valued 2-cochains are tables ``G^2 -> G`` read through the diagonal
pairing: the entry ``a`` stands for the character ``z -> sum_j a_j z_j / d_j``.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .algebra_core import QZ, ModSolver, PrimePowerSNF
from .config import check_cap
from .errors import CheckFailed, NoSolution, NotAbelian, NotACocycle, NotQuadratic, ValidationError
from .groups import (FinAbGroup, Subgroup, direct_product, hom_perm, omega_p, p_presentation,
                     presentation, prime_factors)


def _vp(n: int, p: int) -> int:
    e = 0
    while n % p == 0:
        n //= p
        e += 1
    return e


# ---------------------------------------------------------------------------
# cochains


class Cochain:
    """Dense normalized-or-not cochain ``G^k -> Q/Z`` with values ``num / den``."""

    __slots__ = ("group", "arity", "num", "den")

    def __init__(self, group: FinAbGroup, num: np.ndarray, den: int):
        num = np.asarray(num, dtype=np.int64)
        n = group.order
        if num.ndim == 0 or any(s != n for s in num.shape):
            raise ValidationError(f"cochain table shape {num.shape} does not match |G| = {n}")
        den = int(den)
        if den < 1:
            raise ValidationError("cochain denominator must be positive")
        num = num % den
        g = math.gcd(den, *np.unique(num).tolist()) if num.size else den
        if g > 1:
            num, den = num // g, den // g
        self.group = group
        self.arity = num.ndim
        self.num = num
        self.den = den

    @classmethod
    def zero(cls, group: FinAbGroup, arity: int) -> "Cochain":
        return cls(group, np.zeros((group.order,) * arity, dtype=np.int64), 1)

    @classmethod
    def from_function(cls, group: FinAbGroup, arity: int, fn, den: int) -> "Cochain":
        """Build from ``fn(*coords) -> numerator`` over denominator ``den``."""
        E = group.element_array()
        tab = np.zeros((group.order,) * arity, dtype=np.int64)
        for idx in itertools.product(range(group.order), repeat=arity):
            tab[idx] = fn(*(tuple(int(v) for v in E[i]) for i in idx))
        return cls(group, tab, den)

    def with_den(self, den: int) -> np.ndarray:
        if den % self.den:
            raise ValueError("target denominator must be a multiple")
        return self.num * (den // self.den)

    def _align(self, other: "Cochain") -> tuple[np.ndarray, np.ndarray, int]:
        if self.group != other.group or self.arity != other.arity:
            raise ValidationError("cochains live on different groups or arities")
        d = math.lcm(self.den, other.den)
        return self.with_den(d), other.with_den(d), d

    def __add__(self, other: "Cochain") -> "Cochain":
        a, b, d = self._align(other)
        return Cochain(self.group, a + b, d)

    def __sub__(self, other: "Cochain") -> "Cochain":
        a, b, d = self._align(other)
        return Cochain(self.group, a - b, d)

    def __neg__(self) -> "Cochain":
        return Cochain(self.group, -self.num, self.den)

    def __rmul__(self, k: int) -> "Cochain":
        return Cochain(self.group, int(k) * self.num, self.den)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Cochain):
            return NotImplemented
        return (self.group == other.group and self.den == other.den
                and np.array_equal(self.num, other.num))

    def __hash__(self) -> int:
        return hash((self.group, self.den, self.num.tobytes()))

    def is_zero(self) -> bool:
        return not self.num.any()

    def value(self, *idx: int) -> QZ:
        return QZ(int(self.num[idx]), self.den)

    def is_normalized(self) -> bool:
        for axis in range(self.arity):
            if np.take(self.num, 0, axis=axis).any():
                return False
        return True

    def to_json(self) -> dict:
        flat = self.num.ravel()
        return {"group": self.group.to_json(), "arity": self.arity,
                "values": [str(QZ(int(v), self.den)) for v in flat]}

    @classmethod
    def from_json(cls, obj: dict) -> "Cochain":
        try:
            G = FinAbGroup.from_json(obj["group"])
            k = int(obj["arity"])
            vals = [QZ.parse(v) if isinstance(v, str) else QZ(int(v)) for v in obj["values"]]
        except (KeyError, TypeError) as exc:
            raise ValidationError("cochain JSON needs group, arity and values") from exc
        if len(vals) != G.order ** k:
            raise ValidationError(f"expected {G.order ** k} values, got {len(vals)}")
        den = math.lcm(1, *(v.denominator for v in vals))
        num = np.array([v.numerator * (den // v.denominator) for v in vals], dtype=np.int64)
        return cls(G, num.reshape((G.order,) * k), den)


def coboundary(c: Cochain) -> Cochain:
    """The coboundary ``delta c`` (arity + 1)."""
    G, k = c.group, c.arity
    if k > 3:
        raise ValidationError("coboundary is implemented for arity <= 3")
    T = G.add_table()
    n = G.order
    X = np.indices((n,) * (k + 1))
    out = c.num[tuple(X[1:])].copy()
    for i in range(1, k + 1):
        args = list(X[: i - 1]) + [T[X[i - 1], X[i]]] + list(X[i + 1:])
        out += (-1) ** i * c.num[tuple(args)]
    out += (-1) ** (k + 1) * c.num[tuple(X[:k])]
    return Cochain(G, out, c.den)


def is_cocycle(omega: Cochain) -> bool:
    return coboundary(omega).is_zero()


def slices(omega: Cochain) -> np.ndarray:
    """``S[g, x, y] = omega(g,x,y) + omega(x,y,g) - omega(x,g,y)`` (numerators over omega.den)."""
    n = omega.group.order
    g, x, y = np.indices((n, n, n))
    W = omega.num
    return (W[g, x, y] + W[x, y, g] - W[x, g, y]) % omega.den


def omega_slice(omega: Cochain, g) -> Cochain:
    """The 2-cochain ``omega_g``."""
    gi = g if isinstance(g, (int, np.integer)) else omega.group.index(g)
    return Cochain(omega.group, slices(omega)[gi], omega.den)


def is_abelian(omega: Cochain) -> bool:
    """True when every slice is symmetric, i.e. every slice is a 2-coboundary."""
    if omega.arity != 3:
        raise ValidationError("is_abelian expects a 3-cochain")
    if not is_cocycle(omega):
        raise NotACocycle("omega is not a 3-cocycle")
    S = slices(omega)
    return bool(np.array_equal(S, S.transpose(0, 2, 1)))


def pullback(omega: Cochain, src: FinAbGroup, M: np.ndarray) -> Cochain:
    """``(phi^* omega)(x_1..x_k) = omega(phi x_1, .., phi x_k)`` for ``phi: src -> omega.group``."""
    perm = hom_perm(src, omega.group, M)
    idx = np.ix_(*([perm] * omega.arity))
    return Cochain(src, omega.num[idx], omega.den)


def inflate(omega: Cochain, G: FinAbGroup, pi: np.ndarray) -> Cochain:
    """Inflation along a surjection ``pi: G -> Q`` given as a matrix."""
    perm = hom_perm(G, omega.group, pi)
    if np.unique(perm).size != omega.group.order:
        raise ValidationError("inflation map is not surjective")
    return pullback(omega, G, pi)


def product_cocycle(omega1: Cochain, omega2: Cochain) -> tuple[Cochain, "direct_product"]:
    """``infl omega1 + infl omega2`` on the canonical form of ``H x K``."""
    P = direct_product(omega1.group, omega2.group)
    z = inflate(omega1, P.group, P.projections[0]) + inflate(omega2, P.group, P.projections[1])
    return z, P


# ---------------------------------------------------------------------------
# coboundary matrices on normalized cochains


@functools.lru_cache(maxsize=32)
def delta_matrix(factors: tuple[int, ...], k: int) -> np.ndarray:
    """Matrix of delta from normalized k-cochains to normalized (k+1)-cochains.

    Coordinates are tuples of non-identity elements in lexicographic order.
    """
    G = FinAbGroup(factors)
    n = G.order
    m = n - 1
    T = G.add_table()
    if m == 0:
        return np.zeros((0, 0), dtype=np.int64)
    X = np.indices((m,) * (k + 1)).reshape(k + 1, -1) + 1
    nrows = X.shape[1]
    out = np.zeros((nrows, m ** k), dtype=np.int64)
    rid = np.arange(nrows)
    weights = [m ** (k - 1 - i) for i in range(k)]

    def add(sign: int, args: list[np.ndarray]) -> None:
        mask = np.ones(nrows, dtype=bool)
        col = np.zeros(nrows, dtype=np.int64)
        for a, w in zip(args, weights):
            mask &= a != 0
            col += (a - 1) * w
        np.add.at(out, (rid[mask], col[mask]), sign)

    add(1, list(X[1:]))
    for i in range(1, k + 1):
        add((-1) ** i, list(X[: i - 1]) + [T[X[i - 1], X[i]]] + list(X[i + 1:]))
    add((-1) ** (k + 1), list(X[:k]))
    return out


def _normalized_vector(c: Cochain, scale_den: int) -> np.ndarray:
    """Numerators over ``scale_den`` of the normalized coordinates of ``c``."""
    n = c.group.order
    sub = c.num[tuple([slice(1, n)] * c.arity)]
    return c.with_den(scale_den)[tuple([slice(1, n)] * c.arity)].reshape(-1) if sub.size else \
        np.zeros(0, dtype=np.int64)


def _from_normalized(G: FinAbGroup, vec: np.ndarray, k: int, den: int) -> Cochain:
    n = G.order
    tab = np.zeros((n,) * k, dtype=np.int64)
    if n > 1:
        tab[tuple([slice(1, n)] * k)] = np.asarray(vec, dtype=np.int64).reshape((n - 1,) * k)
    return Cochain(G, tab, den)


@functools.lru_cache(maxsize=32)
def _delta1_solver(factors: tuple[int, ...]) -> ModSolver:
    return ModSolver(delta_matrix(factors, 1))


def solve_coboundary_batch(G: FinAbGroup, rhs: np.ndarray, den: int) -> tuple[np.ndarray, int]:
    """Canonical normalized 1-cochains ``t_s`` with ``delta t_s = rhs[s]``.

    ``rhs`` has shape ``(s, n, n)`` (numerators over ``den``); the result has
    shape ``(s, n)``.  Raises :class:`NoSolution` when some slice is not a
    coboundary.
    """
    n = G.order
    s = rhs.shape[0]
    if n == 1:
        return np.zeros((s, 1), dtype=np.int64), 1
    B = rhs[:, 1:, 1:].reshape(s, -1).T
    X, d = _delta1_solver(G.factors).solve_batch(B, den)
    out = np.zeros((s, n), dtype=np.int64)
    out[:, 1:] = X.T
    return out, d


def is_coboundary(c: Cochain) -> bool:
    """Whether a normalized 2-cochain is ``delta`` of a 1-cochain."""
    if c.arity != 2:
        raise ValidationError("is_coboundary expects a 2-cochain")
    try:
        solve_coboundary_batch(c.group, c.num[None], c.den)
    except NoSolution:
        return False
    return True


# ---------------------------------------------------------------------------
# tau families and the map Lambda


@dataclass(frozen=True)
class TauFamily:
    """``tau[x, g] / den`` is ``tau_x(g)``, with ``delta tau_x = omega_x``."""

    group: FinAbGroup
    table: np.ndarray
    den: int

    def cochain(self, x: int) -> Cochain:
        return Cochain(self.group, self.table[x], self.den)


def solve_tau(omega: Cochain) -> TauFamily:
    if not is_abelian(omega):
        raise NotAbelian("omega has a slice that is not a coboundary")
    S = slices(omega)
    try:
        T, d = solve_coboundary_batch(omega.group, S, omega.den)
    except NoSolution as exc:
        raise CheckFailed("symmetric slice without a coboundary solution") from exc
    return TauFamily(omega.group, T, d)


class GHatCocycle:
    """A 2-cochain ``G x G -> Ghat``; ``table[x, y]`` holds character coordinates."""

    __slots__ = ("group", "table")

    def __init__(self, group: FinAbGroup, table: np.ndarray):
        t = np.asarray(table, dtype=np.int64)
        if t.shape != (group.order, group.order, group.rank):
            raise ValidationError("Ghat-valued cochain table has the wrong shape")
        self.group = group
        self.table = t % group.mods if group.rank else t

    def __eq__(self, other: object) -> bool:
        return isinstance(other, GHatCocycle) and self.group == other.group and \
            np.array_equal(self.table, other.table)

    def __add__(self, other: "GHatCocycle") -> "GHatCocycle":
        return GHatCocycle(self.group, self.table + other.table)

    def __sub__(self, other: "GHatCocycle") -> "GHatCocycle":
        return GHatCocycle(self.group, self.table - other.table)

    def __neg__(self) -> "GHatCocycle":
        return GHatCocycle(self.group, -self.table)

    def is_symmetric(self) -> bool:
        return bool(np.array_equal(self.table, self.table.transpose(1, 0, 2)))

    def is_normalized(self) -> bool:
        return not (self.table[0].any() or self.table[:, 0].any())

    def is_cocycle(self) -> bool:
        G = self.group
        T = G.add_table()
        n = G.order
        x, y, z = np.indices((n, n, n))
        b = self.table
        d = b[y, z] - b[T[x, y], z] + b[x, T[y, z]] - b[x, y]
        return not (d % G.mods).any() if G.rank else True

    def values(self) -> tuple[np.ndarray, int]:
        """``V[x, y, z] / L`` is ``beta(x, y)(z)`` with ``L`` the exponent."""
        G = self.group
        L = G.exponent()
        if not G.rank:
            return np.zeros((1, 1, 1), dtype=np.int64), 1
        w = np.array([L // d for d in G.factors], dtype=np.int64)
        E = G.element_array()
        return (self.table * w) @ E.T % L, L

    def evaluate(self, z: int) -> Cochain:
        V, L = self.values()
        return Cochain(self.group, V[:, :, z], L)

    def to_json(self) -> dict:
        return {"group": self.group.to_json(), "table": self.table.reshape(-1, max(self.group.rank, 1)
                                                                           ).tolist()}


def _character_table(G: FinAbGroup, V: np.ndarray, den: int) -> np.ndarray:
    """Convert values ``V[..., z] / den`` that are characters in ``z`` to coordinates."""
    if not G.rank:
        if (V % den).any():
            raise CheckFailed("value on the trivial group is not zero")
        return np.zeros(V.shape[:-1] + (0,), dtype=np.int64)
    gen_idx = [G.index(row) for row in np.eye(G.rank, dtype=np.int64)]
    coords = []
    for j, d in enumerate(G.factors):
        v = V[..., gen_idx[j]] * d
        if (v % den).any():
            raise CheckFailed("value is not a character")
        coords.append((v // den) % d)
    A = np.stack(coords, axis=-1)
    L = G.exponent()
    w = np.array([L // d for d in G.factors], dtype=np.int64)
    rebuilt = (A * w) @ G.element_array().T
    if ((rebuilt * den - V * L) % (den * L)).any():
        raise CheckFailed("value is not a character")
    return A


def lambda_map(omega: Cochain, tau: TauFamily | None = None) -> GHatCocycle:
    """``beta(x,y)(z) = tau_x(z) + tau_y(z) - tau_{x+y}(z) + omega_z(x,y)``."""
    tau = tau if tau is not None else solve_tau(omega)
    G = omega.group
    T = G.add_table()
    n = G.order
    d = math.lcm(omega.den, tau.den)
    tt = tau.table * (d // tau.den)
    S = slices(omega) * (d // omega.den)
    x, y, z = np.indices((n, n, n))
    V = tt[x, z] + tt[y, z] - tt[T[x, y], z] + S[z, x, y]
    beta = GHatCocycle(G, _character_table(G, V % d, d))
    if not beta.is_symmetric():
        raise CheckFailed("Lambda produced a non-symmetric cocycle")
    return beta


def xi(beta: GHatCocycle) -> Cochain:
    """``xi(beta)(x,y,z) = beta(x,y)(z)``."""
    V, L = beta.values()
    return Cochain(beta.group, V, L)


def epsilon_dual(beta: GHatCocycle) -> GHatCocycle:
    """``beta'(x,y)(g) = t_x(g) + t_y(g) - t_{x+y}(g)`` where ``delta t_g = beta(.,.)(g)``."""
    G = beta.group
    V, L = beta.values()
    rhs = np.moveaxis(V, 2, 0)  # rhs[g] = beta(., .)(g)
    t, d = solve_coboundary_batch(G, rhs, L)  # t[g, x] = t_g(x)
    T = G.add_table()
    n = G.order
    x, y, g = np.indices((n, n, n))
    W = t[x, g] + t[y, g] - t[T[x, y], g]
    return GHatCocycle(G, _character_table(G, W % d, d))


def symmetrize_dual(beta: GHatCocycle) -> GHatCocycle:
    """Representative of ``S[beta] = [beta] + eps[beta]``."""
    return beta + epsilon_dual(beta)


def ext_class(beta: GHatCocycle) -> tuple[tuple[int, ...], ...]:
    """Class of a symmetric normalized cocycle in ``Ext(G, Ghat)``.

    ``c_i = sum_{k<d_i} beta(k e_i, e_i)``, coordinate ``j`` reduced modulo
    ``gcd(d_i, d_j)``.  Two symmetric cocycles are cohomologous exactly when
    these invariants agree.
    """
    G = beta.group
    if not beta.is_symmetric():
        raise ValidationError("ext_class needs a symmetric cocycle")
    out = []
    for i, di in enumerate(G.factors):
        e = np.zeros(G.rank, dtype=np.int64)
        e[i] = 1
        ks = G.index(np.outer(np.arange(di), e))
        c = beta.table[ks, G.index(e)].sum(axis=0)
        out.append(tuple(int(c[j] % math.gcd(di, dj)) for j, dj in enumerate(G.factors)))
    return tuple(out)


def ext_group_moduli(G: FinAbGroup) -> list[int]:
    return [math.gcd(di, dj) for di in G.factors for dj in G.factors]


def carry_cocycle(G: FinAbGroup, c: Sequence[Sequence[int]]) -> GHatCocycle:
    """``beta(x, y) = sum_i c_i [x_i + y_i >= d_i]``, the extension with ``d_i s_i = c_i``."""
    E = G.element_array()
    n = G.order
    tab = np.zeros((n, n, G.rank), dtype=np.int64)
    for i, d in enumerate(G.factors):
        carry = (E[:, None, i] + E[None, :, i]) >= d
        tab += carry[:, :, None] * np.asarray(c[i], dtype=np.int64)[None, None, :]
    return GHatCocycle(G, tab)


def ext_classes(G: FinAbGroup) -> Iterator[GHatCocycle]:
    """One carry-cocycle representative for every class of ``Ext(G, Ghat)``."""
    r = G.rank
    ranges = [range(math.gcd(G.factors[i], G.factors[j])) for i in range(r) for j in range(r)]
    for flat in itertools.product(*ranges):
        c = [flat[i * r:(i + 1) * r] for i in range(r)]
        yield carry_cocycle(G, c)


def is_ghat_coboundary(beta: GHatCocycle) -> bool:
    """Whether ``beta = delta t`` for some ``t: G -> Ghat`` (any, not only symmetric beta)."""
    G = beta.group
    n = G.order
    if n == 1:
        return True
    D1 = delta_matrix(G.factors, 1)
    for j, d in enumerate(G.factors):
        A = np.vstack([D1, d * np.eye(n - 1, dtype=np.int64)])
        rhs = np.concatenate([beta.table[1:, 1:, j].reshape(-1), np.zeros(n - 1, dtype=np.int64)])
        try:
            ModSolver(A).solve_batch(rhs[:, None], d)
        except NoSolution:
            return False
    return True


# ---------------------------------------------------------------------------
# abelian cocycles (f, d) and traces


@dataclass(frozen=True)
class AbelianCocycle:
    """A pair ``(f, d)``: a 3-cocycle ``f`` and a 2-cochain ``d`` satisfying
    the two hexagon-type compatibility identities."""

    f: Cochain
    d: Cochain

    def defects(self) -> tuple[Cochain, Cochain]:
        G = self.f.group
        T = G.add_table()
        n = G.order
        den = math.lcm(self.f.den, self.d.den)
        f = self.f.with_den(den)
        d = self.d.with_den(den)
        x, y, z = np.indices((n, n, n))
        h1 = d[T[x, y], z] - d[x, z] - d[y, z] + f[x, y, z] - f[x, z, y] + f[z, x, y]
        h2 = d[x, T[y, z]] - d[x, y] - d[x, z] - f[x, y, z] + f[y, x, z] - f[y, z, x]
        return Cochain(G, h1, den), Cochain(G, h2, den)

    def is_valid(self) -> bool:
        if not is_cocycle(self.f):
            return False
        a, b = self.defects()
        return a.is_zero() and b.is_zero()


def em_trace(c: AbelianCocycle, check: bool = True) -> Cochain:
    """The trace ``t(x) = d(x|x)``, verified to be a quadratic function."""
    G = c.d.group
    n = G.order
    t = Cochain(G, c.d.num[np.arange(n), np.arange(n)], c.d.den)
    if check:
        check_quadratic(G, t.num, t.den)
    return t


def check_quadratic(G: FinAbGroup, q: np.ndarray, den: int) -> None:
    """Raise :class:`NotQuadratic` unless ``q(ax) = a^2 q(x)`` and ``b_q`` is bilinear."""
    T = G.add_table()
    expo = G.exponent()
    for a in range(expo + 1):
        if ((q[G.scalar_table(a)] - a * a * q) % den).any():
            raise NotQuadratic(f"q(ax) != a^2 q(x) for a = {a}")
    b = (q[T] - q[:, None] - q[None, :]) % den
    # additivity against generators implies additivity everywhere
    for g in G.generators():
        gi = G.index(g)
        if ((b[T[:, gi], :] - b - b[gi][None, :]) % den).any():
            raise NotQuadratic("associated form is not bilinear")


# ---------------------------------------------------------------------------
# H^3(G, Q/Z)


def h3_expected_orders(G: FinAbGroup) -> tuple[int, int]:
    """``(|H^3|, |H^3_ab|)`` from the invariant factors."""
    d = G.factors
    ab = math.prod(d)
    for i, j in itertools.combinations(range(len(d)), 2):
        ab *= math.gcd(d[i], d[j])
    full = ab
    for i, j, k in itertools.combinations(range(len(d)), 3):
        full *= math.gcd(d[i], d[j], d[k])
    return full, ab


class _PrimePart:
    """The p-primary part of H^3, computed over ``Z/p^K`` with ``K = A + a``.

    Cocycles with values in ``(1/p^A)Z/Z`` are compared modulo coboundaries of
    cochains with values in ``(1/p^K)Z/Z``; since ``p^a`` kills the p-part of
    H^2 and H^3 this captures every class and every relation.
    """

    def __init__(self, G: FinAbGroup, p: int, A: int):
        self.G, self.p = G, p
        n = G.order
        a = _vp(n, p)
        A = max(A, a)
        K = A + a
        self.a, self.A, self.K = a, A, K
        mod = p ** K
        self.mod = mod
        D3 = delta_matrix(G.factors, 3)
        D2 = delta_matrix(G.factors, 2)
        n3 = (n - 1) ** 3
        s = K - A  # cocycle values lie in p^s R
        S3 = PrimePowerSNF(D3, p, K, track_cols=True)
        e = [s] * n3
        for (_, c, v) in S3.pivots:
            e[c] = max(s, K - v)
        keep = [c for c in range(n3) if e[c] < K]
        self.keep = np.array(keep, dtype=np.int64)
        self.e = np.array([e[c] for c in keep], dtype=np.int64)
        self.V = S3.V[:, self.keep] if keep else np.zeros((n3, 0), dtype=np.int64)
        self.Vinv = S3.Vinv[self.keep, :] if keep else np.zeros((0, n3), dtype=np.int64)
        self.z_orders = [p ** (K - int(x)) for x in self.e]
        S2 = PrimePowerSNF(D2, p, K, track_rows=True)
        rel = []
        for (i, _, v) in S2.pivots:
            b = (p ** max(s, v)) * S2.Rinv[:, i] % mod
            rel.append(self._w_coords(b))
        for t, o in enumerate(self.z_orders):
            row = [0] * len(keep)
            row[t] = o
            rel.append(row)
        self.pres = p_presentation(np.array(rel, dtype=np.int64), p, K) if keep else presentation([], 0)
        self.group = self.pres.group

    def _w_coords(self, x: np.ndarray) -> list[int]:
        z = (self.Vinv @ x) % self.mod
        pe = self.p ** self.e
        if (z % pe).any():
            raise CheckFailed("vector is not a cocycle of the expected denominator")
        w = (z // pe) % np.array(self.z_orders, dtype=np.int64)
        return [int(v) for v in w]

    def class_of_vector(self, x: np.ndarray) -> np.ndarray:
        """Class coordinates of a normalized cocycle with numerators over ``p^K``."""
        if not self.group.rank:
            return np.zeros(0, dtype=np.int64)
        w = np.array(self._w_coords(x), dtype=np.int64)
        return self.group.reduce(w @ self.pres.to_group)

    def representative_vector(self, coords: Sequence[int]) -> np.ndarray:
        w = np.asarray(coords, dtype=np.int64) @ self.pres.from_group
        return (self.V @ (w * self.p ** self.e)) % self.mod


@functools.lru_cache(maxsize=64)
def _prime_part(factors: tuple[int, ...], p: int, A: int) -> _PrimePart:
    return _PrimePart(FinAbGroup(factors), p, A)


class H3:
    """``H^3(G, Q/Z)`` with class representatives and a class-membership map."""

    def __init__(self, G: FinAbGroup):
        check_cap("cohomology", G.order, f"H^3 of {G.label()}")
        self.G = G
        n = G.order
        self.primes = prime_factors(n)
        self.parts = [_prime_part(G.factors, p, _vp(n, p)) for p in self.primes]
        prod = direct_product(*[pp.group for pp in self.parts]) if self.parts else None
        self.group = prod.group if prod else FinAbGroup(())
        self._prod = prod
        full, ab = h3_expected_orders(G)
        if self.group.order != full:
            raise CheckFailed(f"|H^3({G.label()})| = {self.group.order}, expected {full}")
        self._reps: dict[tuple[int, ...], Cochain] = {}
        self._abelian: Subgroup | None = None
        self.expected_abelian_order = ab

    @property
    def order(self) -> int:
        return self.group.order

    def _split(self, coords) -> list[np.ndarray]:
        c = np.asarray(coords, dtype=np.int64)
        return [pp.group.reduce(c @ pr) for pp, pr in zip(self.parts, self._prod.projections)]

    def representative(self, coords: Sequence[int]) -> Cochain:
        key = tuple(int(v) for v in coords)
        if key not in self._reps:
            n = self.G.order
            den = math.prod(pp.mod for pp in self.parts) if self.parts else 1
            vec = np.zeros((n - 1) ** 3, dtype=np.int64)
            for pp, cp in zip(self.parts, self._split(key) if self.parts else []):
                vec = (vec + pp.representative_vector(cp) * (den // pp.mod)) % den
            self._reps[key] = _from_normalized(self.G, vec, 3, den)
        return self._reps[key]

    def class_of(self, omega: Cochain) -> tuple[int, ...]:
        if omega.group != self.G or omega.arity != 3:
            raise ValidationError("cocycle lives on a different group")
        if not omega.is_normalized():
            raise ValidationError("class_of expects a normalized cocycle")
        if not is_cocycle(omega):
            raise NotACocycle("omega is not a 3-cocycle")
        if not self.parts:
            return ()
        n = self.G.order
        out = np.zeros(self.group.rank, dtype=np.int64)
        for pp, emb in zip(self.parts, self._prod.embeddings):
            p = pp.p
            D = omega.den
            s = _vp(D, p)
            m = D // p ** s
            # p-primary part of each value t/D is (t m^{-1} mod p^s)/p^s
            num = omega.num[(slice(1, n),) * 3].reshape(-1)
            u = (num * pow(m, -1, p ** s)) % (p ** s) if s else np.zeros_like(num)
            part = pp if s <= pp.A else _prime_part(self.G.factors, p, s)
            x = (u * p ** (part.K - s)) % part.mod
            cp = part.class_of_vector(x)
            if part is not pp:
                # express the class in the coordinates of the default prime part
                cp = pp.class_of_vector(_default_vector(part, cp, pp))
            out = out + cp @ emb
        return tuple(int(v) for v in self.group.reduce(out))

    def classes(self) -> Iterator[tuple[tuple[int, ...], Cochain]]:
        for idx, c in enumerate(self.group.element_array()):
            key = tuple(int(v) for v in c)
            yield key, self.representative(key)

    def abelian_subgroup(self) -> Subgroup:
        if self._abelian is None:
            idx = [i for i, (_, w) in enumerate(self.classes()) if is_abelian(w)]
            self._abelian = Subgroup(self.group, idx)
            if self._abelian.order != self.expected_abelian_order:
                raise CheckFailed(f"|H^3_ab| = {self._abelian.order}, expected "
                                  f"{self.expected_abelian_order}")
        return self._abelian

    def abelian_classes(self) -> list[tuple[tuple[int, ...], Cochain]]:
        E = self.group.element_array()
        return [(tuple(int(v) for v in E[i]), self.representative(E[i]))
                for i in self.abelian_subgroup().indices]


def _default_vector(src: _PrimePart, coords: np.ndarray, dst: _PrimePart) -> np.ndarray:
    """A representative vector for ``dst`` of the class with coordinates ``coords`` in ``src``.

    ``src`` was built for a larger value denominator; its coordinates differ
    from ``dst``'s, so match through ``dst``'s own representatives.
    """
    target = tuple(int(v) for v in coords)
    for c in dst.group.element_array():
        x = dst.representative_vector(c)
        # lift to src's modulus
        xs = (x * (src.mod // dst.mod)) % src.mod
        if tuple(int(v) for v in src.class_of_vector(xs)) == target:
            return x
    raise CheckFailed("class not found among default representatives")


@functools.lru_cache(maxsize=32)
def _h3_cached(factors: tuple[int, ...]) -> H3:
    return H3(FinAbGroup(factors))


def enumerate_h3(G: FinAbGroup) -> H3:
    return _h3_cached(G.factors)


@dataclass
class LambdaReport:
    """Images of the abelian classes under ``Lambda`` next to ``Im S``.

    Extension classes are keyed by :func:`ext_class`.
    """

    group: FinAbGroup
    images: dict[tuple[int, ...], tuple[tuple[int, ...], ...]]
    image_s: frozenset
    omega2_order: int

    @property
    def kernel(self) -> list[tuple[int, ...]]:
        zero = None
        for beta in ext_classes(self.group):
            zero = ext_class(beta)
            break
        return sorted(c for c, e in self.images.items() if e == zero)

    @property
    def image(self) -> frozenset:
        return frozenset(self.images.values())

    def to_json(self) -> dict:
        return {"group": self.group.to_json(),
                "abelian_classes": [{"class": list(c), "lambda": [list(r) for r in e]}
                                    for c, e in sorted(self.images.items())],
                "kernel": [list(c) for c in self.kernel],
                "kernel_order": len(self.kernel),
                "omega2_order": self.omega2_order,
                "image_order": len(self.image),
                "image_equals_image_s": self.image == self.image_s}


def lambda_report(G: FinAbGroup) -> LambdaReport:
    H = enumerate_h3(G)
    images = {c: ext_class(lambda_map(w)) for c, w in H.abelian_classes()}
    image_s = frozenset(ext_class(symmetrize_dual(b)) for b in ext_classes(G))
    return LambdaReport(G, images, image_s, omega_p(G, 2).order)
