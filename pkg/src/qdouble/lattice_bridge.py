"""Rational lattice pairs ``M <= L`` with ``M`` even and self-dual.

A pair is stored as the Gram matrix of ``L`` in a basis of ``L`` plus an
integer matrix ``T`` whose rows are a basis of ``M`` in ``L``-coordinates.
From it we build the discriminant space ``(L/L_0, <x,x>/2)``, an abelian
3-cocycle on ``G = L/M`` with its tau family, and the isomorphism of the
discriminant space with the group-likes of the twisted double.  The converse
direction glues hyperbolic planes to realise a given space with metabolizer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .algebra_core import (QZ, ModSolver, hermite_normal_form, matmul, rational_det,
                           rational_inverse)
from .cohomology import (Cochain, GHatCocycle, TauFamily, _character_table, is_abelian,
                         is_cocycle, is_ghat_coboundary, lambda_map)
from .errors import (CheckFailed, ConstructionFailed, NoSolution, NotEven, NotSelfDual,
                     SingularGram, ValidationError)
from .groups import FinAbGroup, Presentation, Subgroup, Subquotient, presentation
from .quadratic import QuadSpace, equivalent, find_metabolizers

FracMatrix = list[list[Fraction]]


def _fmat(A) -> FracMatrix:
    return [[v if isinstance(v, Fraction) else Fraction(str(v)) for v in row] for row in A]


def _transpose(A: FracMatrix) -> FracMatrix:
    return [list(r) for r in zip(*A)] if A else []


def _lcm_den(A) -> int:
    return math.lcm(1, *(Fraction(v).denominator for row in A for v in row))


def _int_scaled(A: FracMatrix) -> tuple[np.ndarray, int]:
    """``(N, D)`` with ``A = N / D`` and ``N`` an integer array."""
    D = _lcm_den(A)
    return np.array([[int(v * D) for v in row] for row in A], dtype=np.int64).reshape(len(A), -1), D


def _fmt(A: FracMatrix) -> list[list[str]]:
    return [[str(v) for v in row] for row in A]


# ---------------------------------------------------------------------------
# lattices


class RationalLattice:
    """A free abelian group with a non-degenerate rational Gram matrix."""

    def __init__(self, gram):
        G = _fmat(gram)
        n = len(G)
        if any(len(r) != n for r in G):
            raise ValidationError("Gram matrix must be square")
        if any(G[i][j] != G[j][i] for i in range(n) for j in range(n)):
            raise ValidationError("Gram matrix must be symmetric")
        if n and rational_det(G) == 0:
            raise SingularGram("Gram matrix is singular")
        self.gram = G
        self.rank = n

    @property
    def det(self) -> Fraction:
        return rational_det(self.gram) if self.rank else Fraction(1)

    def is_integral(self) -> bool:
        return all(v.denominator == 1 for row in self.gram for v in row)

    def is_even(self) -> bool:
        return self.is_integral() and all(self.gram[i][i] % 2 == 0 for i in range(self.rank))

    def is_unimodular(self) -> bool:
        return self.is_integral() and abs(self.det) == 1

    def inner(self, u, v) -> Fraction:
        return sum((Fraction(a) * g * Fraction(b) for a, row in zip(u, self.gram)
                    for g, b in zip(row, v)), Fraction(0))

    def to_json(self) -> dict:
        return {"gram": _fmt(self.gram)}


def hyperbolic_plane(copies: int = 1) -> FracMatrix:
    """Gram matrix of ``U^copies`` in the basis ``e_1..e_k, f_1..f_k``."""
    k = copies
    return [[Fraction(int(abs(i - j) == k)) for j in range(2 * k)] for i in range(2 * k)]


def dual_lattice(gram, basis=None) -> FracMatrix:
    """Basis (rows, ambient coordinates) of ``{x : <x, B> in Z}`` for ``B = basis``."""
    G = _fmat(gram)
    if rational_det(G) == 0:
        raise SingularGram("Gram matrix is singular")
    B = _fmat(basis) if basis is not None else [[Fraction(int(i == j)) for j in range(len(G))]
                                                for i in range(len(G))]
    GB = matmul(matmul(B, G), _transpose(B))
    if rational_det(GB) == 0:
        raise SingularGram("restricted Gram matrix is singular")
    return matmul(rational_inverse(GB), B)


# ---------------------------------------------------------------------------
# lattice pairs


class LatticePair:
    """``M <= L`` given by ``gram_L`` and the rows ``T`` of an ``M``-basis in ``L``-coordinates."""

    def __init__(self, gram_L, sublattice):
        self.L = RationalLattice(gram_L)
        T = [[int(v) for v in row] for row in sublattice]
        n = self.L.rank
        if len(T) != n or any(len(r) != n for r in T):
            raise ValidationError("sublattice matrix must be square of the lattice rank")
        if n and rational_det(_fmat(T)) == 0:
            raise ValidationError("sublattice does not have full rank")
        self.T = T
        gM = matmul(matmul(_fmat(T), self.L.gram), _transpose(_fmat(T))) if n else []
        self.M = RationalLattice(gM)
        if not self.M.is_even():
            raise NotEven("M is not an even lattice")
        if not self.M.is_unimodular():
            raise NotSelfDual("M is not self-dual")
        self._cache: dict = {}

    @classmethod
    def from_glue(cls, gram_M, glue) -> "LatticePair":
        """``L = M + span(glue)`` with glue vectors in rational ``M``-coordinates."""
        gM = _fmat(gram_M)
        n = len(gM)
        rows = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)] + _fmat(glue)
        D = _lcm_den(rows)
        H = hermite_normal_form([[int(v * D) for v in r] for r in rows], n)
        B = [[Fraction(v, D) for v in r] for r in H]  # L-basis in M-coordinates
        gram_L = matmul(matmul(B, gM), _transpose(B))
        T = rational_inverse(B)  # M-basis (identity) in L-coordinates
        if any(v.denominator != 1 for row in T for v in row):
            raise CheckFailed("M is not contained in L")
        return cls(gram_L, [[int(v) for v in row] for row in T])

    @property
    def rank(self) -> int:
        return self.L.rank

    @property
    def index(self) -> int:
        return abs(int(rational_det(_fmat(self.T)))) if self.rank else 1

    def inner(self, u, v) -> Fraction:
        return self.L.inner(u, v)

    def glue_group(self) -> Presentation:
        """``G = L/M`` as a presentation on the ``L``-basis."""
        if "G" not in self._cache:
            self._cache["G"] = presentation(self.T, self.rank) if self.rank else presentation([], 0)
        return self._cache["G"]

    def dual_basis(self) -> np.ndarray:
        """Rows of an ``L_0``-basis in ``L``-coordinates (integral since ``L_0 <= M <= L``)."""
        if "L0" not in self._cache:
            inv = rational_inverse(self.L.gram) if self.rank else []
            if any(v.denominator != 1 for row in inv for v in row):
                raise CheckFailed("L_0 is not contained in L")
            self._cache["L0"] = np.array([[int(v) for v in row] for row in inv],
                                         dtype=np.int64).reshape(self.rank, self.rank)
        return self._cache["L0"]

    def to_json(self) -> dict:
        return {"gram": _fmt(self.L.gram), "sublattice": self.T}

    @classmethod
    def from_json(cls, obj: dict) -> "LatticePair":
        return cls(_fmat(obj["gram"]), obj["sublattice"])


# ---------------------------------------------------------------------------
# sections and the alternating form


@dataclass
class Section:
    """``s: G -> L`` with ``s(0) = 0``; ``reps[i]`` is ``s`` of the ``i``-th element of ``G``."""

    group: FinAbGroup
    reps: np.ndarray

    def __call__(self, i: int) -> np.ndarray:
        return self.reps[i]


def canonical_section(pair: LatticePair) -> Section:
    """Representatives ``g @ from_group``: the coset coordinates pulled back
    through the Smith basis change, which is deterministic and sends 0 to 0."""
    P = pair.glue_group()
    G = P.group
    if not G.rank:
        return Section(G, np.zeros((1, pair.rank), dtype=np.int64))
    reps = G.element_array() @ P.from_group
    if (P.image(reps) != G.element_array()).any():
        raise CheckFailed("section does not hit its cosets")
    return Section(G, reps.astype(np.int64))


@dataclass
class AlternatingBichar:
    """``c(u, v) = u theta v^T mod 1`` with ``theta`` antisymmetric, zero diagonal."""

    theta: FracMatrix

    def value(self, u, v) -> Fraction:
        t = sum((Fraction(int(a)) * th * Fraction(int(b)) for a, row in zip(u, self.theta)
                 for th, b in zip(row, v)), Fraction(0))
        return t % 1

    def to_json(self) -> dict:
        return {"theta": _fmt(self.theta)}


def solve_alternating_c(pair: LatticePair) -> AlternatingBichar:
    """Alternating ``c`` on ``L`` with ``c(x, y) = <x, y>/2 mod 1`` on ``M``."""
    n = pair.rank
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    T = pair.T
    gM = pair.M.gram
    eqs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    theta = [[Fraction(0)] * n for _ in range(n)]
    if pairs and eqs:
        A = [[T[a][i] * T[b][j] - T[a][j] * T[b][i] for (i, j) in pairs] for (a, b) in eqs]
        rhs = [QZ(gM[a][b] / 2) for (a, b) in eqs]
        try:
            sol = ModSolver(A).solve(rhs)
        except NoSolution as exc:
            raise CheckFailed("no alternating form satisfies the M constraints") from exc
        for (i, j), v in zip(pairs, sol):
            theta[i][j] = v.as_fraction()
            theta[j][i] = -v.as_fraction()
    c = AlternatingBichar(theta)
    for a in range(n):
        for b in range(n):
            if (c.value(T[a], T[b]) - gM[a][b] / 2) % 1:
                raise CheckFailed("alternating form misses an M constraint")
    return c


# ---------------------------------------------------------------------------
# the cocycle of a lattice pair


@dataclass
class LatticeCocycle:
    omega: Cochain
    tau: TauFamily
    beta: GHatCocycle
    section: Section
    c: AlternatingBichar

    def to_json(self) -> dict:
        return {"group": self.omega.group.to_json(), "omega": self.omega.to_json(),
                "tau": {"table": self.tau.table.tolist(), "den": self.tau.den},
                "beta": self.beta.to_json(), "c": self.c.to_json()}


def _section_beta(pair: LatticePair, sec: Section) -> GHatCocycle:
    """``beta(x, y) = s(x) + s(y) - s(x+y)`` read as the character ``g -> <beta, s(g)>``."""
    G = sec.group
    T = G.add_table()
    S = sec.reps
    gram, D = _int_scaled(pair.L.gram) if pair.rank else (np.zeros((0, 0), dtype=np.int64), 1)
    m = S[:, None, :] + S[None, :, :] - S[T]
    V = np.einsum("xyk,kl,zl->xyz", m, gram, S) % D
    return GHatCocycle(G, _character_table(G, V, D))


def cocycle_from_lattice(pair: LatticePair, section: Section | None = None,
                         c: AlternatingBichar | None = None) -> LatticeCocycle:
    """``omega(g,x,y) = c(s(g), m) + <s(g), m>/2`` with ``m = s(x) + s(y) - s(x+y)``
    and ``tau_g(x) = c(s(g), s(x)) + <s(g), s(x)>/2``; all identities are certified."""
    sec = section or canonical_section(pair)
    c = c or solve_alternating_c(pair)
    G = sec.group
    T = G.add_table()
    S = sec.reps
    if pair.rank:
        th, Dt = _int_scaled(c.theta)
        gr, Dg = _int_scaled(pair.L.gram)
    else:
        th = gr = np.zeros((0, 0), dtype=np.int64)
        Dt = Dg = 1
    D = math.lcm(Dt, 2 * Dg)
    A = S @ th * (D // Dt) + S @ gr * (D // (2 * Dg))
    m = S[:, None, :] + S[None, :, :] - S[T]
    omega = Cochain(G, np.einsum("gk,xyk->gxy", A, m) % D, D)
    tau = TauFamily(G, (A @ S.T) % D, D)
    if not omega.is_normalized() or not is_cocycle(omega):
        raise CheckFailed("lattice omega is not a normalized 3-cocycle")
    if not is_abelian(omega):
        raise CheckFailed("lattice omega is not abelian")
    from .twisted_double import verify_tau
    verify_tau(omega, tau)
    beta = _section_beta(pair, sec)
    lam = lambda_map(omega, tau)
    if not is_ghat_coboundary(lam - beta):
        raise CheckFailed("Lambda(omega) is not cohomologous to the section cocycle")
    return LatticeCocycle(omega, tau, beta, sec, c)


# ---------------------------------------------------------------------------
# discriminant spaces


@dataclass
class DiscriminantSpace:
    """``(L/L_0, q_L)`` with the metabolizer ``M/L_0``.

    ``pres`` presents ``L/L_0`` on the ``L``-basis, so ``pres.image(x)`` is the
    class of the ``L``-vector ``x``.
    """

    space: QuadSpace
    metabolizer: Subgroup
    pres: Presentation

    def to_json(self) -> dict:
        out = self.space.to_json()
        out["metabolizer"] = self.metabolizer.gens.tolist()
        return out


def _q_of_vectors(pair: LatticePair, X: np.ndarray) -> tuple[np.ndarray, int]:
    """``<x, x>/2 mod 1`` for the rows of ``X``, as numerators over a denominator."""
    gr, Dg = _int_scaled(pair.L.gram)
    return np.einsum("ik,kl,il->i", X, gr, X) % (2 * Dg), 2 * Dg


def discriminant_space(pair: LatticePair) -> DiscriminantSpace:
    n = pair.rank
    if n == 0:
        P = presentation([], 0)
        return DiscriminantSpace(QuadSpace.trivial(), Subgroup(P.group, [0]), P)
    L0 = pair.dual_basis()
    P = presentation(L0.tolist(), n)
    Gam = P.group
    X = Gam.element_array() @ P.from_group if Gam.rank else np.zeros((1, n), dtype=np.int64)
    q, den = _q_of_vectors(pair, X)
    # well defined: shifting a representative by L_0 does not change q
    for row in L0:
        if ((_q_of_vectors(pair, X + row)[0] - q) % den).any():
            raise CheckFailed("q_L is not constant on cosets of L_0")
    space = QuadSpace(Gam, q, den)
    if Gam.order != pair.index ** 2:
        raise CheckFailed("|L/L_0| != |L:M|^2")
    Mimg = P.image(np.array(pair.T, dtype=np.int64)) if Gam.rank else np.zeros((n, 0), dtype=np.int64)
    met = Subgroup.generated_by(Gam, Mimg)
    if not space.is_nondegenerate():
        raise CheckFailed("discriminant form is degenerate")
    if not space.is_metabolizer(met):
        raise CheckFailed("M/L_0 is not a metabolizer")
    return DiscriminantSpace(space, met, P)


def pairing_is_perfect(pair: LatticePair) -> bool:
    """``M/L_0 x L/M -> Q/Z``, ``(x, y) -> <x, y>`` is a perfect pairing."""
    disc = discriminant_space(pair)
    G = pair.glue_group().group
    sec = canonical_section(pair)
    met = disc.metabolizer
    Mreps = disc.space.group.element_array()[met.indices] @ disc.pres.from_group \
        if disc.space.group.rank else np.zeros((1, pair.rank), dtype=np.int64)
    gr, Dg = _int_scaled(pair.L.gram) if pair.rank else (np.zeros((0, 0), dtype=np.int64), 1)
    P = (Mreps @ gr @ sec.reps.T) % Dg
    if met.order != G.order:
        return False
    # perfect iff no non-zero row or column vanishes identically
    return bool(P[1:].any(axis=1).all() and P[:, 1:].any(axis=0).all())


# ---------------------------------------------------------------------------
# discriminant space -> group-likes


@dataclass
class GammaIdentification:
    """``j: L/L_0 -> Gamma^omega`` on element indices, with the twisted double used."""

    perm: np.ndarray
    algebra: object


def lattice_to_gamma(pair: LatticePair, lc: LatticeCocycle | None = None) -> GammaIdentification:
    """``x + L_0 -> (x - s(x + M), x + M)`` read in ``Gamma^omega``; certified to be
    a group isomorphism carrying ``q_L`` to ``q_omega``."""
    from .twisted_double import DoubleAlgebra

    lc = lc or cocycle_from_lattice(pair)
    disc = discriminant_space(pair)
    G = lc.section.group
    alg = DoubleAlgebra(G, lc.omega, lc.tau, check=False)
    gam = alg.group_likes()
    Gam = disc.space.group
    Pg = pair.glue_group()
    n = pair.rank
    X = Gam.element_array() @ disc.pres.from_group if Gam.rank else np.zeros((1, n), dtype=np.int64)
    g_idx = np.atleast_1d(G.index(Pg.image(X))) if G.rank else np.zeros(X.shape[0], dtype=np.int64)
    alpha = X - lc.section.reps[g_idx]
    # alpha in M, read as the character z -> <alpha, s(z)>
    gr, Dg = _int_scaled(pair.L.gram) if n else (np.zeros((0, 0), dtype=np.int64), 1)
    if G.rank:
        gen_idx = [G.index(e) for e in G.generators()]
        vals = alpha @ gr @ lc.section.reps[gen_idx].T  # numerators over Dg
        d = np.array(G.factors, dtype=np.int64)
        if ((vals * d[None, :]) % Dg).any():
            raise CheckFailed("alpha does not define a character of G")
        a_coords = (vals * d[None, :] // Dg) % d[None, :]
        a_idx = np.atleast_1d(G.index(a_coords))
    else:
        a_idx = np.zeros(X.shape[0], dtype=np.int64)
    perm = gam.index[a_idx, g_idx]
    if np.unique(perm).size != Gam.order:
        raise CheckFailed("identification is not a bijection")
    Tl, Tg = Gam.add_table(), gam.group.add_table()
    if (Tg[perm[:, None], perm[None, :]] != perm[Tl]).any():
        raise CheckFailed("identification is not a homomorphism")
    qw = gam.quadratic_space()
    qd = disc.space
    den = math.lcm(qw.den, qd.den)
    if ((qw.q[perm] * (den // qw.den) - qd.q * (den // qd.den)) % den).any():
        raise CheckFailed("identification does not carry q_L to q_omega")
    return GammaIdentification(perm, alg)


# ---------------------------------------------------------------------------
# realisation


def realize_space_as_lattice(space: QuadSpace, metabolizer: Subgroup | None = None) -> LatticePair:
    """A lattice pair whose discriminant space is equivalent to ``space``.

    With ``N`` the metabolizer and ``u_i`` lifts of the canonical generators of
    ``Gamma/N`` (orders ``d_i``), take ``M = U^r`` and glue
    ``v_i = e_i/d_i + d_i q(u_i) f_i + sum_{k<i} d_k b(u_k, u_i) f_k``.  Then
    ``<v_i, f_j> = delta_ij / d_i`` and the values of ``q`` and ``b`` on the
    ``v_i`` match those on the ``u_i``, so ``u_i -> v_i`` extends to an
    equivalence.  The result is certified with :func:`equivalent`.
    """
    if not space.is_nondegenerate():
        raise ValidationError("space must be non-degenerate")
    Gam = space.group
    if metabolizer is None:
        mets = find_metabolizers(space, first_only=True)
        if not mets:
            raise ValidationError("space has no metabolizer")
        metabolizer = mets[0]
    elif not space.is_metabolizer(metabolizer):
        raise ValidationError("given subgroup is not a metabolizer")
    if Gam.order == 1:
        return LatticePair(hyperbolic_plane(1), [[1, 0], [0, 1]])
    full = Subgroup(Gam, np.arange(Gam.order))
    sq = Subquotient(full, metabolizer)
    G = sq.group
    r = G.rank
    d = G.factors
    U = sq.lift(G.generators())
    ui = [Gam.index(u) for u in U]
    b, bden = space.bilinear()
    glue = []
    for i in range(r):
        v = [Fraction(0)] * (2 * r)
        v[i] = Fraction(1, d[i])
        v[r + i] = d[i] * Fraction(int(space.q[ui[i]]), space.den)
        for k in range(i):
            v[r + k] = d[k] * Fraction(int(b[ui[k], ui[i]]), bden)
        glue.append(v)
    pair = LatticePair.from_glue(hyperbolic_plane(r), glue)
    disc = discriminant_space(pair)
    if not equivalent(space, disc.space).equivalent:
        raise ConstructionFailed("glued lattice does not reproduce the space")
    return pair
