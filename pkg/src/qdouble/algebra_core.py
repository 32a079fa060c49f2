"""Exact arithmetic substrate.

Values of cocycles, characters and quadratic forms live in Q/Z: a root of
unity exp(2 pi i t) is stored as the residue t mod 1.  Linear systems over Q/Z
are solved through the Smith normal form of the integer coefficient matrix,
and Gauss sums are handled as formal integer combinations of N-th roots of
unity reduced modulo the N-th cyclotomic polynomial.
"""

from __future__ import annotations

import functools
import math
from fractions import Fraction
from typing import Iterable, Sequence

import mpmath
import numpy as np

from .errors import NoSolution, NotRational, ValidationError

IntMatrix = list[list[int]]


# ---------------------------------------------------------------------------
# Q/Z residues


class QZ:
    """A residue class ``numerator/denominator`` modulo 1, kept reduced."""

    __slots__ = ("_num", "_den")

    def __init__(self, numerator: int | Fraction = 0, denominator: int = 1):
        if isinstance(numerator, Fraction):
            if denominator != 1:
                numerator = numerator / denominator
            num, den = numerator.numerator, numerator.denominator
        else:
            if denominator == 0:
                raise ValidationError("QZ denominator must be nonzero")
            num, den = int(numerator), int(denominator)
            if den < 0:
                num, den = -num, -den
        num %= den
        g = math.gcd(num, den)
        self._num = num // g
        self._den = den // g

    @property
    def numerator(self) -> int:
        return self._num

    @property
    def denominator(self) -> int:
        return self._den

    @classmethod
    def parse(cls, text: str) -> "QZ":
        text = text.strip()
        try:
            if "/" in text:
                a, b = text.split("/")
                return cls(int(a), int(b))
            return cls(int(text))
        except ValueError as exc:
            raise ValidationError(f"cannot parse Q/Z value {text!r}") from exc

    def as_fraction(self) -> Fraction:
        return Fraction(self._num, self._den)

    def __add__(self, other: "QZ") -> "QZ":
        return QZ(self._num * other._den + other._num * self._den, self._den * other._den)

    def __sub__(self, other: "QZ") -> "QZ":
        return QZ(self._num * other._den - other._num * self._den, self._den * other._den)

    def __neg__(self) -> "QZ":
        return QZ(-self._num, self._den)

    def __rmul__(self, k: int) -> "QZ":
        return QZ(int(k) * self._num, self._den)

    __mul__ = __rmul__

    def __eq__(self, other: object) -> bool:
        if isinstance(other, QZ):
            return self._num == other._num and self._den == other._den
        if isinstance(other, int):
            return self._num == 0 and other == 0
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self._num, self._den))

    def __lt__(self, other: "QZ") -> bool:
        return self.as_fraction() < other.as_fraction()

    def __bool__(self) -> bool:
        return self._num != 0

    def __str__(self) -> str:
        return f"{self._num}/{self._den}"

    def __repr__(self) -> str:
        return f"QZ({self._num}, {self._den})"


def qz_add(a: QZ, b: QZ) -> QZ:
    return a + b


def qz_scale(k: int, a: QZ) -> QZ:
    return QZ(k * a.numerator, a.denominator)


def common_denominator(values: Iterable[QZ | Fraction]) -> int:
    den = 1
    for v in values:
        den = math.lcm(den, v.denominator)
    return den


# ---------------------------------------------------------------------------
# integer normal forms


def _identity(n: int) -> IntMatrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def smith_normal_form(A: Sequence[Sequence[int]]) -> tuple[IntMatrix, IntMatrix, IntMatrix]:
    """Return ``(U, D, V)`` with ``U @ A @ V == D`` and ``D`` in Smith form.

    ``U`` and ``V`` are unimodular.  Diagonal entries are non-negative and each
    divides the next.
    """
    U, D, V, _ = smith_normal_form_full(A)
    return U, D, V


def smith_normal_form_full(A: Sequence[Sequence[int]]) -> tuple[IntMatrix, IntMatrix, IntMatrix, IntMatrix]:
    """Like :func:`smith_normal_form` but also returns ``V^{-1}``."""
    D = [[int(x) for x in row] for row in A]
    m = len(D)
    n = len(D[0]) if m else 0
    U = _identity(m)
    V = _identity(n)
    Vinv = _identity(n)

    def swap_rows(i, j):
        D[i], D[j] = D[j], D[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in D:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]
        Vinv[i], Vinv[j] = Vinv[j], Vinv[i]

    def add_row(dst, src, f):
        if f:
            rs, rd = D[src], D[dst]
            for k in range(n):
                rd[k] -= f * rs[k]
            us, ud = U[src], U[dst]
            for k in range(m):
                ud[k] -= f * us[k]

    def add_col(dst, src, f):
        if f:
            for row in D:
                row[dst] -= f * row[src]
            for row in V:
                row[dst] -= f * row[src]
            vs, vd = Vinv[src], Vinv[dst]
            for k in range(n):
                vs[k] += f * vd[k]

    for t in range(min(m, n)):
        while True:
            best = None
            for i in range(t, m):
                row = D[i]
                for j in range(t, n):
                    v = row[j]
                    if v and (best is None or abs(v) < best[0]):
                        best = (abs(v), i, j)
                        if best[0] == 1:
                            break
                if best is not None and best[0] == 1:
                    break
            if best is None:
                return U, D, V, Vinv
            _, i, j = best
            swap_rows(t, i)
            swap_cols(t, j)
            piv = D[t][t]
            clean = True
            for i in range(t + 1, m):
                if D[i][t]:
                    add_row(i, t, D[i][t] // piv)
                    clean = clean and D[i][t] == 0
            for j in range(t + 1, n):
                if D[t][j]:
                    add_col(j, t, D[t][j] // piv)
                    clean = clean and D[t][j] == 0
            if not clean:
                continue
            bad = None
            for i in range(t + 1, m):
                for j in range(t + 1, n):
                    if D[i][j] % piv:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            add_row(t, bad, -1)
        if D[t][t] < 0:
            D[t] = [-x for x in D[t]]
            U[t] = [-x for x in U[t]]
    return U, D, V, Vinv


def snf_diagonal(A: Sequence[Sequence[int]]) -> list[int]:
    _, D, _ = smith_normal_form(A)
    return [D[i][i] for i in range(min(len(D), len(D[0]) if D else 0))]


def hermite_normal_form(rows: Sequence[Sequence[int]], ncols: int | None = None) -> IntMatrix:
    """Row-style Hermite normal form of the lattice spanned by ``rows``.

    Zero rows are dropped; pivots are positive and the entries above each
    pivot are reduced into ``[0, pivot)``.  The result depends only on the
    lattice, so it serves as a canonical form.
    """
    A = [[int(x) for x in r] for r in rows]
    if ncols is None:
        ncols = len(A[0]) if A else 0
    A = [r for r in A if any(r)]
    r = 0
    for col in range(ncols):
        if r >= len(A):
            break
        k = next((i for i in range(r, len(A)) if A[i][col]), None)
        if k is None:
            continue
        A[r], A[k] = A[k], A[r]
        for i in range(r + 1, len(A)):
            b = A[i][col]
            if not b:
                continue
            a = A[r][col]
            g, x, y = _egcd(a, b)
            ra, rb = A[r], A[i]
            A[r] = [x * u + y * v for u, v in zip(ra, rb)]
            A[i] = [(b // g) * u - (a // g) * v for u, v in zip(ra, rb)]
        if A[r][col] < 0:
            A[r] = [-x for x in A[r]]
        piv = A[r][col]
        for i in range(r):
            f = A[i][col] // piv
            if f:
                A[i] = [u - f * v for u, v in zip(A[i], A[r])]
        r += 1
    return [row for row in A[:r]]


def _egcd(a: int, b: int) -> tuple[int, int, int]:
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def matmul(A: Sequence[Sequence], B: Sequence[Sequence]) -> list[list]:
    Bt = list(zip(*B))
    return [[sum(a * b for a, b in zip(row, col)) for col in Bt] for row in A]


def rational_inverse(A: Sequence[Sequence[Fraction | int]]) -> list[list[Fraction]]:
    """Inverse of a square rational matrix by Gauss-Jordan elimination."""
    n = len(A)
    M = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
         for i, row in enumerate(A)]
    for c in range(n):
        p = next((r for r in range(c, n) if M[r][c] != 0), None)
        if p is None:
            raise ZeroDivisionError("singular matrix")
        M[c], M[p] = M[p], M[c]
        inv = 1 / M[c][c]
        M[c] = [x * inv for x in M[c]]
        for r in range(n):
            if r != c and M[r][c] != 0:
                f = M[r][c]
                M[r] = [x - f * y for x, y in zip(M[r], M[c])]
    return [row[n:] for row in M]


def rational_det(A: Sequence[Sequence[Fraction | int]]) -> Fraction:
    n = len(A)
    M = [[Fraction(x) for x in row] for row in A]
    det = Fraction(1)
    for c in range(n):
        p = next((r for r in range(c, n) if M[r][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            M[c], M[p] = M[p], M[c]
            det = -det
        det *= M[c][c]
        for r in range(c + 1, n):
            if M[r][c] != 0:
                f = M[r][c] / M[c][c]
                M[r] = [x - f * y for x, y in zip(M[r], M[c])]
    return det


# ---------------------------------------------------------------------------
# linear systems over Q/Z


class ModSolver:
    """Solver for ``A x = b (mod 1)`` with a fixed integer matrix ``A``.

    The Smith form is computed once; each right-hand side costs two small
    matrix-vector products.  Solutions use the back-substitution with every
    free parameter set to zero, so they are deterministic.
    """

    def __init__(self, A: Sequence[Sequence[int]]):
        self.A = [[int(x) for x in row] for row in np.asarray(A).tolist()] if isinstance(A, np.ndarray) \
            else [[int(x) for x in row] for row in A]
        self.m = len(self.A)
        self.n = len(self.A[0]) if self.m else 0
        U, D, V = smith_normal_form(self.A)
        self.U, self.V = U, V
        self.diag = [D[i][i] for i in range(min(self.m, self.n))]
        self.rank = sum(1 for d in self.diag if d)

    def _reduced(self, which: str, mod: int) -> np.ndarray:
        key = (which, mod)
        cache = self.__dict__.setdefault("_mod_cache", {})
        if key not in cache:
            M = self.U if which == "U" else self.V
            cache[key] = np.array([[x % mod for x in row] for row in M], dtype=np.int64).reshape(
                len(M), len(M[0]) if M else 0)
        return cache[key]

    def solve_batch(self, B: np.ndarray, den: int) -> tuple[np.ndarray, int]:
        """Solve for many right-hand sides ``B[:, t] / den`` at once.

        Returns ``(X, den_x)`` with the canonical solutions ``X[:, t] / den_x``;
        agrees with :meth:`solve` column by column.
        """
        B = np.asarray(B, dtype=np.int64).reshape(self.m, -1) % den
        C = (self._reduced("U", den) @ B) % den
        if C[self.rank:].any():
            raise NoSolution("linear system is inconsistent over Q/Z")
        L = math.lcm(*self.diag[: self.rank]) if self.rank else 1
        den2 = den * L
        Y = np.zeros((self.n, B.shape[1]), dtype=np.int64)
        for i in range(self.rank):
            Y[i] = C[i] * (L // self.diag[i])
        X = (self._reduced("V", den2) @ Y) % den2
        return X, den2

    def solve(self, b: Sequence[QZ | Fraction]) -> list[QZ]:
        if len(b) != self.m:
            raise ValidationError("right-hand side has the wrong length")
        fb = [v.as_fraction() if isinstance(v, QZ) else Fraction(v) for v in b]
        c = [sum((u * x for u, x in zip(row, fb)), Fraction(0)) % 1 for row in self.U]
        y = [Fraction(0)] * self.n
        for i, ci in enumerate(c):
            if i < self.rank:
                y[i] = ci / self.diag[i]
            elif ci != 0:
                raise NoSolution("linear system is inconsistent over Q/Z")
        return [QZ(sum((v * yy for v, yy in zip(row, y)), Fraction(0))) for row in self.V]


def solve_mod(A: Sequence[Sequence[int]], b: Sequence[QZ | Fraction]) -> list[QZ]:
    """Canonical solution ``x`` of ``A x = b`` over Q/Z, or :class:`NoSolution`."""
    return ModSolver(A).solve(b)


# ---------------------------------------------------------------------------
# modular Smith reduction (numpy), used for the bar complex


def valuation(x: int, p: int) -> int:
    if x == 0:
        raise ValueError("valuation of zero")
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


class PrimePowerSNF:
    """Smith-type diagonalisation of an integer matrix modulo ``p**k``.

    After reduction ``R @ A @ V`` (mod ``p**k``) has a single nonzero entry in
    each pivot row and pivot column and zeros elsewhere.  ``V`` and its inverse
    are tracked when ``track_cols`` is set; the inverse of ``R`` is tracked
    when ``track_rows`` is set.  Pivots are recorded as ``(row, col, v)`` with
    ``v`` the p-adic valuation of the pivot entry.
    """

    def __init__(self, A: np.ndarray, p: int, k: int, track_cols: bool = False,
                 track_rows: bool = False):
        p, k = int(p), int(k)
        self.p, self.k = p, k
        mod = p ** k
        self.mod = mod
        M = np.array(A, dtype=np.int64) % mod
        m, n = M.shape
        self.shape = (m, n)
        V = np.eye(n, dtype=np.int64) if track_cols else None
        Vinv = np.eye(n, dtype=np.int64) if track_cols else None
        Rinv = np.eye(m, dtype=np.int64) if track_rows else None
        row_free = np.ones(m, dtype=bool)
        col_free = np.ones(n, dtype=bool)
        pivots: list[tuple[int, int, int]] = []

        def pivot(i: int, j: int) -> None:
            a = int(M[i, j])
            v = valuation(a, p)
            pv = p ** v
            inv_u = pow(a // pv, -1, mod)
            col = M[:, j].copy()
            col[i] = 0
            rows = np.nonzero(col)[0]
            if rows.size:
                f = ((col[rows] // pv) * inv_u) % mod
                cz = np.nonzero(M[i, :])[0]
                blk = np.ix_(rows, cz)
                M[blk] = (M[blk] - np.outer(f, M[i, cz])) % mod
                if Rinv is not None:
                    Rinv[:, i] = (Rinv[:, i] + Rinv[:, rows] @ f) % mod
            row = M[i, :].copy()
            row[j] = 0
            cols = np.nonzero(row)[0]
            if cols.size:
                g = ((row[cols] // pv) * inv_u) % mod
                M[i, cols] = 0
                if V is not None:
                    vr = np.nonzero(V[:, j])[0]
                    blk = np.ix_(vr, cols)
                    V[blk] = (V[blk] - np.outer(V[vr, j], g)) % mod
                    Vinv[j, :] = (Vinv[j, :] + g @ Vinv[cols, :]) % mod
            row_free[i] = False
            col_free[j] = False
            pivots.append((i, j, v))

        # unit pivots first, column by column
        for j in range(n):
            units = np.nonzero(row_free & (M[:, j] % p != 0))[0]
            if units.size:
                pivot(int(units[0]), j)
        # then smallest valuation in what remains
        while True:
            rows = np.nonzero(row_free)[0]
            cols = np.nonzero(col_free)[0]
            if not rows.size or not cols.size:
                break
            S = M[np.ix_(rows, cols)]
            if not S.any():
                break
            best = None
            t = S.copy()
            for v in range(k):
                hit = np.argwhere((t != 0) & (t % p != 0))
                if hit.size:
                    best = hit[0]
                    break
                t = t // p
            pivot(int(rows[best[0]]), int(cols[best[1]]))

        self.pivots = pivots
        self.reduced = M
        self.V, self.Vinv, self.Rinv = V, Vinv, Rinv
        self.pivot_col_val = {j: v for (_, j, v) in pivots}


# ---------------------------------------------------------------------------
# formal sums of roots of unity


@functools.lru_cache(maxsize=None)
def cyclotomic_polynomial(n: int) -> tuple[int, ...]:
    """Coefficients (lowest degree first) of the n-th cyclotomic polynomial."""
    if n < 1:
        raise ValueError("n must be positive")
    num = [-1] + [0] * (n - 1) + [1]  # x^n - 1
    for d in range(1, n):
        if n % d == 0:
            num = _polydiv_exact(num, list(cyclotomic_polynomial(d)))
    return tuple(num)


def _polydiv_exact(a: list[int], b: list[int]) -> list[int]:
    a = list(a)
    q = [0] * (len(a) - len(b) + 1)
    lead = b[-1]
    for i in range(len(a) - len(b), -1, -1):
        c = a[i + len(b) - 1]
        if c % lead:
            raise ArithmeticError("inexact polynomial division")
        c //= lead
        q[i] = c
        if c:
            for j, bj in enumerate(b):
                a[i + j] -= c * bj
    if any(a[: len(b) - 1]):
        raise ArithmeticError("inexact polynomial division")
    return q


def _poly_mod(a: Sequence[int], m: Sequence[int]) -> list[int]:
    """Remainder of ``a`` modulo a monic integer polynomial ``m``."""
    a = list(a)
    dm = len(m) - 1
    for i in range(len(a) - 1, dm - 1, -1):
        c = a[i]
        if c:
            for j in range(dm + 1):
                a[i - dm + j] -= c * m[j]
    out = a[:dm] + [0] * max(0, dm - len(a))
    return out


@functools.lru_cache(maxsize=None)
def _reduction_matrix(n: int) -> np.ndarray:
    phi = cyclotomic_polynomial(n)
    deg = len(phi) - 1
    R = np.zeros((n, deg), dtype=np.int64)
    for j in range(n):
        mono = [0] * j + [1]
        R[j, :] = _poly_mod(mono, phi)
    return R


def cyclotomic_reduction_matrix(n: int) -> np.ndarray:
    """Matrix sending coefficient vectors of ``sum c_j zeta_n^j`` to the basis
    ``1, zeta, ..., zeta^(phi(n)-1)`` of the n-th cyclotomic field."""
    return _reduction_matrix(n).copy()


class RootSum:
    """An integer combination ``sum_j c_j exp(2 pi i j / N)``."""

    __slots__ = ("order", "coeffs")

    def __init__(self, order: int, coeffs: Sequence[int]):
        if order < 1 or len(coeffs) != order:
            raise ValidationError("RootSum needs exactly `order` coefficients")
        self.order = int(order)
        self.coeffs = tuple(int(c) for c in coeffs)

    @classmethod
    def from_phases(cls, phases: Iterable[QZ]) -> "RootSum":
        phases = list(phases)
        n = common_denominator(phases)
        c = [0] * n
        for ph in phases:
            c[ph.numerator * (n // ph.denominator)] += 1
        return cls(n, c)

    @classmethod
    def constant(cls, value: int) -> "RootSum":
        return cls(1, [value])

    def lift(self, n: int) -> "RootSum":
        if n % self.order:
            raise ValidationError("can only lift to a multiple of the order")
        c = [0] * n
        s = n // self.order
        for j, cj in enumerate(self.coeffs):
            c[j * s] += cj
        return RootSum(n, c)

    def _aligned(self, other: "RootSum") -> tuple["RootSum", "RootSum"]:
        n = math.lcm(self.order, other.order)
        return self.lift(n), other.lift(n)

    def __add__(self, other: "RootSum") -> "RootSum":
        a, b = self._aligned(other)
        return RootSum(a.order, [x + y for x, y in zip(a.coeffs, b.coeffs)])

    def __sub__(self, other: "RootSum") -> "RootSum":
        a, b = self._aligned(other)
        return RootSum(a.order, [x - y for x, y in zip(a.coeffs, b.coeffs)])

    def __mul__(self, other: "RootSum") -> "RootSum":
        a, b = self._aligned(other)
        n = a.order
        c = [0] * n
        for i, x in enumerate(a.coeffs):
            if x:
                for j, y in enumerate(b.coeffs):
                    if y:
                        c[(i + j) % n] += x * y
        return RootSum(n, c)

    def conjugate(self) -> "RootSum":
        n = self.order
        return RootSum(n, [self.coeffs[(-j) % n] for j in range(n)])

    def reduced(self) -> list[int]:
        """Coordinates in the power basis of the cyclotomic field."""
        return _poly_mod(self.coeffs, cyclotomic_polynomial(self.order))

    def is_zero(self) -> bool:
        return not any(self.reduced())

    def rational_value(self) -> Fraction:
        red = self.reduced()
        if any(red[1:]):
            raise NotRational("root sum is not a rational number")
        return Fraction(red[0] if red else 0)

    def numeric(self, prec: int = 128) -> mpmath.mpc:
        with mpmath.workprec(prec):
            total = mpmath.mpc(0)
            for j, c in enumerate(self.coeffs):
                if c:
                    total += c * mpmath.expjpi(mpmath.mpf(2 * j) / self.order)
            return total

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RootSum):
            return NotImplemented
        return (self - other).is_zero()

    # equal values can have different orders, so no hash consistent with __eq__ is cheap
    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"RootSum({self.order}, {list(self.coeffs)})"


def rootsum_norm_sq(s: RootSum) -> Fraction:
    """Exact ``|s|^2``; raises :class:`NotRational` if it is not rational."""
    return (s * s.conjugate()).rational_value()
