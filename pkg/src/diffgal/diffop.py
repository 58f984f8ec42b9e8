"""The skew ring Q(x)[D] with D*f = f*D + f', and matrices over Q(x).

Products expand through the commutation rule D^i f = sum_k C(i,k) f^(k) D^(i-k),
so operator composition is exact.  Matrix utilities (inverse, gauge transform,
companion conversions) back the cyclic-vector pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Sequence

from .errors import DependentSolutions, NotMonic, SingularGauge, ZeroEntry
from .ratfield import RatFunc, derive_n


class SkewOp:
    """Element of Q(x)[D]: coeffs[i] multiplies D^i."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Sequence):
        cs = [RatFunc.coerce(c) for c in coeffs]
        while cs and cs[-1].is_zero():
            cs.pop()
        self.coeffs: tuple[RatFunc, ...] = tuple(cs)

    @classmethod
    def zero(cls) -> "SkewOp":
        return cls(())

    @classmethod
    def const(cls, f) -> "SkewOp":
        return cls((f,))

    @classmethod
    def D(cls, k: int = 1) -> "SkewOp":
        return cls((0,) * k + (1,))

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_monic(self) -> bool:
        return bool(self.coeffs) and self.coeffs[-1] == RatFunc.one()

    def coeff(self, i: int) -> RatFunc:
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        return RatFunc.zero()

    def __eq__(self, other) -> bool:
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    @staticmethod
    def _coerce(v) -> "SkewOp | None":
        if isinstance(v, SkewOp):
            return v
        try:
            return SkewOp((RatFunc.coerce(v),))
        except TypeError:
            return None

    def __neg__(self) -> "SkewOp":
        return SkewOp(tuple(-c for c in self.coeffs))

    def __add__(self, other) -> "SkewOp":
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] = out[i] + c
        return SkewOp(out)

    __radd__ = __add__

    def __sub__(self, other) -> "SkewOp":
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "SkewOp":
        return (-self) + other

    def __mul__(self, other) -> "SkewOp":
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if self.is_zero() or other.is_zero():
            return SkewOp.zero()
        # a D^i * b D^j = sum_k C(i,k) a b^(k) D^(i+j-k); hoist the derivative
        # chains of the right-hand coefficients.
        chains: list[list[RatFunc]] = []
        for b in other.coeffs:
            chain = [b]
            for _ in range(self.order):
                chain.append(chain[-1].derive())
            chains.append(chain)
        out = [RatFunc.zero()] * (self.order + other.order + 1)
        for i, a in enumerate(self.coeffs):
            if a.is_zero():
                continue
            for j, b in enumerate(other.coeffs):
                if b.is_zero():
                    continue
                chain = chains[j]
                for k in range(i + 1):
                    bk = chain[k]
                    if not bk.is_zero():
                        out[i + j - k] = out[i + j - k] + a * bk * comb(i, k)
        return SkewOp(out)

    def __rmul__(self, other) -> "SkewOp":
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other * self

    def __truediv__(self, other) -> "SkewOp":
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if other.order != 0:
            raise NotMonic("division is only defined by order-0 operators")
        inv = RatFunc.one() / other.coeffs[0]
        return SkewOp(tuple(c * inv for c in self.coeffs))

    def __pow__(self, k: int) -> "SkewOp":
        if k < 0:
            raise ValueError("negative operator power")
        out = SkewOp.const(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def monic(self) -> "SkewOp":
        if self.is_zero():
            raise NotMonic("the zero operator cannot be made monic")
        return self / SkewOp.const(self.coeffs[-1])

    def apply_ratfunc(self, f: RatFunc) -> RatFunc:
        """Apply to an element of Q(x)."""
        out = RatFunc.zero()
        d = f
        for c in self.coeffs:
            if not c.is_zero():
                out = out + c * d
            d = d.derive()
        return out

    def __str__(self) -> str:
        if self.is_zero():
            return "0"
        parts = []
        for i in range(self.order, -1, -1):
            c = self.coeff(i)
            if c.is_zero():
                continue
            if i == 0:
                body = _coeff_str(c)
            else:
                ds = "D" if i == 1 else f"D^{i}"
                body = ds if c == RatFunc.one() else f"{_coeff_str(c)}*{ds}"
            parts.append(body)
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"SkewOp({self})"


def _coeff_str(c: RatFunc) -> str:
    s = str(c)
    if c.is_polynomial() and c.num.degree <= 0 and c.num.lc >= 0:
        return s
    return f"({s})"


def skew_mul(l1: SkewOp, l2: SkewOp) -> SkewOp:
    """Product in Q(x)[D]."""
    return l1 * l2


def check_nonzero(fs: Sequence[RatFunc], what: str = "tuple entry") -> tuple[RatFunc, ...]:
    out = tuple(RatFunc.coerce(f) for f in fs)
    for i, f in enumerate(out):
        if f.is_zero():
            raise ZeroEntry(f"{what} {i + 1} is zero")
    return out


def build_Lf(fs: Sequence[RatFunc]) -> SkewOp:
    """Expand f1*D*f2*D*...*f_{l-1}*D*f_l*D for a tuple of nonzero elements."""
    fs = check_nonzero(fs)
    op = SkewOp.D()
    for f in reversed(fs[1:]):
        op = SkewOp.D() * (SkewOp.const(f) * op)
    return SkewOp.const(fs[0]) * op


def monicize(f_partial: Sequence[RatFunc]) -> tuple[RatFunc, ...]:
    """Prepend f1 = 1/(f2*...*fn) so that the expanded operator is monic."""
    rest = check_nonzero(f_partial)
    prod = RatFunc.one()
    for f in rest:
        prod = prod * f
    return (RatFunc.one() / prod,) + rest


class FMatrix:
    """Rectangular matrix over Q(x)."""

    __slots__ = ("rows",)

    def __init__(self, rows: Sequence[Sequence]):
        self.rows: tuple[tuple[RatFunc, ...], ...] = tuple(
            tuple(RatFunc.coerce(e) for e in row) for row in rows
        )
        if self.rows:
            w = len(self.rows[0])
            if any(len(r) != w for r in self.rows):
                raise ValueError("ragged matrix")

    @classmethod
    def identity(cls, n: int) -> "FMatrix":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def zero(cls, n: int, m: int | None = None) -> "FMatrix":
        m = n if m is None else m
        return cls([[0] * m for _ in range(n)])

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def ncols(self) -> int:
        return len(self.rows[0]) if self.rows else 0

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def __eq__(self, other) -> bool:
        if not isinstance(other, FMatrix):
            return NotImplemented
        return self.rows == other.rows

    def __add__(self, other: "FMatrix") -> "FMatrix":
        return FMatrix([[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self.rows, other.rows)])

    def __sub__(self, other: "FMatrix") -> "FMatrix":
        return FMatrix([[a - b for a, b in zip(r1, r2)] for r1, r2 in zip(self.rows, other.rows)])

    def __mul__(self, other: "FMatrix") -> "FMatrix":
        if not isinstance(other, FMatrix):
            return NotImplemented
        if self.ncols != other.nrows:
            raise ValueError("dimension mismatch")
        ot = list(zip(*other.rows))
        out = []
        for row in self.rows:
            out.append([sum((a * b for a, b in zip(row, col)), RatFunc.zero()) for col in ot])
        return FMatrix(out)

    def scale(self, c) -> "FMatrix":
        c = RatFunc.coerce(c)
        return FMatrix([[e * c for e in row] for row in self.rows])

    def derive(self) -> "FMatrix":
        return FMatrix([[e.derive() for e in row] for row in self.rows])

    def det(self) -> RatFunc:
        return self._elim()[0]

    def inverse(self) -> "FMatrix":
        det, inv = self._elim()
        if det.is_zero():
            raise SingularGauge("matrix is singular over Q(x)")
        assert inv is not None
        return inv

    def _elim(self) -> tuple[RatFunc, "FMatrix | None"]:
        """Gauss-Jordan with first-nonzero pivoting; returns (det, inverse|None)."""
        n = self.nrows
        if n != self.ncols:
            raise ValueError("determinant of a non-square matrix")
        a = [list(row) for row in self.rows]
        b = [[RatFunc.one() if i == j else RatFunc.zero() for j in range(n)] for i in range(n)]
        det = RatFunc.one()
        for col in range(n):
            piv = None
            for r in range(col, n):
                if not a[r][col].is_zero():
                    piv = r
                    break
            if piv is None:
                return RatFunc.zero(), None
            if piv != col:
                a[col], a[piv] = a[piv], a[col]
                b[col], b[piv] = b[piv], b[col]
                det = -det
            p = a[col][col]
            det = det * p
            pinv = RatFunc.one() / p
            a[col] = [e * pinv for e in a[col]]
            b[col] = [e * pinv for e in b[col]]
            for r in range(n):
                if r != col and not a[r][col].is_zero():
                    f = a[r][col]
                    a[r] = [e - f * g for e, g in zip(a[r], a[col])]
                    b[r] = [e - f * g for e, g in zip(b[r], b[col])]
        return det, FMatrix(b)

    def is_strictly_upper(self) -> bool:
        return all(
            self.rows[i][j].is_zero()
            for i in range(self.nrows)
            for j in range(min(i + 1, self.ncols))
        )

    def __str__(self) -> str:
        return "[" + ", ".join("[" + ", ".join(str(e) for e in row) + "]" for row in self.rows) + "]"

    def __repr__(self) -> str:
        return f"FMatrix({self})"


def shape_matrix(f_partial: Sequence[RatFunc]) -> FMatrix:
    """Strictly upper matrix with superdiagonal 1/f_n, 1/f_{n-1}, ..., 1/f_2."""
    fs = check_nonzero(f_partial)
    n = len(fs) + 1
    rows = [[RatFunc.zero() for _ in range(n)] for _ in range(n)]
    for i in range(n - 1):
        rows[i][i + 1] = RatFunc.one() / fs[n - 2 - i]
    return FMatrix(rows)


def gauge_transform(a: FMatrix, b: FMatrix) -> FMatrix:
    """The gauge action B A B^-1 + B' B^-1."""
    binv = b.inverse()
    return b * a * binv + b.derive() * binv


@dataclass(frozen=True)
class CompanionMatrix:
    """Companion form of a monic operator: superdiagonal ones, last row -a_i."""

    coeffs: tuple[RatFunc, ...]  # a_0 ... a_{n-1}

    @property
    def n(self) -> int:
        return len(self.coeffs)

    def matrix(self) -> FMatrix:
        n = self.n
        rows = [[RatFunc.zero() for _ in range(n)] for _ in range(n)]
        for i in range(n - 1):
            rows[i][i + 1] = RatFunc.one()
        for j in range(n):
            rows[n - 1][j] = -self.coeffs[j]
        return FMatrix(rows)

    @classmethod
    def from_matrix(cls, m: FMatrix) -> "CompanionMatrix | None":
        n = m.nrows
        if n != m.ncols or n == 0:
            return None
        one, zero = RatFunc.one(), RatFunc.zero()
        for i in range(n - 1):
            for j in range(n):
                want = one if j == i + 1 else zero
                if m[i, j] != want:
                    return None
        return cls(tuple(-m[n - 1, j] for j in range(n)))


def companion_of(op: SkewOp, n: int | None = None) -> CompanionMatrix:
    """Companion matrix of a monic operator."""
    if not op.is_monic():
        raise NotMonic(f"operator {op} is not monic")
    if n is not None and op.order != n:
        raise ValueError(f"operator has order {op.order}, expected {n}")
    return CompanionMatrix(tuple(op.coeff(i) for i in range(op.order)))


def operator_of(c: CompanionMatrix) -> SkewOp:
    """Monic operator with the given companion matrix."""
    return SkewOp(tuple(c.coeffs) + (RatFunc.one(),))


def factor_recursion(solutions: Sequence) -> tuple[tuple[RatFunc, ...], RatFunc]:
    """Recover (f_1..f_n, f_{n+1}) from a solution basis in a tower.

    Implements f_{n+1} = 1/v_1 and the nested recursion
    f_{n-i} = 1/(f_{n-(i-1)}( ... (f_{n+1} v_{i+2})' ... )')'.
    The solutions may be any objects with derive()/inverse()/as_ratfunc().
    """
    vs = list(solutions)
    n = len(vs)
    if n == 0:
        raise ZeroEntry("need at least one solution")
    if vs[0].is_zero():
        raise DependentSolutions("v_1 = 0")
    f_next = _to_ratfunc(vs[0].inverse(), "f_{n+1}")
    fs: dict[int, RatFunc] = {}
    for j in range(2, n + 1):
        u = (vs[j - 1] * f_next).derive()
        for i in range(n, n - j + 2, -1):
            u = (u * fs[i]).derive()
        if u.is_zero():
            raise DependentSolutions(f"recursion denominator vanished at v_{j}")
        fs[n - j + 2] = RatFunc.one() / _to_ratfunc(u, f"f_{n - j + 2} denominator")
    rest = tuple(fs[i] for i in range(2, n + 1))
    return monicize(rest), f_next


def _to_ratfunc(e, what: str) -> RatFunc:
    if isinstance(e, RatFunc):
        return e
    try:
        return e.as_ratfunc()
    except Exception as exc:
        raise DependentSolutions(f"{what} does not lie in Q(x): {e}") from exc
