"""Integrability deciders and witness generators over Q(x) and its towers.

Covers: the classical Liouville identity check, the generalized identity with
polynomial log-coefficients, in-field n- and infinity-integrability of rational
functions, construction of elementary n-th antiderivatives with logarithms of
squarefree factors, and the infinity-integrability classifiers for the
exp-, log- and radical towers (with witnesses for finite depths).

Residues are only split over Q; inputs that need algebraic constants raise
NotSupported rather than returning wrong answers.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, isqrt
from typing import Sequence

from .errors import BudgetExceeded, NotPolynomialInTheta, NotSupported, ZeroEntry
from .ratfield import (
    RatFunc,
    SimplePoleObstruction,
    UPoly,
    antiderivative_in_field,
    derive_n,
    hermite_reduce,
    resultant,
)
from .tower import Tower, TowerExpr, laurent_normal

_FACTOR_TRIAL_LIMIT = 1_000_000


@dataclass
class LiouvilleForm:
    """Data of the generalized Liouville identity: g = (f + sum f_i log u_i)^(n)."""

    n: int
    f: RatFunc
    terms: list[tuple[UPoly, RatFunc]]  # (f_i polynomial of degree <= n-1, u_i nonzero)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        for fi, ui in self.terms:
            if fi.degree > self.n - 1:
                raise ValueError(f"deg {fi} exceeds n-1 = {self.n - 1}")
            if ui.is_zero():
                raise ZeroEntry("u_i must be nonzero")


def verify_liouville_form(g: RatFunc, form: LiouvilleForm) -> bool:
    """Exact check of g = f^(n) + sum_i sum_j C(n,j) f_i^(n-j) (u_i'/u_i)^(j-1).

    This is the n-th derivative of f + sum f_i log(u_i) with deg f_i < n, so
    the binomial weights are forced; they make the 1/x identity of the
    log-power witnesses come out exactly.
    """
    n = form.n
    acc = derive_n(form.f, n)
    for fi, ui in form.terms:
        dlog = ui.derive() / ui
        fi_r = RatFunc(fi)
        for j in range(1, n + 1):
            acc = acc + derive_n(fi_r, n - j) * derive_n(dlog, j - 1) * comb(n, j)
    return acc == g


def liouville_classic_check(g: RatFunc, v: RatFunc,
                            cu: Sequence[tuple[Fraction, RatFunc]]) -> bool:
    """Classical Liouville shape: g = v' + sum c_i u_i'/u_i."""
    acc = v.derive()
    for c, u in cu:
        if u.is_zero():
            raise ZeroEntry("u_i must be nonzero")
        acc = acc + u.derive() / u * RatFunc.from_fraction(Fraction(c))
    return acc == g


def liouville_constant_form_check(g: TowerExpr, c: Fraction, f: TowerExpr,
                                  cu: Sequence[tuple[Fraction, TowerExpr]],
                                  n: int) -> bool:
    """Form verifier for the no-unit-derivative case:
    g = c + f^(n) + sum c_i (u_i'/u_i)^(n-1), checked inside a declared tower."""
    tower = g.tower
    acc = tower.expr(Fraction(c)) + f.derive_n(n)
    for ci, ui in cu:
        if ui.is_zero():
            raise ZeroEntry("u_i must be nonzero")
        acc = acc + (ui.derive() / ui).derive_n(n - 1) * Fraction(ci)
    return (acc - g).is_zero()


@dataclass
class IntegrabilityVerdict:
    """Outcome of an integrability decision."""

    status: str  # "integrable" | "not_integrable" | "not_supported"
    witness: object = None
    obstruction: object = None
    step: int | None = None
    reason: str | None = None

    @property
    def is_integrable(self) -> bool:
        return self.status == "integrable"

    @classmethod
    def integrable(cls, witness=None) -> "IntegrabilityVerdict":
        return cls("integrable", witness=witness)

    @classmethod
    def not_integrable(cls, obstruction=None, step: int | None = None,
                       reason: str | None = None) -> "IntegrabilityVerdict":
        return cls("not_integrable", obstruction=obstruction, step=step, reason=reason)

    @classmethod
    def not_supported(cls, reason: str) -> "IntegrabilityVerdict":
        return cls("not_supported", reason=reason)


def n_integrable_in_Cx(g: RatFunc, n: int) -> IntegrabilityVerdict:
    """Does g have an n-th antiderivative inside Q(x)?  Witness or first
    obstruction with its step index."""
    if n < 1:
        raise ValueError("n must be positive")
    h = g
    for step in range(1, n + 1):
        res = antiderivative_in_field(h)
        if isinstance(res, SimplePoleObstruction):
            return IntegrabilityVerdict.not_integrable(obstruction=res, step=step)
        h = res
    return IntegrabilityVerdict.integrable(witness=h)


def infinity_integrable_in_Cx(g: RatFunc) -> IntegrabilityVerdict:
    """Stable elements of Q(x) are exactly the polynomials."""
    _, proper = g.split()
    if proper.is_zero():
        return IntegrabilityVerdict.integrable()
    return IntegrabilityVerdict.not_integrable(obstruction=proper)


# -- rational log parts ------------------------------------------------------


def _factor_int(n: int) -> dict[int, int]:
    n = abs(n)
    out: dict[int, int] = {}
    trials = 0
    p = 2
    while p * p <= n:
        trials += 1
        if trials > _FACTOR_TRIAL_LIMIT:
            raise BudgetExceeded("integer factorization budget exhausted")
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def _divisors(n: int) -> list[int]:
    fac = _factor_int(n)
    divs = [1]
    for p, e in fac.items():
        divs = [d * p**k for d in divs for k in range(e + 1)]
    return divs


def _rational_roots(p: UPoly) -> list[Fraction]:
    """All rational roots of p (nonzero p)."""
    if p.is_zero():
        raise ValueError("zero polynomial")
    roots = []
    # strip powers of x
    k = 0
    while p[k] == 0:
        k += 1
    if k:
        roots.append(Fraction(0))
        p = UPoly(p.coeffs[k:])
    if p.degree == 0:
        return roots
    denlcm = 1
    for c in p.coeffs:
        denlcm = denlcm * c.denominator // _gcd_int(denlcm, c.denominator)
    ints = [int(c * denlcm) for c in p.coeffs]
    g = 0
    for v in ints:
        g = _gcd_int(g, v)
    ints = [v // g for v in ints]
    a0, al = ints[0], ints[-1]
    for num in _divisors(a0):
        for den in _divisors(al):
            for cand in (Fraction(num, den), Fraction(-num, den)):
                if cand not in roots and _eval_int(ints, cand) == 0:
                    roots.append(cand)
    return roots


def _gcd_int(a: int, b: int) -> int:
    a, b = abs(a), abs(b)
    while b:
        a, b = b, a % b
    return a


def _eval_int(coeffs: list[int], v: Fraction) -> Fraction:
    out = Fraction(0)
    for c in reversed(coeffs):
        out = out * v + c
    return out


def _resultant_in_residue(q: UPoly, p: UPoly) -> UPoly:
    """R(c) = res_x(q, p - c q') computed by interpolation over Q."""
    d = q.degree
    dq = q.derivative()
    points = []
    for k in range(d + 1):
        c = Fraction(k)
        val = resultant(q, p - dq * c)
        points.append((c, val))
    return _lagrange(points)


def _lagrange(points: list[tuple[Fraction, Fraction]]) -> UPoly:
    out = UPoly.zero()
    for i, (xi, yi) in enumerate(points):
        if yi == 0:
            continue
        term = UPoly((yi,))
        for j, (xj, _) in enumerate(points):
            if i != j:
                term = term * UPoly((-xj, Fraction(1))) * (1 / (xi - xj))
        out = out + term
    return out


def rational_log_parts(remainder: RatFunc) -> list[tuple[Fraction, UPoly]]:
    """Write a proper fraction with squarefree denominator as
    sum c_k * g_k'/g_k with rational constants and monic factors g_k.

    Raises NotSupported when the residues are not all rational (splitting an
    irreducible factor would need algebraic constants).
    """
    p, q = remainder.num, remainder.den
    if p.is_zero():
        return []
    dq = q.derivative()
    # fast path: constant combined residue
    g, s, _ = dq.xgcd(q)
    if g.degree == 0:
        a = (s * p) % q
        if a.degree == 0:
            return [(a[0], q.monic())]
    res_poly = _resultant_in_residue(q, p)
    parts: list[tuple[Fraction, UPoly]] = []
    for c in sorted(_rational_roots(res_poly)):
        if c == 0:
            continue
        fac = q.gcd(p - dq * c)
        if fac.degree > 0:
            parts.append((c, fac.monic()))
    acc = RatFunc.zero()
    for c, fac in parts:
        acc = acc + RatFunc(fac.derivative(), fac) * RatFunc.from_fraction(c)
    if acc != remainder:
        raise NotSupported(
            "residues are not all rational; the witness needs algebraic constants"
        )
    return parts


def elementary_n_witness(g: RatFunc, n: int) -> TowerExpr:
    """An n-th antiderivative of g of the shape f_0 + sum P_j(x) log(q_j)
    with q_j monic squarefree and deg P_j <= n-1.

    Integration loop: integrate log terms by parts, Hermite-reduce the rational
    integrand, and split its squarefree remainder into rational log parts.
    """
    if n < 1:
        raise ValueError("n must be positive")
    rational = g
    logs: dict[UPoly, UPoly] = {}
    for _ in range(n):
        rho = rational
        new_logs: dict[UPoly, UPoly] = {}
        for q, pcoef in logs.items():
            big = pcoef.integral()
            new_logs[q] = big
            rho = rho - RatFunc(big * q.derivative(), q)
        h, rest = hermite_reduce(rho)
        polypart, proper = rest.split()
        rational = h + RatFunc(polypart.integral())
        if not proper.is_zero():
            for c, fac in rational_log_parts(proper):
                cur = new_logs.get(fac, UPoly.zero())
                new_logs[fac] = cur + UPoly((c,))
        logs = {q: p for q, p in new_logs.items() if not p.is_zero()}
    # Drop the kernel part (polynomial monomials of degree < n) for a canonical witness.
    polypart, proper = rational.split()
    trimmed = UPoly(tuple(Fraction(0) for _ in range(min(n, polypart.degree + 1)))
                    + polypart.coeffs[n:])
    rational = RatFunc(trimmed) + proper
    tower = Tower()
    eta = None
    for idx, q in enumerate(sorted(logs, key=lambda u: (u.degree, u.coeffs)), start=1):
        pcoef = logs[q]
        if pcoef.degree > n - 1:
            raise AssertionError("log coefficient degree exceeded n-1")
        gen = tower.add_log(f"L{idx}", RatFunc(q))
        term = gen * RatFunc(pcoef)
        eta = term if eta is None else eta + term
    base = tower.expr(rational)
    eta = base if eta is None else eta + base
    if not (eta.derive_n(n) - tower.expr(g)).is_zero():
        raise AssertionError("witness failed to differentiate back to the input")
    return eta


# -- tower classifiers -------------------------------------------------------


def _single_gen(g: TowerExpr, kind: str):
    gens = [gen for gen in g.tower.gens if gen.kind == kind]
    if len(gens) != 1:
        raise ValueError(f"expected exactly one {kind} generator, found {len(gens)}")
    return gens[0]


def _is_power_of_x(den: UPoly) -> bool:
    return all(c == 0 for c in den.coeffs[:-1])


def _laurent_x_monomials(f: RatFunc) -> list[tuple[Fraction, int]]:
    """Monomials (a, m) of f in C[x, 1/x]; requires den = x^a."""
    if not _is_power_of_x(f.den):
        raise ValueError(f"{f} is not Laurent in x")
    shift = f.den.degree
    return [(c, k - shift) for k, c in enumerate(f.num.coeffs) if c != 0]


def classify_exp(g: TowerExpr, depth: int | None = None) -> IntegrabilityVerdict:
    """Infinity-integrability in C(x, e^x): g must be sum f_i t^i, f_i in C[x].

    For a finite depth, a witness is produced by solving h' + i h = f in Q[x]
    per Laurent degree (unique) and integrating the i = 0 slice directly.
    """
    gen = _single_gen(g, "exp")
    try:
        coeffs = laurent_normal(g, gen.name)
    except NotPolynomialInTheta as exc:
        return IntegrabilityVerdict.not_integrable(reason=str(exc))
    slices: dict[int, RatFunc] = {}
    for i, ce in coeffs.items():
        f = ce.as_ratfunc()
        if f.den.degree != 0:
            return IntegrabilityVerdict.not_integrable(
                obstruction=f, reason=f"coefficient of degree {i} is not polynomial")
        slices[i] = f
    if depth is None:
        return IntegrabilityVerdict.integrable()
    tower = g.tower
    t = tower.gen_expr(gen.name)
    witness = tower.zero()
    for i, f in slices.items():
        p = f.num
        for _ in range(depth):
            p = p.integral() if i == 0 else _solve_exp_slice(p, i)
        witness = witness + t**i * RatFunc(p)
    return IntegrabilityVerdict.integrable(witness=witness)


def _solve_exp_slice(f: UPoly, i: int) -> UPoly:
    """Unique polynomial h with h' + i*h = f (i != 0)."""
    d = f.degree
    if d < 0:
        return UPoly.zero()
    h = [Fraction(0)] * (d + 1)
    for k in range(d, -1, -1):
        above = (k + 1) * h[k + 1] if k + 1 <= d else Fraction(0)
        h[k] = (f[k] - above) / i
    return UPoly(h)


def classify_log(g: TowerExpr, depth: int | None = None) -> IntegrabilityVerdict:
    """Infinity-integrability in C(x, log x): g must be sum f_i th^i with
    f_i in C[x, 1/x].  Witnesses integrate monomial-by-monomial by parts."""
    gen = _single_gen(g, "log")
    try:
        coeffs = laurent_normal(g, gen.name)
    except NotPolynomialInTheta as exc:
        return IntegrabilityVerdict.not_integrable(reason=str(exc))
    slices: dict[int, RatFunc] = {}
    for i, ce in coeffs.items():
        f = ce.as_ratfunc()
        if not _is_power_of_x(f.den):
            return IntegrabilityVerdict.not_integrable(
                obstruction=f, reason=f"coefficient of th^{i} is not Laurent in x")
        slices[i] = f
    if depth is None:
        return IntegrabilityVerdict.integrable()
    tower = g.tower
    th = tower.gen_expr(gen.name)
    witness = tower.zero()
    for i, f in slices.items():
        for a, m in _laurent_x_monomials(f):
            witness = witness + _int_log_monomial(a, m, i, tower, th, depth)
    return IntegrabilityVerdict.integrable(witness=witness)


def _int_log_monomial(a: Fraction, m: int, k: int, tower: Tower, th: TowerExpr,
                      depth: int) -> TowerExpr:
    """depth-fold antiderivative of a x^m th^k inside C[x,1/x][th]."""
    e = _x_pow(tower, m) * th**k * a
    for _ in range(depth):
        e = _int_log_once(e, tower, th)
    return e


def _int_log_once(e: TowerExpr, tower: Tower, th: TowerExpr) -> TowerExpr:
    gen = _single_gen(th, "log")
    out = tower.zero()
    for k, ce in laurent_normal(e, gen.name).items():
        f = ce.as_ratfunc()
        for a, m in _laurent_x_monomials(f):
            out = out + _int_one_log_monomial(a, m, k, tower, th)
    return out


def _int_one_log_monomial(a: Fraction, m: int, k: int, tower: Tower,
                          th: TowerExpr) -> TowerExpr:
    if m == -1:
        # int a th^k / x = a th^(k+1)/(k+1)
        return th ** (k + 1) * Fraction(a, k + 1)
    lead = _x_pow(tower, m + 1) * th**k * Fraction(a, m + 1)
    if k == 0:
        return lead
    tail = _int_one_log_monomial(Fraction(a * k, m + 1), m, k - 1, tower, th)
    return lead - tail


def _x_pow(tower: Tower, m: int) -> TowerExpr:
    x = RatFunc.x()
    return tower.expr(x**m if m >= 0 else RatFunc.one() / x ** (-m))


def classify_radical(g: TowerExpr, depth: int | None = None) -> IntegrabilityVerdict:
    """Infinity-integrability in C(x^(1/n)): g = sum_{i<n} f_i x^(i/n) with
    f_0 in C[x] and f_i in C[x, 1/x] for i >= 1."""
    gen = _single_gen(g, "radical")
    root = gen.root
    try:
        coeffs = laurent_normal(g, gen.name)
    except NotPolynomialInTheta as exc:
        return IntegrabilityVerdict.not_integrable(reason=str(exc))
    slices: dict[int, RatFunc] = {}
    for i, ce in coeffs.items():
        f = ce.as_ratfunc()
        if i == 0:
            if f.den.degree != 0:
                return IntegrabilityVerdict.not_integrable(
                    obstruction=f, reason="the x^(0/n) coefficient must be polynomial")
        elif not _is_power_of_x(f.den):
            return IntegrabilityVerdict.not_integrable(
                obstruction=f, reason=f"coefficient of x^({i}/{root}) is not Laurent in x")
        slices[i] = f
    if depth is None:
        return IntegrabilityVerdict.integrable()
    tower = g.tower
    th = tower.gen_expr(gen.name)
    witness = tower.zero()
    for i, f in slices.items():
        if i == 0:
            p = f.num
            for _ in range(depth):
                p = p.integral()
            witness = witness + tower.expr(RatFunc(p))
            continue
        for a, m in _laurent_x_monomials(f):
            cur_a, cur_m = a, m
            for _ in range(depth):
                step = cur_m + 1 + Fraction(i, root)
                cur_a, cur_m = cur_a / step, cur_m + 1
            witness = witness + _x_pow(tower, cur_m) * th**i * cur_a
    return IntegrabilityVerdict.integrable(witness=witness)
