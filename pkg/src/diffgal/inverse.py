"""Construction of equations with a prescribed unipotent differential Galois group.

Given a subgroup of U(n) by defining ideal and/or Lie-algebra basis, the
pipeline builds the strictly upper matrix A_u = sum a_i X_i, gauges it to
companion form via a cyclic vector, walks the fraction-field recursion for the
G_i, reduces them modulo the extended ideal to elements f_i of Q(x), and emits
the shape matrix and the monic scalar operator.  Every checkable consequence
is recorded in a verification report.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .diffop import (
    CompanionMatrix,
    FMatrix,
    SkewOp,
    build_Lf,
    gauge_transform,
    monicize,
    shape_matrix,
)
from .errors import (
    BadSpec,
    DegenerateRecursion,
    InconsistentSpec,
    NoCyclicVectorFound,
    NotReducedToBase,
    ZeroDenominator,
    ZeroEntry,
)
from .mpoly import (
    Derivation,
    MPoly,
    MRat,
    PolyRing,
    buchberger,
    eliminate,
    nilpotent_exp,
    normal_form,
    DEFAULT_BUDGET,
)
from .ratfield import RatFunc, hermite_reduce
from .tower import fundamental_T

DEFAULT_CYCLIC_BUDGET = 200

QMatrix = tuple[tuple[Fraction, ...], ...]


def zvar_names(n: int) -> tuple[str, ...]:
    return tuple(f"Z_{i}_{j}" for i in range(1, n + 1) for j in range(i + 1, n + 1))


def z_ring(n: int, coeff: str = "ratfunc", order: str = "degrevlex") -> PolyRing:
    """The coordinate ring F[Z_i_j | 1 <= i < j <= n]."""
    return PolyRing(zvar_names(n), coeff=coeff, order=order)


def _q_matrix(rows: Sequence[Sequence]) -> QMatrix:
    return tuple(tuple(Fraction(e) for e in row) for row in rows)


def _check_strictly_upper(m: QMatrix, n: int, what: str):
    if len(m) != n or any(len(r) != n for r in m):
        raise BadSpec(f"{what} must be {n}x{n}")
    for i in range(n):
        for j in range(i + 1):
            if m[i][j] != 0:
                raise BadSpec(f"{what} must be strictly upper triangular")


def _independent(mats: Sequence[QMatrix], n: int) -> bool:
    rows = [[m[i][j] for i in range(n) for j in range(i + 1, n)] for m in mats]
    return _rank(rows) == len(mats)


def _rank(rows: list[list[Fraction]]) -> int:
    rows = [r[:] for r in rows]
    rank = 0
    cols = len(rows[0]) if rows else 0
    for c in range(cols):
        piv = None
        for r in range(rank, len(rows)):
            if rows[r][c] != 0:
                piv = r
                break
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        pr = rows[rank]
        inv = Fraction(1) / pr[c]
        rows[rank] = [e * inv for e in pr]
        for r in range(len(rows)):
            if r != rank and rows[r][c] != 0:
                f = rows[r][c]
                rows[r] = [e - f * g for e, g in zip(rows[r], rows[rank])]
        rank += 1
    return rank


@dataclass
class GroupSpec:
    """A unipotent subgroup of U(n) with the data Algorithm-style pipelines need.

    Either `ideal_gens` (over Q in the Z_i_j) or `lie_basis` may be omitted;
    the missing one is derived.  `l` counts the leading basis elements whose
    images span the abelianization's Lie algebra; `a_choices` are the nonzero
    rational functions attached to them (defaults have simple poles at
    1, ..., l).
    """

    n: int
    ideal_gens: list[MPoly] | None = None
    lie_basis: list[QMatrix] | None = None
    l: int | None = None
    a_choices: list[RatFunc] | None = None

    def __post_init__(self):
        if self.n < 2:
            raise BadSpec("n must be at least 2")
        if self.ideal_gens is None and self.lie_basis is None:
            raise BadSpec("need ideal generators or a Lie-algebra basis")
        if self.lie_basis is not None:
            self.lie_basis = [_q_matrix(m) for m in self.lie_basis]
            for m in self.lie_basis:
                _check_strictly_upper(m, self.n, "Lie basis element")
            if not _independent(self.lie_basis, self.n):
                raise BadSpec("Lie basis elements are linearly dependent")

    def resolved(self, budget: int = DEFAULT_BUDGET) -> "GroupSpec":
        """Fill in whichever of ideal/Lie basis is missing."""
        ideal = self.ideal_gens
        basis = self.lie_basis
        if ideal is None:
            ideal = ideal_from_lie(basis, self.n, budget)
        if basis is None:
            basis = lie_from_ideal(ideal, self.n)
        if self.l is None:
            basis, l = abelianization_prefix(basis, self.n)
        else:
            l = self.l
        m = len(basis)
        max_dim = self.n * (self.n - 1) // 2
        if not 1 <= l <= m <= max_dim:
            raise BadSpec(f"need 1 <= l <= m <= {max_dim}, got l={l}, m={m}")
        a = self.a_choices if self.a_choices is not None else default_a_choices(l)
        a = [RatFunc.coerce(f) for f in a]
        if len(a) != l:
            raise BadSpec(f"need exactly l={l} rational functions, got {len(a)}")
        for i, f in enumerate(a):
            if f.is_zero():
                raise ZeroEntry(f"a_{i + 1} is zero")
        out = GroupSpec(self.n, list(ideal), list(basis), l, a)
        return out


def _flat(m: QMatrix, n: int) -> list[Fraction]:
    return [m[i][j] for i in range(n) for j in range(i + 1, n)]


def _bracket(a: QMatrix, b: QMatrix, n: int) -> QMatrix:
    def mul(p, q):
        return [[sum(p[i][k] * q[k][j] for k in range(n)) for j in range(n)] for i in range(n)]

    ab, ba = mul(a, b), mul(b, a)
    return tuple(tuple(ab[i][j] - ba[i][j] for j in range(n)) for i in range(n))


def abelianization_prefix(basis: Sequence[QMatrix], n: int) -> tuple[list[QMatrix], int]:
    """Reorder a Lie-algebra basis so its first l elements map to a basis of
    the abelianization, and return (reordered basis, l).

    The commutator subalgebra is spanned by the pairwise brackets of any
    spanning set, so independence modulo it is a rank computation.
    """
    basis = [_q_matrix(m) for m in basis]
    comm = []
    for i in range(len(basis)):
        for j in range(i + 1, len(basis)):
            br = _bracket(basis[i], basis[j], n)
            if any(any(e for e in row) for row in br):
                comm.append(_flat(br, n))
    chosen: list[QMatrix] = []
    rest: list[QMatrix] = []
    picked_rows: list[list[Fraction]] = []
    base_rank = _rank(comm) if comm else 0
    for mat in basis:
        trial = comm + picked_rows + [_flat(mat, n)]
        if _rank(trial) > base_rank + len(picked_rows):
            chosen.append(mat)
            picked_rows.append(_flat(mat, n))
        else:
            rest.append(mat)
    if not chosen:
        raise BadSpec("Lie algebra equals its commutator subalgebra; not unipotent data")
    return chosen + rest, len(chosen)


def default_a_choices(l: int) -> list[RatFunc]:
    """1/(x-1), ..., 1/(x-l): simple poles at distinct points, so nontrivial
    rational combinations are never derivatives."""
    if l < 1:
        raise BadSpec("l must be at least 1")
    x = RatFunc.x()
    return [RatFunc.one() / (x - k) for k in range(1, l + 1)]


def a_choices_independent(a: Sequence[RatFunc]) -> bool:
    """Sufficient Hermite-based check that the images in F/F' are independent:
    every a_i leaves a residual with nonzero squarefree denominator and the
    residual denominators are pairwise coprime."""
    residuals = []
    for f in a:
        _, rest = hermite_reduce(f)
        _, proper = rest.split()
        if proper.is_zero():
            return False
        residuals.append(proper)
    for i in range(len(residuals)):
        for j in range(i + 1, len(residuals)):
            if residuals[i].den.gcd(residuals[j].den).degree > 0:
                return False
    return True


def build_Au(spec: GroupSpec) -> FMatrix:
    """A_u = sum_{i<=l} a_i X_i over Q(x)."""
    spec = spec.resolved() if spec.a_choices is None or spec.lie_basis is None else spec
    n = spec.n
    rows = [[RatFunc.zero() for _ in range(n)] for _ in range(n)]
    for a, xmat in zip(spec.a_choices, spec.lie_basis):
        for i in range(n):
            for j in range(n):
                if xmat[i][j]:
                    rows[i][j] = rows[i][j] + a * xmat[i][j]
    m = FMatrix(rows)
    if not m.is_strictly_upper():
        raise BadSpec("A_u is not strictly upper triangular")
    return m


def generic_point(ring: PolyRing, n: int) -> list[list[MPoly]]:
    """The unipotent matrix Z of indeterminates (1s on the diagonal)."""
    names = list(ring.names)
    z = [[ring.zero() for _ in range(n)] for _ in range(n)]
    for i in range(n):
        z[i][i] = ring.one()
    for i in range(n):
        for j in range(i + 1, n):
            z[i][j] = ring.var(f"Z_{i + 1}_{j + 1}")
    assert len(names) == n * (n - 1) // 2
    return z


def derivation_from_Au(au: FMatrix, ring: PolyRing) -> Derivation:
    """Extend the derivation of Q(x) to F[Z] by Z' = A_u Z."""
    n = au.nrows
    z = generic_point(ring, n)
    images = {}
    for i in range(n):
        for j in range(i + 1, n):
            img = ring.zero()
            for k in range(n):
                a = au[i, k]
                if not a.is_zero() and not z[k][j].is_zero():
                    img = img + z[k][j].scale(a)
            images[f"Z_{i + 1}_{j + 1}"] = img
    return Derivation(ring, [images[name] for name in ring.names])


def cyclic_vector(au: FMatrix, budget: int = DEFAULT_CYCLIC_BUDGET
                  ) -> tuple[tuple[RatFunc, ...], FMatrix]:
    """Search for v with v, dv, ..., d^(n-1)v a basis; B holds their coordinates.

    The module action is d(e_i) = sum_j (A_u)_{i,j} e_j, so coordinate rows
    evolve by r -> r' + r A_u.  Deterministic low-degree candidates are tried
    in a fixed order.
    """
    n = au.nrows
    x = RatFunc.x()
    zero, one = RatFunc.zero(), RatFunc.one()

    def candidates():
        for i in range(n):
            yield tuple(one if k == i else zero for k in range(n))
        for i in range(n):
            for j in range(n):
                if i != j:
                    yield tuple(one if k == i else x if k == j else zero for k in range(n))
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    if len({i, j, k}) == 3:
                        yield tuple(
                            one if t == i else x if t == j else x * x if t == k else zero
                            for t in range(n)
                        )

    tried = 0
    for v in candidates():
        tried += 1
        if tried > budget:
            break
        rows = [v]
        for _ in range(n - 1):
            prev = rows[-1]
            nxt = [prev[j].derive() for j in range(n)]
            for j in range(n):
                acc = nxt[j]
                for i in range(n):
                    if not prev[i].is_zero() and not au[i, j].is_zero():
                        acc = acc + prev[i] * au[i, j]
                nxt[j] = acc
            rows.append(tuple(nxt))
        b = FMatrix(rows)
        if not b.det().is_zero():
            return v, b
    raise NoCyclicVectorFound(f"no cyclic vector among {tried} candidates")


def b0_matrix(y1: RatFunc, n: int) -> FMatrix:
    """Lower-triangular matrix with (i,j) entry C(i-1,j-1) (1/Y1)^(i-j);
    carries Wr(Y1, ...) to Wr(1, Y2/Y1, ...)."""
    y1 = RatFunc.coerce(y1)
    if y1.is_zero():
        raise ZeroEntry("Y1 must be nonzero")
    inv = RatFunc.one() / y1
    derivs = [inv]
    for _ in range(n - 1):
        derivs.append(derivs[-1].derive())
    from math import comb

    rows = []
    for i in range(1, n + 1):
        row = []
        for j in range(1, n + 1):
            if j > i:
                row.append(RatFunc.zero())
            else:
                row.append(derivs[i - j] * comb(i - 1, j - 1))
        rows.append(row)
    return FMatrix(rows)


def g_recursion(ws: Sequence[MRat], deriv: Derivation) -> list[MRat]:
    """The fraction-field recursion G_n = 1/w_2', G_{n-1} = 1/(G_n w_3')', ...

    `ws` lists w_2, ..., w_n; the result lists G_n, ..., G_2 in that order.
    """
    n = len(ws) + 1
    gs: dict[int, MRat] = {}
    out: list[MRat] = []
    for j in range(2, n + 1):
        u = ws[j - 2].derive(deriv)
        for i in range(n, n - j + 2, -1):
            u = (gs[i] * u).derive(deriv)
        if u.is_zero():
            raise DegenerateRecursion(f"denominator of G_{n - j + 2} vanished")
        g = u.inverse()
        gs[n - j + 2] = g
        out.append(g)
    return out


def reduce_to_F(g: MRat, gb: Sequence[MPoly]) -> RatFunc:
    """Normal forms of numerator and denominator modulo the ideal, then the
    ratio in Q(x).  Both normal forms must be free of the Z variables."""
    nf_num = normal_form(g.num, gb) if gb else g.num
    nf_den = normal_form(g.den, gb) if gb else g.den
    if not nf_num.is_constant() or not nf_den.is_constant():
        raise NotReducedToBase(
            f"normal form retains ring variables: ({nf_num})/({nf_den})"
        )
    den = nf_den.constant_coeff()
    if den.is_zero():
        raise ZeroDenominator("denominator lies in the ideal")
    return nf_num.constant_coeff() / den


@dataclass
class VerificationReport:
    """Checkable consequences of a pipeline run."""

    companion_shape: bool = False
    base_field_coefficients: bool = False
    annihilation_mod_ideal: bool = False
    fundamental_identity: bool = False
    differential_ideal: bool = False
    a_independence_verified: bool = False  # informational, not gating

    def all_green(self) -> bool:
        return (
            self.companion_shape
            and self.base_field_coefficients
            and self.annihilation_mod_ideal
            and self.fundamental_identity
            and self.differential_ideal
        )

    def as_dict(self) -> dict:
        return {
            "companion_shape": self.companion_shape,
            "base_field_coefficients": self.base_field_coefficients,
            "annihilation_mod_ideal": self.annihilation_mod_ideal,
            "fundamental_identity": self.fundamental_identity,
            "differential_ideal": self.differential_ideal,
            "a_independence_verified": self.a_independence_verified,
        }


@dataclass
class PipelineResult:
    """Everything the construction produces, plus its verification report."""

    spec: GroupSpec
    A_u: FMatrix
    B: FMatrix
    A_c: CompanionMatrix
    f_tuple: tuple[RatFunc, ...]  # (f_1, ..., f_n), monic convention
    A: FMatrix
    L: SkewOp
    certificate: VerificationReport
    groebner_basis: list[MPoly] = field(default_factory=list)

    @property
    def f_partial(self) -> tuple[RatFunc, ...]:
        return self.f_tuple[1:]


def run_pipeline(spec: GroupSpec, groebner_budget: int = DEFAULT_BUDGET,
                 cyclic_budget: int = DEFAULT_CYCLIC_BUDGET) -> PipelineResult:
    """Full construction: A_u, cyclic vector, Wronskian normalization,
    G recursion, reduction to Q(x), shape matrix and monic operator."""
    spec = spec.resolved(groebner_budget)
    n = spec.n
    au = build_Au(spec)

    ring = z_ring(n)
    rational_ring = z_ring(n, coeff="rational")
    gb = buchberger(_ground(spec.ideal_gens, ring), ring, groebner_budget)
    deriv = derivation_from_Au(au, ring)

    v, b = cyclic_vector(au, cyclic_budget)
    a_c_matrix = gauge_transform(au, b)
    companion = CompanionMatrix.from_matrix(a_c_matrix)
    report = VerificationReport()
    report.companion_shape = companion is not None
    if companion is None:
        raise InconsistentSpec("gauge transform did not produce a companion matrix")

    # W = B0 B Z, a Wronskian with first row (1, w_2, ..., w_n).
    z = generic_point(ring, n)
    bz_first = [_row_times_z(b, z, j, ring) for j in range(n)]
    y1 = b[0, 0]
    b0 = b0_matrix(y1, n)
    y1_inv = RatFunc.one() / y1
    ws = [MRat(p.scale(y1_inv), ring.one()) for p in bz_first[1:]]

    gs = g_recursion(ws, deriv)
    fs_rev = [reduce_to_F(g, gb) for g in gs]  # f_n, ..., f_2
    f_partial = tuple(reversed(fs_rev))  # f_2, ..., f_n
    for i, f in enumerate(f_partial):
        if f.is_zero():
            raise ZeroEntry(f"f_{i + 2} reduced to zero")
    report.base_field_coefficients = True

    f_tuple = monicize(f_partial)
    op = build_Lf(f_tuple)
    a_matrix = shape_matrix(f_partial)

    report.annihilation_mod_ideal = _check_annihilation(ws, f_partial, deriv, gb)
    report.fundamental_identity = _check_fundamental(a_matrix, f_partial)
    report.differential_ideal = all(
        normal_form(deriv.derive(g), gb).is_zero() for g in gb
    )
    report.a_independence_verified = a_choices_independent(spec.a_choices)

    return PipelineResult(
        spec=spec,
        A_u=au,
        B=b,
        A_c=companion,
        f_tuple=f_tuple,
        A=a_matrix,
        L=op,
        certificate=report,
        groebner_basis=gb,
    )


def _ground(gens: Sequence[MPoly], ring: PolyRing) -> list[MPoly]:
    """Move ideal generators (over Q or Q(x)) into the pipeline's ring."""
    out = []
    for g in gens:
        if g.ring == ring:
            out.append(g)
            continue
        if g.ring.names != ring.names:
            raise BadSpec("ideal generators use unexpected variables")
        out.append(MPoly(ring, {m: ring.scalar(c) for m, c in g.terms.items()}))
    return out


def _row_times_z(b: FMatrix, z: list[list[MPoly]], j: int, ring: PolyRing) -> MPoly:
    """(B Z)_{1, j+1} as a polynomial in the Z variables."""
    acc = ring.zero()
    for i in range(b.ncols):
        e = b[0, i]
        if not e.is_zero() and not z[i][j].is_zero():
            acc = acc + z[i][j].scale(e)
    return acc


def _check_annihilation(ws: Sequence[MRat], f_partial: Sequence[RatFunc],
                        deriv: Derivation, gb: Sequence[MPoly]) -> bool:
    """(f_2 (f_3 (... (f_n w_j')...)')')' lies in the extended ideal for all j."""
    n = len(f_partial) + 1
    for w in ws:
        u = w.derive(deriv)
        for i in range(n, 1, -1):
            u = (u * MRat.from_poly(u.ring.const(f_partial[i - 2]))).derive(deriv)
        num_nf = normal_form(u.num, gb) if gb else u.num
        den_nf = normal_form(u.den, gb) if gb else u.den
        if not num_nf.is_zero() or den_nf.is_zero():
            return False
    return True


def _check_fundamental(a_matrix: FMatrix, f_partial: Sequence[RatFunc]) -> bool:
    """T' = A T entrywise for the tower-built fundamental matrix."""
    t = fundamental_T(f_partial)
    n = len(t)
    zero = t[0][0].tower.zero()
    for i in range(n):
        for j in range(n):
            rhs = zero
            for k in range(n):
                c = a_matrix[i, k]
                if not c.is_zero():
                    rhs = rhs + t[k][j] * c
            if not (t[i][j].derive() - rhs).is_zero():
                return False
    return True


def ideal_from_lie(lie_basis: Sequence[QMatrix], n: int,
                   budget: int = DEFAULT_BUDGET) -> list[MPoly]:
    """Vanishing ideal of exp(span X_1..X_m) via elimination.

    Works in Q[x_1..x_m, Z_i_j]: relate Z to the entries of
    exp(x_1 X_1 + ... + x_m X_m) and eliminate the parameters.
    """
    basis = [_q_matrix(m) for m in lie_basis]
    for m in basis:
        _check_strictly_upper(m, n, "Lie basis element")
    mcount = len(basis)
    params = tuple(f"x_{t + 1}" for t in range(mcount))
    ring = PolyRing(params + zvar_names(n), coeff="rational", order="lex")
    xs = [ring.var(p) for p in params]
    xsum = [[ring.zero() for _ in range(n)] for _ in range(n)]
    for t, mat in enumerate(basis):
        for i in range(n):
            for j in range(i + 1, n):
                if mat[i][j]:
                    xsum[i][j] = xsum[i][j] + xs[t].scale(mat[i][j])
    expm = nilpotent_exp(xsum)
    rels = []
    for i in range(n):
        for j in range(i + 1, n):
            rels.append(ring.var(f"Z_{i + 1}_{j + 1}") - expm[i][j])
    out = eliminate(rels, params, budget)
    target = z_ring(n, coeff="rational")
    return _reground_rational(out, target)


def _reground_rational(gens: Sequence[MPoly], ring: PolyRing) -> list[MPoly]:
    out = []
    for g in gens:
        if g.ring.names != ring.names:
            raise InconsistentSpec("unexpected variables after elimination")
        out.append(MPoly(ring, dict(g.terms)))
    return out


def lie_from_ideal(ideal_gens: Sequence[MPoly], n: int) -> list[QMatrix]:
    """Tangent space at the identity: solve the linearized generators.

    The identity is Z = 0 in these coordinates; generators must vanish there.
    """
    names = zvar_names(n)
    m = len(names)
    rows = []
    for g in ideal_gens:
        if g.ring.names != names:
            raise BadSpec("ideal generators use unexpected variables")
        const = g.constant_coeff()
        if const:
            raise BadSpec("ideal generator does not vanish at the identity")
        row = [Fraction(0)] * m
        nontrivial = False
        for mono, c in g.terms.items():
            if sum(mono) == 1:
                row[mono.index(1)] = Fraction(c)
                nontrivial = True
        if nontrivial:
            rows.append(row)
    basis_vecs = _nullspace(rows, m)
    out = []
    for vec in basis_vecs:
        mat = [[Fraction(0)] * n for _ in range(n)]
        for idx, name in enumerate(names):
            _, i, j = name.split("_")
            mat[int(i) - 1][int(j) - 1] = vec[idx]
        out.append(tuple(tuple(r) for r in mat))
    return out


def _nullspace(rows: list[list[Fraction]], m: int) -> list[list[Fraction]]:
    if not rows:
        rows = [[Fraction(0)] * m]
    a = [r[:] for r in rows]
    pivots: list[int] = []
    r = 0
    for c in range(m):
        piv = None
        for rr in range(r, len(a)):
            if a[rr][c] != 0:
                piv = rr
                break
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = Fraction(1) / a[r][c]
        a[r] = [e * inv for e in a[r]]
        for rr in range(len(a)):
            if rr != r and a[rr][c] != 0:
                f = a[rr][c]
                a[rr] = [e - f * g for e, g in zip(a[rr], a[r])]
        pivots.append(c)
        r += 1
    free = [c for c in range(m) if c not in pivots]
    out = []
    for fc in free:
        vec = [Fraction(0)] * m
        vec[fc] = Fraction(1)
        for ri, pc in enumerate(pivots):
            vec[pc] = -a[ri][fc]
        out.append(vec)
    return out


def lie_ideal_roundtrip_consistent(spec: GroupSpec, budget: int = DEFAULT_BUDGET) -> bool:
    """Check ideal_from_lie and lie_from_ideal agree on a resolved spec."""
    spec = spec.resolved(budget)
    ideal2 = ideal_from_lie(spec.lie_basis, spec.n, budget)
    ring = z_ring(spec.n, coeff="rational")
    gb1 = buchberger(spec.ideal_gens, ring, budget)
    gb2 = buchberger(ideal2, ring, budget)
    if [str(g) for g in gb1] != [str(g) for g in gb2]:
        return False
    lie2 = lie_from_ideal(spec.ideal_gens, spec.n)
    span1 = [[m[i][j] for i in range(spec.n) for j in range(i + 1, spec.n)]
             for m in spec.lie_basis]
    span2 = [[m[i][j] for i in range(spec.n) for j in range(i + 1, spec.n)]
             for m in lie2]
    if len(span1) != len(span2):
        return False
    return _rank(span1 + span2) == _rank(span1)
