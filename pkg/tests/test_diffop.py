"""Skew ring Q(x)[D], matrices over Q(x), companion forms, factor recursion."""

from fractions import Fraction

import pytest

from conftest import rand_ratfunc, rand_small_entry
from diffgal.diffop import (
    CompanionMatrix,
    FMatrix,
    SkewOp,
    build_Lf,
    companion_of,
    factor_recursion,
    gauge_transform,
    monicize,
    operator_of,
    shape_matrix,
    skew_mul,
)
from diffgal.errors import DependentSolutions, NotMonic, SingularGauge, ZeroEntry
from diffgal.parsing import parse_ratfunc
from diffgal.ratfield import RatFunc
from diffgal.tower import Tower, apply_operator, nested_solutions

X = RatFunc.x()
D = SkewOp.D()


def c(f) -> SkewOp:
    return SkewOp.const(f)


class TestSkewMul:
    def test_defining_rule(self):
        assert D * c(X) == c(X) * D + 1

    def test_d_squared(self):
        assert D * D == SkewOp.D(2)

    def test_frozen_product(self):
        lhs = (c(X) * D + 1) * (D + c(1 / X))
        assert lhs == c(X) * SkewOp.D(2) + 2 * D

    def test_application_oracle(self):
        # apply both factored and expanded forms to x, x^2, x^3
        l1 = c(X) * D + 1
        l2 = D + c(1 / X)
        prod = l1 * l2
        for p in (X, X**2, X**3, 1 / (X + 1)):
            assert prod.apply_ratfunc(p) == l1.apply_ratfunc(l2.apply_ratfunc(p))

    def test_associativity_distributivity(self, rng):
        # quick version; the acceptance suite runs the full 500-triple corpus
        for _ in range(120):
            ops = []
            for _ in range(3):
                order = rng.randint(0, 3)
                ops.append(SkewOp([rand_ratfunc(rng, 3) for _ in range(order + 1)]))
            a, b, cc = ops
            assert (a * b) * cc == a * (b * cc)
            assert a * (b + cc) == a * b + a * cc

    def test_degree_additivity(self, rng):
        for _ in range(100):
            a = SkewOp([rand_ratfunc(rng, 2) for _ in range(rng.randint(1, 3))]
                       + [rand_ratfunc(rng, 2, nonzero=True)])
            b = SkewOp([rand_ratfunc(rng, 2) for _ in range(rng.randint(1, 3))]
                       + [rand_ratfunc(rng, 2, nonzero=True)])
            assert (a * b).order == a.order + b.order

    def test_application_compatibility_in_tower(self, rng):
        tower = Tower()
        th = tower.add_log("th", X)
        e = th * X + 1
        for _ in range(20):
            a = SkewOp([rand_ratfunc(rng, 2) for _ in range(rng.randint(1, 3))])
            b = SkewOp([rand_ratfunc(rng, 2) for _ in range(rng.randint(1, 3))])
            if a.is_zero() or b.is_zero():
                continue
            lhs = apply_operator(skew_mul(a, b), e)
            rhs = apply_operator(a, apply_operator(b, e))
            assert (lhs - rhs).is_zero()


class TestBuildLf:
    def test_trivial(self):
        assert build_Lf([1, 1]) == SkewOp.D(2)

    def test_footnote_reduction(self):
        for g in (X, X**2 - 1, 1 / (X + 3)):
            got = build_Lf([RatFunc.one(), 1 / g])
            want = c(1 / g) * SkewOp.D(2) + c((1 / g).derive()) * D
            assert got == want

    def test_golden_cubic(self):
        f3 = X
        f2 = -((X - 1) ** 2)
        got = build_Lf(monicize([f2, f3]))
        want = (SkewOp.D(3) + c(2 * (1 / X + 1 / (X - 1))) * SkewOp.D(2)
                + c(2 / (X * (X - 1))) * D)
        assert got == want

    def test_zero_entry(self):
        with pytest.raises(ZeroEntry):
            build_Lf([RatFunc.one(), RatFunc.zero()])


class TestMonicize:
    def test_golden(self):
        f = monicize([-((X - 1) ** 2), X])
        assert f[0] == -1 / (X * (X - 1) ** 2)

    def test_trivial(self):
        assert monicize([RatFunc.one()]) == (RatFunc.one(), RatFunc.one())
        f = monicize([RatFunc.from_int(2), RatFunc.from_int(3)])
        assert f[0] == RatFunc.from_fraction(Fraction(1, 6))

    def test_makes_monic(self, rng):
        for _ in range(50):
            rest = [rand_small_entry(rng) for _ in range(rng.randint(1, 3))]
            assert build_Lf(monicize(rest)).is_monic()


class TestShapeMatrix:
    def test_golden_example(self):
        f3 = X  # c1 = 0
        f2 = -((X - 1) ** 2)  # c2 = 1
        a = shape_matrix([f2, f3])
        assert a[0, 1] == 1 / X
        assert a[1, 2] == -1 / (X - 1) ** 2
        assert a.is_strictly_upper()

    def test_n2(self):
        a = shape_matrix([RatFunc.one()])
        assert a.rows == FMatrix([[0, 1], [0, 0]]).rows

    def test_n4_ordering(self):
        fs = [X - 2, X - 3, X - 4]  # f_2, f_3, f_4
        a = shape_matrix(fs)
        assert a[0, 1] == 1 / (X - 4)
        assert a[1, 2] == 1 / (X - 3)
        assert a[2, 3] == 1 / (X - 2)


class TestGauge:
    def test_identity_gauge(self):
        a = shape_matrix([X, X - 1])
        assert gauge_transform(a, FMatrix.identity(3)) == a

    def test_golden_gauge_is_companion(self):
        au = FMatrix([[0, 1 / X, 1 / (X - 1)], [0, 0, 0], [0, 0, 0]])
        b = FMatrix([
            [1, 0, 0],
            [0, 1 / X, 1 / (X - 1)],
            [0, -1 / X**2, -1 / (X - 1) ** 2],
        ])
        ac = gauge_transform(au, b)
        assert CompanionMatrix.from_matrix(ac) is not None

    def test_gauge_composition_inverse(self, rng):
        a = shape_matrix([X, X + 1])
        b = FMatrix([[1, X, 0], [0, 1, X**2], [0, 0, 1]])
        assert gauge_transform(gauge_transform(a, b), b.inverse()) == a

    def test_singular_gauge(self):
        a = shape_matrix([X])
        with pytest.raises(SingularGauge):
            gauge_transform(a, FMatrix([[1, 1], [1, 1]]))


class TestCompanion:
    def test_d2(self):
        comp = companion_of(SkewOp.D(2))
        assert comp.matrix() == FMatrix([[0, 1], [0, 0]])

    def test_golden_last_row(self):
        op = (SkewOp.D(3) + c(2 * (1 / X + 1 / (X - 1))) * SkewOp.D(2)
              + c(2 / (X * (X - 1))) * D)
        comp = companion_of(op, 3)
        last = comp.matrix().rows[-1]
        assert last[0] == RatFunc.zero()
        assert last[1] == -2 / (X * (X - 1))
        assert last[2] == -2 * (1 / X + 1 / (X - 1))

    def test_roundtrip_random(self, rng):
        for _ in range(50):
            order = rng.randint(1, 5)
            op = SkewOp([rand_ratfunc(rng, 3) for _ in range(order)] + [RatFunc.one()])
            assert operator_of(companion_of(op)) == op

    def test_not_monic(self):
        with pytest.raises(NotMonic):
            companion_of(c(X) * SkewOp.D(2))


class TestFactorRecursion:
    def test_log_case(self):
        tower = Tower()
        th = tower.add_log("th", X)  # th' = 1/x
        fs, f_next = factor_recursion([tower.one(), th])
        assert f_next == RatFunc.one()
        assert fs == (1 / X, X)
        op = build_Lf(fs) * c(f_next)
        assert apply_operator(op, th).is_zero()
        # matches the iterated-integral annihilator for f = 1/x, n = 1
        from diffgal.tower import annihilator_of_iterated_integral

        assert build_Lf(fs) == annihilator_of_iterated_integral(1 / X, 1)

    def test_reciprocal(self):
        tower = Tower()
        fs, f_next = factor_recursion([tower.expr(1 / X)])
        assert f_next == X

    def test_golden_tower(self):
        # Example: towers carrying th1' = 1/x, th2' = Z13-like derivative
        tower = Tower()
        th1 = tower.add_integral("g12", 1 / X)
        th2 = tower.add_integral("g13", 1 / (X - 1))
        fs, f_next = factor_recursion([tower.one(), th1, th2])
        assert f_next == RatFunc.one()
        assert fs[2] == X  # f_3 = x - c1 at c1 = 0
        assert fs[1] == -((X - 1) ** 2)  # f_2 = (x-c2)^2/(c1-c2) at (0,1)

    def test_dependent_solutions(self):
        tower = Tower()
        with pytest.raises(DependentSolutions):
            factor_recursion([tower.one(), tower.expr(RatFunc.from_int(5))])

    def test_recovers_random_tuples(self, rng):
        for _ in range(20):
            n = rng.randint(2, 3)
            rest = tuple(rand_small_entry(rng) for _ in range(n - 1))
            f_next = rand_small_entry(rng)
            fs = monicize(rest)
            vs = nested_solutions(fs, f_next)
            got, got_next = factor_recursion(vs)
            assert got_next == f_next
            assert got == fs


class TestFMatrix:
    def test_inverse_roundtrip(self, rng):
        for _ in range(20):
            m = FMatrix([[rand_ratfunc(rng, 2) for _ in range(3)] for _ in range(3)])
            if m.det().is_zero():
                continue
            assert m * m.inverse() == FMatrix.identity(3)

    def test_det_singular(self):
        m = FMatrix([[X, X], [X, X]])
        assert m.det().is_zero()
