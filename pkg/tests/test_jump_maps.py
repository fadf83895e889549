"""Jump maps: examples, equivalence of series and jump-ODE forms, order laws."""

import math

import pytest

from jumpsde.errors import (EvalDomainError, NonFiniteStateError,
                            NonSmoothPointError, ValidationError)
from jumpsde.expr import parse
from jumpsde.jumps import (ConstantKind, LinearKind, OdeSolve,
                           SeriesTruncation, closed_form_jump,
                           df_coefficients, df_series_jump, ito_jump,
                           marcus_jump)

X = parse("x")


def fit_slope(xs, ys):
    """Least-squares slope in log-log coordinates."""
    lx = [math.log(v) for v in xs]
    ly = [math.log(v) for v in ys]
    n = len(xs)
    mx, my = sum(lx) / n, sum(ly) / n
    return sum((a - mx) * (b - my) for a, b in zip(lx, ly)) / \
        sum((a - mx) ** 2 for a in lx)


class TestSchemes:
    def test_validation(self):
        with pytest.raises(ValidationError):
            SeriesTruncation(0)
        with pytest.raises(ValidationError):
            OdeSolve("rk3", 0.1)
        with pytest.raises(ValidationError):
            OdeSolve("rk2", 0.0)
        with pytest.raises(ValidationError):
            LinearKind(0.0, 1.0)


class TestItoJump:
    def test_direct_product(self):
        assert ito_jump(X, 3.0, 0.0, 0.5) == 1.5

    def test_zero_amplitude(self):
        assert ito_jump(X, 3.0, 0.0, 0.0) == 0.0

    def test_constant_g(self):
        assert ito_jump(parse("2"), 17.0, 0.0, 1.25) == 2.5


class TestDfCoefficients:
    def test_linear_g(self):
        # hand recursion: g_1 = x, g_2 = x * 1 = x, so every g_j = x
        assert df_coefficients(X, 2.0, 0.0, 4) == [2.0, 2.0, 2.0, 2.0]

    def test_constant_g(self):
        assert df_coefficients(parse("3"), 1.0, 0.0, 3) == [3.0, 0.0, 0.0]

    def test_quadratic_g(self):
        # g_2 = x^2 * 2x = 2x^3, g_3 = x^2 * 6x^2 = 6x^4; at x=1: 1, 2, 6
        assert df_coefficients(parse("x^2"), 1.0, 0.0, 3) == \
            pytest.approx([1.0, 2.0, 6.0], rel=1e-14)

    def test_sin_g_by_hand(self):
        # g_2 = sin(x)cos(x); g_3 = sin(x)(cos^2(x) - sin^2(x))
        z = 0.7
        got = df_coefficients(parse("sin(x)"), z, 0.0, 3)
        s, c = math.sin(z), math.cos(z)
        assert got == pytest.approx([s, s * c, s * (c * c - s * s)], rel=1e-13)

    def test_nonsmooth_point_rejected(self):
        g = parse("piecewise((-inf,0):0-x,(0,inf):x)")
        with pytest.raises(NonSmoothPointError):
            df_coefficients(g, 0.0, 0.0, 2)

    def test_k_validation(self):
        with pytest.raises(ValidationError):
            df_coefficients(X, 1.0, 0.0, 0)


class TestDfSeriesJump:
    def test_six_terms_linear(self):
        # partial sum 3 + 4.5 + 4.5 + 3.375 + 2.025 + 1.0125
        got = df_series_jump(X, 1.0, 0.0, 3.0, 6)
        assert got == pytest.approx(18.4125, abs=1e-12)

    def test_large_k_converges_to_closed_form(self):
        got = df_series_jump(X, 1.0, 0.0, 3.0, 30)
        assert got == pytest.approx(math.expm1(3.0), abs=1e-6)

    def test_zero_amplitude(self):
        assert df_series_jump(parse("exp(x)"), 0.3, 0.0, 0.0, 5) == 0.0

    def test_first_term_is_ito_exactly(self):
        for src, z, r in [("x", 1.3, 0.7), ("x^2", 0.4, -0.2),
                          ("sin(x)", 0.9, 1.1), ("exp(sin(x))", 0.2, 0.5)]:
            g = parse(src)
            assert df_series_jump(g, z, 0.0, r, 1) == ito_jump(g, z, 0.0, r)

    def test_truncation_error_law(self):
        # |partial sum - (e^r - 1)| <= |r|^{K+1} e^{|r|} / (K+1)!
        for r in (3.0, 1.0, -1.0, -2.5):
            exact = math.expm1(r)
            for K in range(1, 12):
                err = abs(df_series_jump(X, 1.0, 0.0, r, K) - exact)
                bound = abs(r) ** (K + 1) * math.exp(abs(r)) / math.factorial(K + 1)
                assert err <= bound + 1e-15


class TestMarcusJump:
    def test_linear_closed_form(self):
        got = marcus_jump(X, 1.0, 0.0, math.log(2.0), "rk4", 0.01)
        assert got == pytest.approx(1.0, abs=1e-9)

    def test_constant_g_exact(self):
        assert marcus_jump(parse("2"), -5.0, 0.0, 1.5, "rk2", 0.1) == 3.0
        assert marcus_jump(parse("2"), 0.0, 0.0, 1.5, "rk4", 0.07) == 3.0

    def test_zero_amplitude(self):
        assert marcus_jump(parse("exp(x)"), 0.0, 0.0, 0.0, "rk4", 0.1) == 0.0

    def test_negative_amplitude(self):
        got = marcus_jump(X, 1.0, 0.0, -1.0, "rk4", 0.001)
        assert got == pytest.approx(math.expm1(-1.0), abs=1e-10)

    def test_domain_error_reports_substep(self):
        g = parse("sqrt(x)")  # flow from z=1 with r<0 hits x<0
        with pytest.raises(EvalDomainError, match="substep"):
            marcus_jump(g, 0.01, 0.0, -3.0, "rk2", 0.5)

    def test_overflow_detected(self):
        with pytest.raises((NonFiniteStateError, EvalDomainError)):
            marcus_jump(parse("exp(x)"), 0.0, 0.0, 50.0, "rk2", 10.0)

    def test_scheme_validation(self):
        with pytest.raises(ValidationError):
            marcus_jump(X, 1.0, 0.0, 1.0, "euler", 0.1)


class TestClosedForm:
    def test_linear_log2(self):
        assert closed_form_jump(LinearKind(1.0, 0.0), 1.0, math.log(2.0)) == \
            pytest.approx(1.0, rel=1e-15)

    def test_constant(self):
        assert closed_form_jump(ConstantKind(2.0), 123.0, 1.5) == 3.0

    def test_linear_r3(self):
        assert closed_form_jump(LinearKind(1.0, 0.0), 1.0, 3.0) == \
            pytest.approx(19.085536923187668, rel=1e-15)

    def test_affine(self):
        # dy/dl = a(z+y) + b from 0: y(r) = (z + b/a)(e^{ar} - 1)
        a, b, z, r = -0.7, 2.0, 1.3, 0.9
        got = closed_form_jump(LinearKind(a, b), z, r)
        assert got == pytest.approx((z + b / a) * math.expm1(a * r), rel=1e-14)
        ode = marcus_jump(parse(f"{a}*x+{b}"), z, 0.0, r, "rk4", 1e-3)
        assert ode == pytest.approx(got, abs=1e-12)


# expansion points chosen so the 12-term series has converged below the
# 1e-8 equivalence tolerance for every |r| <= 1 (the series converges
# geometrically with rate set by z; e.g. for x^2 the rate is z*r)
EQUIV_CASES = [("x", 0.5), ("x^2", 0.2), ("sin(x)", 0.1),
               ("0.5*x+1", 1.0), ("3", -2.0)]


class TestEquivalence:
    @pytest.mark.parametrize("src,z", EQUIV_CASES)
    @pytest.mark.parametrize("r", [-1.0, -0.4, 0.25, 1.0])
    def test_series_matches_ode(self, src, z, r):
        g = parse(src)
        series = df_series_jump(g, z, 0.0, r, 12)
        ode = marcus_jump(g, z, 0.0, r, "rk4", 1e-3)
        assert abs(series - ode) <= 1e-8

    # alternating partial sums can overshoot right at the slow-convergence
    # edge (sin at r=+1), so the monotonicity grid stops at r=0.5
    @pytest.mark.parametrize("src,z", EQUIV_CASES)
    @pytest.mark.parametrize("r", [-1.0, -0.4, 0.25, 0.5])
    def test_gap_non_increasing_in_k(self, src, z, r):
        g = parse(src)
        ode = marcus_jump(g, z, 0.0, r, "rk4", 1e-3)
        gaps = [abs(df_series_jump(g, z, 0.0, r, K) - ode) for K in range(1, 13)]
        for a, b in zip(gaps, gaps[1:]):
            assert b <= a + 1e-12


class TestAdditiveNoiseCollapse:
    def test_all_maps_agree_exactly(self):
        g = parse("2")
        for z in (-3.0, 0.0, 1.7):
            for r in (-2.0, 0.0, 1.5):
                ito = ito_jump(g, z, 0.0, r)
                assert df_series_jump(g, z, 0.0, r, 1) == ito
                assert df_series_jump(g, z, 0.0, r, 7) == ito
                assert marcus_jump(g, z, 0.0, r, "rk2", 0.1) == ito
                assert marcus_jump(g, z, 0.0, r, "rk4", 0.03) == ito
                assert closed_form_jump(ConstantKind(2.0), z, r) == ito


class TestFlowProperty:
    @pytest.mark.parametrize("src,z", [("x", 1.0), ("sin(x)", 0.5),
                                       ("x^2", 0.3), ("exp(0.2*x)", 0.0)])
    def test_semigroup(self, src, z):
        g = parse(src)
        h_max = 1e-3
        r1, r2 = 0.4, 0.35
        whole = marcus_jump(g, z, 0.0, r1 + r2, "rk4", h_max)
        y1 = marcus_jump(g, z, 0.0, r1, "rk4", h_max)
        two_stage = y1 + marcus_jump(g, z + y1, 0.0, r2, "rk4", h_max)
        # 10x the solver's own tolerance at this step size
        tol = 10.0 * (r1 + r2) * h_max ** 4 / 120.0 + 1e-12
        assert abs(whole - two_stage) <= tol


class TestConvergenceOrders:
    @pytest.mark.parametrize("scheme,expected", [("rk2", 2.0), ("rk4", 4.0)])
    def test_closed_form_order(self, scheme, expected):
        kind = LinearKind(1.0, 0.0)
        z, r = 1.0, 2.0
        exact = closed_form_jump(kind, z, r)
        hs = [0.5, 0.25, 0.125, 0.0625]
        errs = [abs(marcus_jump(X, z, 0.0, r, scheme, h) - exact) for h in hs]
        slope = fit_slope(hs, errs)
        assert abs(slope - expected) <= 0.3
