"""Series-engine tests: closed forms, transforms, certified sums."""

import math
from fractions import Fraction

import pytest

from convexlines.errors import DomainError, PrecisionError
from convexlines.series import (
    ASSEMBLY,
    LOGRATIO,
    MULTISET,
    SELECTION,
    CoeffSeries,
    EnsembleSpec,
    TailEnvelope,
    check_char_bound,
    dirichlet_sum,
    dirichlet_sum_spec,
    exp_series,
    gf_value,
    log_abs_gf,
    log_coeffs,
    log_series,
    logratio_fractions,
    logratio_log_coeffs,
    power_geometric_sum,
    uniform_spec,
    weight_coeffs,
    weight_tail_bound,
)

BUILTINS = [
    EnsembleSpec(MULTISET, 1.0, 1.0),
    EnsembleSpec(MULTISET, 2.0, 0.7),
    EnsembleSpec(SELECTION, 1.0, 1.0),
    EnsembleSpec(SELECTION, 3.0, 0.5),
    EnsembleSpec(ASSEMBLY, 1.0, 0.0),
    EnsembleSpec(ASSEMBLY, 1.5, 0.6),
    EnsembleSpec(LOGRATIO, 1.0, 1.0),
    EnsembleSpec(LOGRATIO, 2.0, 0.8),
]


class TestLogCoeffs:
    def test_multiset_closed_form(self):
        c = log_coeffs(EnsembleSpec(MULTISET, 1.0, 1.0), 5)
        assert c.log_coeff(3) == pytest.approx(1.0 / 3.0, abs=0.0)

    def test_assembly_degenerate(self):
        c = log_coeffs(EnsembleSpec(ASSEMBLY, 1.0, 0.0), 6)
        assert c.log_coeff(1) == 1.0
        assert all(c.log_coeff(k) == 0.0 for k in range(2, 7))

    def test_selection_r2_sign(self):
        c = log_coeffs(EnsembleSpec(SELECTION, 2.0, 1.0), 4)
        assert c.log_coeff(2) == pytest.approx(-1.0, abs=0.0)

    def test_first_log_equals_first_weight(self):
        for spec in BUILTINS:
            c1 = log_coeffs(spec, 1).log_coeff(1)
            w1 = weight_coeffs(spec, 1).weight_coeff(1)
            assert c1 == pytest.approx(w1, rel=1e-14), spec

    def test_parameter_validation(self):
        with pytest.raises(DomainError):
            EnsembleSpec(MULTISET, -1.0, 0.5)
        with pytest.raises(DomainError):
            EnsembleSpec(SELECTION, 1.5, 0.5)
        with pytest.raises(DomainError):
            EnsembleSpec(MULTISET, 1.0, 1.5)
        with pytest.raises(DomainError):
            EnsembleSpec(MULTISET, 1.0, 0.0)
        # assembly admits rho = 0
        EnsembleSpec(ASSEMBLY, 1.0, 0.0)


class TestLogratio:
    def test_exact_fractions(self):
        assert logratio_fractions(4) == (
            Fraction(1, 2),
            Fraction(5, 12),
            Fraction(3, 8),
            Fraction(251, 720),
        )

    def test_first_coefficient(self):
        c = logratio_log_coeffs(2.0, 1.0, 3)
        assert c.log_coeff(1) == pytest.approx(1.0, rel=1e-15)

    def test_bracketing_bounds(self):
        for r in (0.5, 1.0, 2.0):
            for rho in (0.3, 0.7, 1.0):
                c = logratio_log_coeffs(r, rho, 50)
                for k in range(1, 51):
                    lo = r * rho**k / (k * k * (k + 1))
                    hi = r * rho**k / (k + 1)
                    assert lo <= c.log_coeff(k) <= hi

    def test_float_continuation_brackets(self):
        c = logratio_log_coeffs(1.0, 1.0, 120)
        for k in range(100, 121):
            assert 1.0 / (k * k * (k + 1)) <= c.log_coeff(k) <= 1.0 / (k + 1)

    def test_weight_positivity(self):
        w = exp_series(logratio_log_coeffs(1.0, 1.0, 40), 40)
        assert all(w.weight_coeff(l) > 0.0 for l in range(41))


class TestExpLogTransforms:
    def test_exp_of_uniform_log(self):
        # multiset r=1, rho=1 has all weight coefficients equal to 1
        w = exp_series(log_coeffs(uniform_spec(), 30), 30)
        for l in range(31):
            assert w.weight_coeff(l) == pytest.approx(1.0, rel=1e-13)

    def test_assembly_weight2(self):
        for r, rho in ((1.0, 0.5), (2.0, 0.25)):
            w = exp_series(log_coeffs(EnsembleSpec(ASSEMBLY, r, rho), 4), 4)
            assert w.weight_coeff(2) == pytest.approx(0.5 * r * r + r * rho, rel=1e-13)

    def test_exp_of_zero(self):
        w = exp_series(CoeffSeries("log", (0.0, 0.0, 0.0)), 5)
        assert w.coeffs == (1.0, 0.0, 0.0, 0.0, 0.0, 0.0)

    def test_log_of_all_ones(self):
        b = CoeffSeries("weight", tuple([1.0] * 21))
        c = log_series(b, 20)
        for k in range(1, 21):
            assert c.log_coeff(k) == pytest.approx(1.0 / k, rel=1e-12)

    def test_log_of_selection_weights(self):
        # (1, 1, 0, 0, ...) -> ln(1+s) coefficients
        b = CoeffSeries("weight", (1.0, 1.0) + (0.0,) * 12)
        c = log_series(b, 12)
        for k in range(1, 13):
            assert c.log_coeff(k) == pytest.approx((-1.0) ** (k - 1) / k, rel=1e-12)

    def test_log_of_trivial(self):
        b = CoeffSeries("weight", (1.0, 0.0, 0.0, 0.0))
        c = log_series(b, 3)
        assert c.coeffs == (0.0, 0.0, 0.0)

    def test_round_trip_default_families(self):
        # the four default ensembles carry enough mantissa at every k <= 50
        # for a strict relative comparison
        defaults = [
            uniform_spec(),
            EnsembleSpec(SELECTION, 1.0, 1.0),
            EnsembleSpec(ASSEMBLY, 1.0, 0.0),
            EnsembleSpec(LOGRATIO, 1.0, 1.0),
        ]
        for spec in defaults:
            a = log_coeffs(spec, 50)
            back = log_series(exp_series(a, 50), 50)
            for k in range(1, 51):
                ref = a.log_coeff(k)
                got = back.log_coeff(k)
                if ref == 0.0:
                    assert abs(got) < 1e-15
                else:
                    assert abs(got - ref) <= 1e-12 * abs(ref), (spec, k)

    def test_round_trip_off_default_parameters(self):
        # with rho < 1 the log-coefficients decay below the float64
        # information floor of the weight scale, so allow a small absolute
        # slack on top of the relative criterion
        for spec in BUILTINS:
            a = log_coeffs(spec, 50)
            back = log_series(exp_series(a, 50), 50)
            for k in range(1, 51):
                ref = a.log_coeff(k)
                got = back.log_coeff(k)
                assert abs(got - ref) <= max(1e-12 * abs(ref), 2e-15), (spec, k)

    def test_log_series_requires_unit_head(self):
        with pytest.raises(DomainError):
            CoeffSeries("weight", (2.0, 1.0))


class TestGfValue:
    def test_multiset_point(self):
        assert gf_value(EnsembleSpec(MULTISET, 2.0, 1.0), 0.5) == pytest.approx(4.0)

    def test_selection_point(self):
        assert gf_value(EnsembleSpec(SELECTION, 3.0, 1.0), 0.5) == pytest.approx(3.375)

    def test_at_zero(self):
        for spec in BUILTINS:
            assert gf_value(spec, 0.0) == 1.0

    def test_domain(self):
        with pytest.raises(DomainError):
            gf_value(uniform_spec(), 1.0)
        with pytest.raises(DomainError):
            gf_value(uniform_spec(), -0.1)

    def test_series_consistency_certified(self):
        # closed form vs truncated weight series, certified tail, s <= 0.9
        for spec in BUILTINS:
            w = weight_coeffs(spec, 200)
            for s in (0.3, 0.6, 0.9):
                partial = 1.0 + math.fsum(
                    w.weight_coeff(l) * s**l for l in range(1, 201)
                )
                tail = weight_tail_bound(spec, 200, s)
                assert abs(gf_value(spec, s) - partial) <= tail + 1e-9, (spec, s)


class TestDirichletSums:
    def test_uniform_sigma2_is_sum_of_inverse_cubes(self):
        # independent oracle: partial sums of 1/k^3 with integral tail bound
        n = 2000
        ref = math.fsum(1.0 / k**3 for k in range(1, n + 1)) + 1.0 / (2.0 * n * n)
        got = dirichlet_sum_spec(uniform_spec(), 2.0, 1e-10)
        assert got.value == pytest.approx(ref, abs=1e-8)
        assert got.value == pytest.approx(1.2020569031595943, abs=1e-9)

    def test_assembly_degenerate_value(self):
        got = dirichlet_sum_spec(EnsembleSpec(ASSEMBLY, 1.0, 0.0), 2.0, 1e-14)
        assert got.value == 1.0
        assert got.tail_bound == 0.0

    def test_selection_alternating_value(self):
        # independent oracle: alternating partial sums with Leibniz remainder
        n = 100000
        ref = math.fsum((-1.0) ** (k - 1) / k**3 for k in range(1, n + 1))
        got = dirichlet_sum_spec(EnsembleSpec(SELECTION, 1.0, 1.0), 2.0, 1e-10)
        assert got.value == pytest.approx(ref, abs=1e-9)
        assert got.value == pytest.approx(0.9015426773696957, abs=1e-9)

    def test_tail_respected(self):
        a = log_coeffs(uniform_spec(), 8)
        with pytest.raises(PrecisionError):
            dirichlet_sum(a, 2.0, 1e-12)

    def test_custom_without_envelope_refuses(self):
        spec = EnsembleSpec("custom", custom_log=CoeffSeries("log", (1.0, 0.5)))
        with pytest.raises(PrecisionError):
            dirichlet_sum_spec(spec, 2.0, 1e-6)

    def test_custom_with_envelope(self):
        env = TailEnvelope(1.0, 0.5, 0.0)
        spec = EnsembleSpec(
            "custom",
            custom_log=CoeffSeries(
                "log", tuple(0.5**k for k in range(1, 61)), envelope=env
            ),
        )
        got = dirichlet_sum_spec(spec, 2.0, 1e-10)
        ref = math.fsum(0.5**k / k**2 for k in range(1, 200))
        assert got.value == pytest.approx(ref, abs=1e-10)


class TestCharBound:
    def test_multiset_holds_with_one(self):
        holds, margin = check_char_bound(uniform_spec(), 1.0)
        assert holds and margin >= 0.0

    def test_assembly_and_logratio_hold(self):
        assert check_char_bound(EnsembleSpec(ASSEMBLY, 1.0, 0.0), 1.0)[0]
        assert check_char_bound(EnsembleSpec(LOGRATIO, 1.0, 1.0), 1.0)[0]

    def test_selection_holds_with_squared_reciprocal(self):
        rho = 1.0
        holds, margin = check_char_bound(
            EnsembleSpec(SELECTION, 1.0, rho), (1.0 + rho) ** -2
        )
        assert holds and margin >= 0.0

    def test_t_zero_margin_vanishes(self):
        _, margin = check_char_bound(uniform_spec(), 1.0, (0.5,), (0.0,))
        assert margin == pytest.approx(0.0, abs=1e-14)

    def test_grid_is_a_falsifier(self):
        # an absurdly large constant must fail on the default grids
        holds, margin = check_char_bound(uniform_spec(), 50.0)
        assert not holds and margin < 0.0


class TestPowerGeometricSum:
    @pytest.mark.parametrize("p", [0, 1, 2, 3, 5, 8])
    @pytest.mark.parametrize("u", [0.1, 0.5, 0.9])
    def test_against_brute_force(self, p, u):
        brute = math.fsum(j**p * u**j for j in range(1, 5000))
        assert power_geometric_sum(p, u) == pytest.approx(brute, rel=1e-12)

    def test_zero(self):
        assert power_geometric_sum(4, 0.0) == 0.0


class TestWireFormat:
    def test_round_trip(self):
        for spec in BUILTINS:
            assert EnsembleSpec.from_json(spec.to_json()) == spec

    def test_custom_round_trip(self):
        env = TailEnvelope(2.0, 0.5, 1.0)
        spec = EnsembleSpec(
            "custom",
            custom_log=CoeffSeries("log", (1.0, 0.25, 0.125), envelope=env),
        )
        back = EnsembleSpec.from_json(spec.to_json())
        assert back.custom_log.coeffs == spec.custom_log.coeffs
        assert back.custom_log.envelope == env
