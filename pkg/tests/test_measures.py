"""Jump measure families: closed-form oracles, quadrature agreement, sampling."""

import math

import numpy as np
import pytest

from hjmm.errors import DomainError
from hjmm.measures import (
    GammaLike,
    PointMasses,
    StableLike,
    UserDensity,
    compensated_exp,
    compensated_exp_array,
    measure_from_json,
)

ORACLE_TOL = 1e-10
QUAD_AGREEMENT_RTOL = 1e-8


def test_compensated_exp_matches_reference() -> None:
    # e^{-w} - 1 + w, checked against mpmath-free high-precision expansion
    assert compensated_exp(0.0) == 0.0
    w = 1.0
    assert abs(compensated_exp(w) - (math.exp(-1.0) - 1.0 + 1.0)) < 1e-15
    # series regime: w = 1e-6 gives w^2/2 - w^3/6 + w^4/24 to full precision
    w = 1e-6
    expected = w * w / 2.0 - w ** 3 / 6.0 + w ** 4 / 24.0
    assert abs(compensated_exp(w) - expected) < 1e-22


def test_compensated_exp_array_matches_scalar() -> None:
    w = np.array([0.0, 1e-8, 1e-5, 1e-3, 0.5, 3.0, 40.0])
    vec = compensated_exp_array(w)
    scalar = np.array([compensated_exp(float(v)) for v in w])
    np.testing.assert_allclose(vec, scalar, rtol=1e-14, atol=1e-300)


class TestPointMasses:
    def test_piece_derivatives_at_zero(self) -> None:
        # single atom of size 2, mass 1: J'(0) = -y*c = -2, J''(0) = y^2*c = 4
        nu = PointMasses([(2.0, 1.0)])
        assert abs(nu.piece_derivatives(0.0, 1) - (-2.0)) < ORACLE_TOL
        assert abs(nu.piece_derivatives(0.0, 2) - 4.0) < ORACLE_TOL

    def test_piece_values_single_atom(self) -> None:
        # atom y=2 with mass 3 sits in [1, inf): J3(z) = 3*(e^{-2z} - 1)
        nu = PointMasses([(2.0, 3.0)])
        z = 0.7
        j1, j2, j3 = nu.piece_values(z)
        assert j1 == 0.0 and j2 == 0.0
        assert abs(j3 - 3.0 * math.expm1(-2.0 * z)) < ORACLE_TOL

    def test_small_atom_lands_in_compensated_piece(self) -> None:
        nu = PointMasses([(0.25, 2.0)])
        z = 1.3
        j1, j2, j3 = nu.piece_values(z)
        assert j3 == 0.0
        expected = 2.0 * (math.exp(-z * 0.25) - 1.0 + z * 0.25)
        assert abs(j2 - expected) < ORACLE_TOL

    def test_squared_integral_and_moments(self) -> None:
        nu = PointMasses([(0.5, 1.0), (2.0, 3.0)])
        assert nu.squared_integral(1.0) == 0.25
        assert nu.squared_integral(3.0) == 0.25 + 12.0
        assert nu.first_moment(1.0, math.inf) == 6.0
        assert nu.second_moment() == 12.25
        assert nu.total_mass() == 4.0

    def test_exact_sampling_counts(self) -> None:
        nu = PointMasses([(0.5, 1.0), (2.0, 3.0)])
        rng = np.random.default_rng(7)
        draws = nu.sample_sizes(rng, 1000, 0.0)
        assert set(np.unique(draws)) <= {0.5, 2.0}
        frac_large = np.mean(draws == 2.0)
        # mass ratio 3/4 with binomial noise ~ 0.014
        assert abs(frac_large - 0.75) < 0.05

    def test_rejects_zero_size_atom(self) -> None:
        with pytest.raises(DomainError):
            PointMasses([(0.0, 1.0)])


class TestStableLike:
    def test_truncated_second_moment_oracle(self) -> None:
        # U(x) = c * x^{2-alpha} / (2-alpha); c=1, alpha=1.5, x=0.25
        nu = StableLike(c=1.0, alpha=1.5, y_max=1.0)
        expected = 0.25 ** 0.5 / 0.5
        assert abs(nu.squared_integral(0.25) - expected) < ORACLE_TOL
        assert abs(nu.squared_integral(5.0) - nu.squared_integral(1.0)) == 0.0

    def test_infinite_small_jump_mean_for_alpha_ge_one(self) -> None:
        nu = StableLike(c=1.0, alpha=1.5, y_max=1.0)
        assert nu.first_moment(0.0, 1.0) == math.inf
        assert math.isfinite(nu.first_moment(0.1, 1.0))

    def test_tail_mass_oracle(self) -> None:
        nu = StableLike(c=2.0, alpha=0.5, y_max=1.0)
        y = 0.04
        expected = 2.0 * (y ** -0.5 - 1.0) / 0.5
        assert abs(nu.tail_mass(y) - expected) < 1e-9

    def test_fast_derivative_part_matches_quadrature(self) -> None:
        nu = StableLike(c=0.8, alpha=1.3, y_max=2.0)
        for z in (0.0, 1e-6, 0.03, 1.0, 7.5, 40.0):
            for order in (1, 2):
                fast = float(nu.derivative_measure_part(np.array(z), order))
                slow = nu.piece_derivatives(z, order)
                scale = max(abs(slow), 1e-12)
                assert abs(fast - slow) / scale < QUAD_AGREEMENT_RTOL, (
                    f"z={z} order={order}: {fast} vs {slow}")

    def test_alpha_one_log_branch_matches_quadrature(self) -> None:
        nu = StableLike(c=1.0, alpha=1.0, y_max=1.0)
        for z in (0.01, 0.5, 3.0):
            fast = float(nu.derivative_measure_part(np.array(z), 1))
            slow = nu.piece_derivatives(z, 1)
            assert abs(fast - slow) / max(abs(slow), 1e-12) < QUAD_AGREEMENT_RTOL

    def test_inverse_tail_sampling_distribution(self) -> None:
        nu = StableLike(c=1.0, alpha=1.5, y_max=1.0)
        rng = np.random.default_rng(11)
        eps = 0.01
        draws = nu.sample_sizes(rng, 20000, eps)
        assert draws.min() >= eps and draws.max() <= 1.0
        # P(Y > y) = (y^-a - ymax^-a) / (eps^-a - ymax^-a); check the median
        total = eps ** -1.5 - 1.0
        median = ((eps ** -1.5 + 1.0) / 2.0) ** (-1.0 / 1.5)
        frac = np.mean(draws > median)
        assert abs(frac - 0.5) < 0.02

    def test_parameter_validation(self) -> None:
        with pytest.raises(DomainError):
            StableLike(c=1.0, alpha=2.0, y_max=1.0)
        with pytest.raises(DomainError):
            StableLike(c=-1.0, alpha=1.0, y_max=1.0)


class TestGammaLike:
    def test_squared_integral_oracle(self) -> None:
        # int_0^1 y e^{-y} dy = 1 - 2/e for c=1, beta=1
        nu = GammaLike(c=1.0, beta=1.0)
        expected = 1.0 - 2.0 / math.e
        assert abs(nu.squared_integral(1.0) - expected) < ORACLE_TOL

    def test_second_moment_closed_form(self) -> None:
        nu = GammaLike(c=1.5, beta=2.0)
        assert abs(nu.second_moment() - 1.5 / 4.0) < ORACLE_TOL

    def test_first_moment_closed_form(self) -> None:
        nu = GammaLike(c=2.0, beta=0.5)
        expected = 2.0 * (math.exp(-0.5) - math.exp(-1.0)) / 0.5
        assert abs(nu.first_moment(1.0, 2.0) - expected) < ORACLE_TOL
        assert abs(nu.first_moment(0.0, math.inf) - 2.0 / 0.5) < ORACLE_TOL

    def test_fast_derivative_part_matches_quadrature(self) -> None:
        nu = GammaLike(c=0.5, beta=4.0)
        for z in (0.0, 1e-5, 0.2, 2.0, 25.0):
            for order in (1, 2):
                fast = float(nu.derivative_measure_part(np.array(z), order))
                slow = nu.piece_derivatives(z, order)
                scale = max(abs(slow), 1e-12)
                assert abs(fast - slow) / scale < QUAD_AGREEMENT_RTOL

    def test_bisection_sampler_matches_tail_law(self) -> None:
        nu = GammaLike(c=1.0, beta=1.0)
        rng = np.random.default_rng(23)
        eps = 0.05
        draws = nu.sample_sizes(rng, 5000, eps)
        assert draws.min() >= eps
        # P(Y > y | Y > eps) = E1(y) / E1(eps); probe at y = 0.5
        import scipy.special as sc

        p_half = sc.exp1(0.5) / sc.exp1(eps)
        assert abs(np.mean(draws > 0.5) - p_half) < 0.02


class TestUserDensity:
    def test_wraps_callable_density(self) -> None:
        nu = UserDensity(density_fn=lambda y: np.exp(-y), a4_certified=True,
                         second_moment_certified=True)
        # second moment of exp(-y) on (0, inf) is Gamma(3) = 2
        assert abs(nu.second_moment() - 2.0) < 1e-8
        assert abs(nu.squared_integral(math.inf) - 2.0) < 1e-8

    def test_derivative_part_falls_back_to_quadrature(self) -> None:
        nu = UserDensity(density_fn=lambda y: np.exp(-2.0 * y))
        z = np.array([0.5, 1.0])
        got = nu.derivative_measure_part(z, 1)
        expected = np.array([nu.piece_derivatives(0.5, 1),
                             nu.piece_derivatives(1.0, 1)])
        np.testing.assert_allclose(got, expected, rtol=1e-12)


def test_json_roundtrip_all_families() -> None:
    originals = [
        PointMasses([(0.5, 1.0), (2.0, 3.0)]),
        StableLike(c=1.0, alpha=1.5, y_max=2.0),
        GammaLike(c=0.5, beta=4.0),
    ]
    for nu in originals:
        doc = nu.to_json()
        back = measure_from_json(doc)
        assert type(back) is type(nu)
        assert back.to_json() == doc
