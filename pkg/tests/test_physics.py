import math

import hypothesis.strategies as st
import numpy as np
import pytest
from hypothesis import given, settings
from scipy import integrate
from scipy.special import erfc

from molcomm.errors import DomainError, InvalidEnvironmentError
from molcomm.physics import (
    BOLTZMANN_CONSTANT,
    ChannelGeometry,
    FluidEnvironment,
    SizeRegime,
    diffusion_coefficient,
    first_hit_cdf,
    first_hit_pdf,
    slot_hit_probability,
    window_hit_probability,
)

distances = st.floats(min_value=1e-6, max_value=1e-4)
coefficients = st.floats(min_value=1e-7, max_value=30.0)
times = st.floats(min_value=0.0, max_value=1e-2)
factors = st.floats(min_value=1.0, max_value=100.0)


class TestDiffusionCoefficient:
    def test_much_larger_unit_fluid(self):
        env = FluidEnvironment(
            temperature=1.0,
            viscosity=1.0,
            stokes_radius=1.0,
            size_regime=SizeRegime.MUCH_LARGER,
        )
        assert diffusion_coefficient(env) == pytest.approx(BOLTZMANN_CONSTANT / 6.0, rel=1e-15)
        assert diffusion_coefficient(env) == pytest.approx(2.3011e-24, rel=1e-4)

    def test_explicit_override_wins(self):
        env = FluidEnvironment(temperature=1.0, explicit_diffusion_coefficient=13.0)
        assert diffusion_coefficient(env) == 13.0

    def test_regime_ratio(self):
        comparable = FluidEnvironment(size_regime=SizeRegime.COMPARABLE)
        larger = FluidEnvironment(size_regime=SizeRegime.MUCH_LARGER)
        ratio = diffusion_coefficient(comparable) / diffusion_coefficient(larger)
        assert ratio == pytest.approx(1.5, rel=1e-14)

    @pytest.mark.parametrize("field", ["temperature", "viscosity", "stokes_radius"])
    def test_nonpositive_fields_rejected(self, field):
        with pytest.raises(InvalidEnvironmentError):
            FluidEnvironment(**{field: 0.0})

    def test_nonpositive_override_rejected(self):
        with pytest.raises(InvalidEnvironmentError):
            FluidEnvironment(explicit_diffusion_coefficient=-1.0)


class TestChannelGeometry:
    def test_zero_slot_rejected(self):
        with pytest.raises(InvalidEnvironmentError, match="slot_duration must be positive"):
            ChannelGeometry(slot_duration=0.0)

    def test_negative_offset_rejected(self):
        with pytest.raises(InvalidEnvironmentError):
            ChannelGeometry(transmit_offset=-1e-6)

    def test_absolute_window_shifts_with_slot(self):
        geom = ChannelGeometry(slot_duration=20e-6, transmit_offset=2e-6, slot_index=3)
        start, end = geom.absolute_window
        assert start == pytest.approx(62e-6)
        assert end == pytest.approx(82e-6)
        assert geom.window == (2e-6, 22e-6)


class TestFirstHitPdf:
    def test_zero_at_origin(self):
        assert first_hit_pdf(1.0, 1.0, 0.0) == 0.0

    def test_reference_value(self):
        assert first_hit_pdf(1.0, 0.25, 1.0) == pytest.approx(math.exp(-1.0) / math.sqrt(math.pi))
        assert first_hit_pdf(1.0, 0.25, 1.0) == pytest.approx(0.20755, abs=1e-5)

    def test_integrates_to_one(self):
        r, D = 1.0, 1.0
        head, _ = integrate.quad(lambda t: first_hit_pdf(r, D, t), 0.0, 1.0, limit=200)
        tail, _ = integrate.quad(lambda t: first_hit_pdf(r, D, t), 1.0, np.inf, limit=200)
        assert head + tail == pytest.approx(1.0, abs=1e-8)

    def test_vectorized(self):
        t = np.array([0.0, 0.5, 1.0])
        values = first_hit_pdf(1.0, 1.0, t)
        assert values.shape == (3,)
        assert values[0] == 0.0
        assert values[2] == pytest.approx(first_hit_pdf(1.0, 1.0, 1.0))

    @pytest.mark.parametrize("r, D", [(0.0, 1.0), (-1.0, 1.0), (1.0, 0.0), (1.0, -2.0)])
    def test_domain_errors(self, r, D):
        with pytest.raises(DomainError):
            first_hit_pdf(r, D, 1.0)
        with pytest.raises(DomainError):
            first_hit_cdf(r, D, 1.0)

    def test_negative_time_rejected(self):
        with pytest.raises(DomainError):
            first_hit_pdf(1.0, 1.0, -1.0)


class TestFirstHitCdf:
    def test_zero_at_origin(self):
        assert first_hit_cdf(1.0, 1.0, 0.0) == 0.0

    def test_unit_argument(self):
        # r / sqrt(4 D t) = 1
        assert first_hit_cdf(1.0, 1.0, 0.25) == pytest.approx(0.157299, abs=1e-6)
        assert first_hit_cdf(1.0, 1.0, 0.25) == pytest.approx(erfc(1.0), rel=1e-15)

    def test_long_time_limit(self):
        # argument 1e-8
        t = 1.0 / (4.0 * 1e-16)
        assert first_hit_cdf(1.0, 1.0, t) == pytest.approx(1.0, abs=1e-7)

    def test_underflow_cutoff_is_exact_zero(self):
        # argument 50 > cutoff
        t = 1.0 / (4.0 * 2500.0)
        assert first_hit_cdf(1.0, 1.0, t) == 0.0

    def test_matches_quadrature_on_grid(self):
        rng = np.random.default_rng(7)
        rs = rng.uniform(0.5, 2.0, 200)
        Ds = rng.uniform(0.1, 2.0, 200)
        ts = rng.uniform(0.05, 5.0, 200)
        for r, D, t in zip(rs, Ds, ts):
            mode = r * r / (6.0 * D)
            points = [mode] if mode < t else None
            value, _ = integrate.quad(
                lambda s: first_hit_pdf(r, D, s),
                0.0,
                t,
                points=points,
                epsabs=1e-13,
                epsrel=1e-12,
                limit=200,
            )
            assert abs(first_hit_cdf(r, D, t) - value) <= 1e-9

    @pytest.mark.parametrize("t", [0.1, 0.3, 1.0, 2.5, 5.0])
    def test_derivative_matches_pdf(self, t):
        r, D = 1.0, 1.0
        h = 1e-5 * t
        slope = (first_hit_cdf(r, D, t + h) - first_hit_cdf(r, D, t - h)) / (2.0 * h)
        assert slope == pytest.approx(first_hit_pdf(r, D, t), rel=1e-5)

    @given(distances, coefficients, times, factors)
    def test_monotone_in_time(self, r, D, t, factor):
        assert first_hit_cdf(r, D, t * factor) >= first_hit_cdf(r, D, t)

    @given(distances, coefficients, times, factors)
    def test_monotone_in_coefficient(self, r, D, t, factor):
        assert first_hit_cdf(r, D * factor, t) >= first_hit_cdf(r, D, t)

    @given(distances, coefficients, times, factors)
    def test_antitone_in_distance(self, r, D, t, factor):
        assert first_hit_cdf(r * factor, D, t) <= first_hit_cdf(r, D, t)


class TestSlotHitProbability:
    def test_zero_offset_is_cdf(self):
        geom = ChannelGeometry(transmit_offset=0.0)
        assert slot_hit_probability(geom, 13.0) == pytest.approx(
            first_hit_cdf(geom.distance, 13.0, geom.slot_duration), rel=1e-15
        )

    def test_empty_window(self):
        assert window_hit_probability(20e-6, 13.0, 2e-6, 0.0) == 0.0

    def test_default_geometry_closed_form(self):
        geom = ChannelGeometry()
        expected = erfc(2e-5 / math.sqrt(52.0 * 2.2e-5)) - erfc(2e-5 / math.sqrt(52.0 * 2e-6))
        assert slot_hit_probability(geom, 13.0) == pytest.approx(expected, rel=1e-12)

    def test_default_geometry_hit_fraction_is_small(self):
        # most first arrivals happen before the window opens
        geom = ChannelGeometry()
        p = slot_hit_probability(geom, 13.0)
        assert 0.0 < p < 0.01
        assert first_hit_cdf(geom.distance, 13.0, geom.transmit_offset) > 0.99

    @given(
        distances,
        coefficients,
        st.floats(min_value=0.0, max_value=1e-4),
        st.floats(min_value=1e-7, max_value=1e-4),
        st.floats(min_value=1e-7, max_value=1e-4),
    )
    @settings(max_examples=200)
    def test_disjoint_windows_add(self, r, D, tau, first, second):
        whole = window_hit_probability(r, D, tau, first + second)
        parts = window_hit_probability(r, D, tau, first) + window_hit_probability(
            r, D, tau + first, second
        )
        assert whole == pytest.approx(parts, abs=1e-12)

    @given(distances, coefficients, st.floats(min_value=0.0, max_value=1e-3))
    def test_probability_range(self, r, D, tau):
        p = slot_hit_probability(ChannelGeometry(distance=r, transmit_offset=tau), D)
        assert 0.0 <= p <= 1.0
