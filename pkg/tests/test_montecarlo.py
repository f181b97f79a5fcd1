import math

import numpy as np
import pytest
from scipy import stats as sps
from scipy.special import erfc, erfcinv

from molcomm.analysis import LaneState, LinkOperatingPoint, analyze_link, operating_point
from molcomm.modulation import Emission, MoleculeSpec, build_config, get_modem
from molcomm.montecarlo import (
    RngSpec,
    empirical_ser,
    random_walk_hit_fraction,
    sample_first_passage,
    simulate_slot_counts,
    wilson_interval,
)
from molcomm.physics import (
    ChannelGeometry,
    first_hit_cdf,
    slot_hit_probability,
    window_hit_probability,
)
from molcomm.stats import ArrivalMode

# family-wise bound for tests that compare several points at once
SIGMAS = 4.0

# D values giving moderate hit probabilities at r = 20 um, tau = 2 us, T_s = 20 us
MODERATE_D = [2e-6, 5e-6, 1e-5, 2e-5, 5e-5]


def scheme_config(scheme, D, geom, per_bit=125, z=20):
    p = slot_hit_probability(geom, D)
    return build_config(scheme, 2, per_bit, D, z, hit_probability=p)


class TestRngSpec:
    def test_same_spec_same_draws(self):
        a = RngSpec(5, 3).generator(2).standard_normal(10)
        b = RngSpec(5, 3).generator(2).standard_normal(10)
        assert np.array_equal(a, b)

    def test_streams_differ(self):
        a = RngSpec(5, 3).generator().standard_normal(10)
        b = RngSpec(5, 4).generator().standard_normal(10)
        assert not np.array_equal(a, b)

    def test_seed_range(self):
        with pytest.raises(ValueError):
            RngSpec(-1)
        with pytest.raises(ValueError):
            RngSpec(2**64)


class TestSampler:
    def test_positive_times(self):
        rng = np.random.default_rng(0)
        assert np.all(sample_first_passage(1.0, 1.0, rng, size=10_000) > 0)
        assert isinstance(sample_first_passage(1.0, 1.0, rng), float)

    @pytest.mark.slow
    def test_ks_against_cdf(self):
        rng = np.random.default_rng(1)
        samples = sample_first_passage(1.0, 1.0, rng, size=1_000_000)
        result = sps.kstest(samples, lambda t: first_hit_cdf(1.0, 1.0, t))
        assert result.statistic <= 1.95 / math.sqrt(1_000_000)

    def test_median(self):
        r, D = 1.0, 1.0
        rng = np.random.default_rng(2)
        samples = sample_first_passage(r, D, rng, size=200_000)
        t_med = r * r / (4.0 * D * erfcinv(0.5) ** 2)
        assert r / math.sqrt(4.0 * D * t_med) == pytest.approx(0.47694, abs=1e-5)
        assert np.median(samples) == pytest.approx(t_med, rel=0.025)

    def test_distance_scaling(self):
        near = sample_first_passage(1.0, 1.0, np.random.default_rng(3), size=100_000)
        far = sample_first_passage(2.0, 1.0, np.random.default_rng(4), size=100_000)
        assert sps.ks_2samp(4.0 * near, far).pvalue > 0.001

    @pytest.mark.slow
    @pytest.mark.parametrize(
        "point, window",
        enumerate([(0.1, 0.4), (0.2, 0.8), (0.0, 2.0), (0.5, 4.5), (1.0, 2.0)]),
    )
    def test_hit_fraction_matches_probability(self, point, window):
        r, D = 1.0, 1.0
        start, duration = window
        rng = RngSpec(99, point).generator()
        samples = sample_first_passage(r, D, rng, size=1_000_000)
        hits = np.mean((samples > start) & (samples <= start + duration))
        p = window_hit_probability(r, D, start, duration)
        se = math.sqrt(p * (1.0 - p) / samples.size)
        assert abs(hits - p) <= SIGMAS * se

    @pytest.mark.slow
    def test_random_walk_smoke(self):
        rng = np.random.default_rng(5)
        fraction = random_walk_hit_fraction(1.0, 1.0, (0.0, 1.0), 1.0 / 4000, 50_000, rng)
        assert fraction == pytest.approx(erfc(0.5), abs=0.02)


class TestSlotCounts:
    def setup_method(self):
        self.geom = ChannelGeometry()
        self.specs = (MoleculeSpec(1, 1e-5), MoleculeSpec(2, 1e-5))

    def test_empty_emission(self):
        rng = np.random.default_rng(0)
        counts = simulate_slot_counts(Emission({}), self.geom, self.specs, rng, 100)
        assert counts.shape == (100, 2)
        assert not counts.any()

    @pytest.mark.parametrize("path", ["binomial", "first_passage"])
    def test_counts_bounded_by_release(self, path):
        rng = np.random.default_rng(1)
        counts = simulate_slot_counts(
            Emission({1: 40}), self.geom, self.specs, rng, 1000, path=path
        )
        assert counts[:, 0].max() <= 40
        assert not counts[:, 1].any()

    def test_binomial_mean(self):
        rng = np.random.default_rng(2)
        trials = 100_000
        counts = simulate_slot_counts(Emission({1: 250}), self.geom, self.specs, rng, trials)
        p = slot_hit_probability(self.geom, 1e-5)
        bound = SIGMAS * math.sqrt(250 * p * (1.0 - p) / trials)
        assert abs(counts[:, 0].mean() - 250 * p) <= bound

    def test_open_window_mean(self):
        geom = ChannelGeometry(distance=1.0, slot_duration=1e12, transmit_offset=0.5)
        specs = (MoleculeSpec(1, 1.0),)
        rng = np.random.default_rng(3)
        trials = 20_000
        counts = simulate_slot_counts(
            Emission({1: 100}), geom, specs, rng, trials, path="first_passage"
        )
        expected = 100 * (1.0 - first_hit_cdf(1.0, 1.0, 0.5))
        p = expected / 100
        bound = SIGMAS * math.sqrt(100 * p * (1.0 - p) / trials) + 1e-3
        assert abs(counts[:, 0].mean() - expected) <= bound

    @pytest.mark.slow
    def test_paths_agree(self):
        trials = 100_000
        emission = Emission({1: 250})
        fast = simulate_slot_counts(
            emission, self.geom, self.specs, np.random.default_rng(4), trials
        )[:, 0]
        slow = simulate_slot_counts(
            emission, self.geom, self.specs, np.random.default_rng(5), trials, "first_passage"
        )[:, 0]
        edges = np.unique(np.quantile(np.concatenate([fast, slow]), np.linspace(0, 1, 21)))
        edges[-1] += 1
        table = np.array([np.histogram(fast, edges)[0], np.histogram(slow, edges)[0]])
        table = table[:, table.sum(axis=0) > 0]
        assert sps.chi2_contingency(table)[1] > 0.001


class TestWilson:
    def test_ordered_and_contains_estimate(self):
        for errors, trials in [(0, 10), (3, 10), (10, 10), (17, 1000)]:
            low, high = wilson_interval(errors, trials)
            assert 0.0 <= low <= errors / trials <= high <= 1.0

    def test_zero_errors(self):
        low, high = wilson_interval(0, 100)
        assert low == 0.0
        assert 0.0 < high < 0.05


class TestEmpiricalSer:
    def test_noiseless(self):
        for scheme in ("oomosk", "mosk", "csk"):
            cfg = build_config(scheme, 2, 125, 13.0, 20, hit_probability=1.0)
            table = get_modem(cfg).emission_table()
            point = LinkOperatingPoint(
                tuple(
                    LaneState(spec.type_id, int(table[:, i].max()), 1.0, spec.threshold)
                    for i, spec in enumerate(cfg.molecule_specs)
                )
            )
            report = empirical_ser(cfg, point, ChannelGeometry(), RngSpec(0), 2000)
            assert report.errors == 0
            assert report.ser_estimate == 0.0

    def test_deterministic(self):
        geom = ChannelGeometry()
        cfg = scheme_config("oomosk", 1e-5, geom)
        a = empirical_ser(cfg, None, geom, RngSpec(7, 2), 25_000)
        b = empirical_ser(cfg, None, geom, RngSpec(7, 2), 25_000)
        assert a == b

    def test_independent_of_workers(self):
        geom = ChannelGeometry()
        cfg = scheme_config("mosk", 1e-5, geom)
        serial = empirical_ser(cfg, None, geom, RngSpec(3, 1), 35_000, workers=1)
        threaded = empirical_ser(cfg, None, geom, RngSpec(3, 1), 35_000, workers=4)
        assert serial == threaded

    def test_per_symbol_tallies(self):
        geom = ChannelGeometry()
        cfg = scheme_config("csk", 1e-5, geom)
        report = empirical_ser(cfg, None, geom, RngSpec(1), 12_000)
        assert sum(report.per_symbol_trials) == 12_000
        assert sum(report.per_symbol_errors) == report.errors
        low, high = report.ci_95
        assert low <= report.ser_estimate <= high

    def test_rejects_empty_run(self):
        geom = ChannelGeometry()
        with pytest.raises(ValueError):
            empirical_ser(scheme_config("oomosk", 1e-5, geom), None, geom, RngSpec(), 0)

    @pytest.mark.parametrize("scheme", ["oomosk", "mosk", "csk"])
    def test_matches_analytic(self, scheme):
        geom = ChannelGeometry()
        trials = 100_000
        for index, D in enumerate(MODERATE_D):
            cfg = scheme_config(scheme, D, geom)
            analytic = analyze_link(cfg, geom, ArrivalMode.EXACT_BINOMIAL).ser
            report = empirical_ser(cfg, None, geom, RngSpec(11, index), trials)
            sigma = math.sqrt(analytic * (1.0 - analytic) / trials)
            assert abs(report.ser_estimate - analytic) <= SIGMAS * sigma + 1.0 / trials

    def test_default_point_matches_closed_form(self):
        geom = ChannelGeometry()
        cfg = scheme_config("oomosk", 13.0, geom)
        analytic = analyze_link(cfg, geom, ArrivalMode.EXACT_BINOMIAL).ser
        report = empirical_ser(cfg, None, geom, RngSpec(0), 20_000)
        sigma = math.sqrt(analytic * (1.0 - analytic) / 20_000)
        assert abs(report.ser_estimate - analytic) <= 3.0 * sigma + 1.0 / 20_000

    def test_background_shifts_errors(self):
        geom = ChannelGeometry()
        cfg = scheme_config("oomosk", 1e-5, geom)
        point = operating_point(cfg, geom, background=20)
        report = empirical_ser(cfg, point, geom, RngSpec(2), 5000)
        # every lane always fires, so only symbol 3 decodes correctly
        assert report.ser_estimate == pytest.approx(0.75, abs=0.03)
        assert report.per_symbol_errors[3] == 0

    @pytest.mark.slow
    def test_interval_coverage(self):
        geom = ChannelGeometry()
        cfg = scheme_config("oomosk", 5e-6, geom)
        point = operating_point(cfg, geom)
        analytic = analyze_link(cfg, geom, ArrivalMode.EXACT_BINOMIAL).ser
        assert 0.05 < analytic < 0.95
        covered = 0
        runs = 2000
        for seed in range(runs):
            report = empirical_ser(cfg, point, geom, RngSpec(seed, 0), 500)
            low, high = report.ci_95
            covered += low <= analytic <= high
        assert covered / runs >= 0.93

    @pytest.mark.slow
    def test_first_passage_path(self):
        geom = ChannelGeometry()
        cfg = scheme_config("oomosk", 1e-5, geom)
        analytic = analyze_link(cfg, geom, ArrivalMode.EXACT_BINOMIAL).ser
        report = empirical_ser(cfg, None, geom, RngSpec(4), 20_000, path="first_passage")
        sigma = math.sqrt(analytic * (1.0 - analytic) / 20_000)
        assert abs(report.ser_estimate - analytic) <= SIGMAS * sigma + 1.0 / 20_000
