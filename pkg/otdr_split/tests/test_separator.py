"""Tests for the separation of superimposed traces"""
import math
from unittest import TestCase, main

import numpy as np

from otdr_split import separator
from otdr_split.base import (
    Branch,
    GridError,
    NetworkDesign,
    ParameterError,
    RegionOfInterest,
    UndefinedCorrelationError,
)
from otdr_split.evolution import DeConfig
from otdr_split.waveform import simulate_network

from .fixtures import COARSE_SETTINGS, FULL_SETTINGS, lab_design, lab_y0

__all__ = [
    "TestPearson",
    "TestObjective",
    "TestSeparate",
    "TestSeparationInvariants",
    "TestTraceCorrelation",
]


class TestPearson(TestCase):
    def test_identical_vectors_correlate_perfectly(self):
        self.assertAlmostEqual(separator.pearson([1, 2, 5], [1, 2, 5]), 1.0)

    def test_correlation_ignores_offset_and_scale(self):
        a = np.array([3.0, -1.0, 4.0, 1.5])
        self.assertAlmostEqual(separator.pearson(a, 2 * a - 7), 1.0)
        self.assertAlmostEqual(separator.pearson(a, -a), -1.0)

    def test_known_value(self):
        self.assertAlmostEqual(
            separator.pearson([1, 2, 3], [1, 2, 4]), 3 / math.sqrt(84 / 9)
        )

    def test_zero_variance_is_undefined(self):
        self.assertRaises(
            UndefinedCorrelationError, separator.pearson, [2, 2, 2], [1, 2, 3]
        )

    def test_invalid_lengths_raise_errors(self):
        self.assertRaises(ParameterError, separator.pearson, [1, 2], [1, 2, 3])
        self.assertRaises(ParameterError, separator.pearson, [1], [1])


class TestObjective(TestCase):
    def setUp(self):
        self.design = lab_design()
        self.truth = list(lab_y0(self.design).values())
        self.measured = simulate_network(
            self.design, self.truth, COARSE_SETTINGS
        )

    def test_truth_has_zero_residual(self):
        objective = separator.build_objective(
            self.measured, self.design, COARSE_SETTINGS
        )
        self.assertAlmostEqual(objective(self.truth), 0.0, places=12)

    def test_wrong_y0_has_positive_residual(self):
        objective = separator.build_objective(
            self.measured, self.design, COARSE_SETTINGS
        )
        self.assertGreater(objective(np.array(self.truth) - 1.0), 0.0)

    def test_measured_trace_must_match_the_settings(self):
        self.assertRaises(
            GridError,
            separator.build_objective,
            self.measured,
            self.design,
            FULL_SETTINGS,
        )

    def test_region_before_the_splitter_raises_error(self):
        self.assertRaises(
            ParameterError,
            separator.build_objective,
            self.measured,
            self.design,
            COARSE_SETTINGS,
            RegionOfInterest(10, 2000),
        )


class TestSeparate(TestCase):
    def test_laboratory_network_passes_the_correlation_gate(self):
        design = lab_design()
        measured = simulate_network(
            design, list(lab_y0(design).values()), COARSE_SETTINGS
        )
        scores = []
        for seed in (0, 1, 2):
            result = separator.separate(
                measured, design, COARSE_SETTINGS, DeConfig(seed=seed)
            )
            scores.append(result.pearson)
            if result.success:
                break
        self.assertGreaterEqual(max(scores), separator.PEARSON_THRESHOLD)

    def test_single_channel_matches_a_grid_search(self):
        design = lab_design(connected=[6])
        measured = simulate_network(design, [-12.34], COARSE_SETTINGS)
        result = separator.separate(
            measured,
            design,
            COARSE_SETTINGS,
            DeConfig(
                population_size=20,
                generations=80,
                crossover_rate=0.9,
                scale_factor=0.5,
            ),
        )

        objective = separator.build_objective(measured, design, COARSE_SETTINGS)
        grid = np.arange(-40.0, 0.005, 0.01)
        oracle = grid[np.argmin([objective([y0]) for y0 in grid])]
        self.assertLess(abs(result.y0_per_channel[0] - oracle), 0.1)

    def test_result_describes_every_connected_channel(self):
        design = lab_design(connected=[2, 4, 7])
        measured = simulate_network(
            design, [-12.0, -15.0, -11.0], COARSE_SETTINGS
        )
        result = separator.separate(
            measured,
            design,
            COARSE_SETTINGS,
            DeConfig(population_size=10, generations=5),
        )
        self.assertEqual(result.branch_ids, (2, 4, 7))
        self.assertEqual(len(result.y0_per_channel), 3)
        self.assertEqual(len(result.per_channel_traces), 3)
        for trace in result.per_channel_traces:
            self.assertTrue(trace.same_grid(measured))
        self.assertTrue(result.fitted_aggregate.same_grid(measured))
        self.assertEqual(result.generations_used, 5)
        self.assertEqual(len(result.history), 6)
        self.assertGreaterEqual(result.residual_sse, 0.0)
        for y0 in result.y0_per_channel:
            self.assertTrue(-40.0 <= y0 <= 0.0)

    def test_untrained_population_fails_the_correlation_gate(self):
        design = lab_design()
        measured = simulate_network(
            design, list(lab_y0(design).values()), COARSE_SETTINGS
        )
        for seed in (0, 1, 2):
            result = separator.separate(
                measured,
                design,
                COARSE_SETTINGS,
                DeConfig(generations=0, seed=seed),
            )
            self.assertEqual(result.generations_used, 0)
            self.assertLess(result.pearson, separator.PEARSON_THRESHOLD)
            self.assertIs(result.success, False)

    def test_bounds_must_cover_every_channel(self):
        design = lab_design(connected=[1, 2])
        measured = simulate_network(design, [-11.0, -12.0], COARSE_SETTINGS)
        config = DeConfig(generations=1).with_bounds([(-40.0, 0.0)] * 3)
        self.assertRaises(
            ParameterError,
            separator.separate,
            measured,
            design,
            COARSE_SETTINGS,
            config,
        )

    def test_close_branch_ends_are_flagged_ambiguous(self):
        design = NetworkDesign(
            feeder_length=1.0,
            splitter_ratio=3,
            branches=(Branch(1, 3.0), Branch(2, 3.05), Branch(3, 5.0)),
        )
        self.assertEqual(
            separator.ambiguous_pairs(design, FULL_SETTINGS), [(1, 2)]
        )
        self.assertEqual(
            separator.ambiguous_pairs(lab_design(), FULL_SETTINGS), [(1, 3)]
        )


class TestSeparationInvariants(TestCase):
    def setUp(self):
        self.design = lab_design()
        self.truth = list(lab_y0(self.design).values())
        self.measured = simulate_network(
            self.design, self.truth, COARSE_SETTINGS
        )

    def separate(self, measured, **kwargs):
        config = DeConfig(population_size=10, generations=5, seed=4)
        return separator.separate(
            measured, self.design, COARSE_SETTINGS, config, **kwargs
        )

    def test_seeding_the_truth_reproduces_the_trace(self):
        result = separator.separate(
            self.measured,
            self.design,
            COARSE_SETTINGS,
            DeConfig(population_size=10, generations=0),
            initial=[self.truth],
        )
        self.assertEqual(list(result.y0_per_channel), self.truth)
        self.assertAlmostEqual(result.pearson, 1.0, places=9)
        self.assertAlmostEqual(result.residual_sse, 0.0, places=9)
        self.assertTrue(result.success)

    def test_fit_is_never_worse_than_a_seeded_genome(self):
        noisy = simulate_network(
            self.design, self.truth, COARSE_SETTINGS, noise_sigma=0.1, seed=5
        )
        objective = separator.build_objective(
            noisy, self.design, COARSE_SETTINGS
        )
        result = self.separate(noisy, initial=[self.truth])
        self.assertLessEqual(
            result.residual_sse, objective(self.truth) + 1e-9
        )

    def test_fitted_aggregate_dominates_every_channel(self):
        result = self.separate(self.measured)
        aggregate = result.roi.take(result.fitted_aggregate)
        for channel in result.per_channel_traces:
            self.assertTrue(
                np.all(aggregate >= result.roi.take(channel) - 1e-9)
            )

    def test_same_seed_gives_the_same_fit(self):
        first = self.separate(self.measured)
        second = self.separate(self.measured)
        self.assertEqual(first.y0_per_channel, second.y0_per_channel)
        self.assertEqual(first.residual_sse, second.residual_sse)


class TestTraceCorrelation(TestCase):
    def test_level_offset_keeps_a_perfect_score(self):
        design = lab_design(connected=[6])
        trace = simulate_network(design, [-12.0], COARSE_SETTINGS)
        shifted = trace.samples + 3.0
        self.assertAlmostEqual(
            separator.trace_correlation(trace.samples, shifted), 1.0
        )

    def test_correlation_follows_the_fresnel_peaks(self):
        design = lab_design()
        truth = list(lab_y0(design).values())
        roi = RegionOfInterest.for_design(design, COARSE_SETTINGS)
        measured = roi.take(simulate_network(design, truth, COARSE_SETTINGS))
        halved = [y0 - 15.0 * (i % 2) for i, y0 in enumerate(truth)]
        fitted = roi.take(simulate_network(design, halved, COARSE_SETTINGS))
        self.assertLess(
            separator.trace_correlation(measured, fitted),
            separator.PEARSON_THRESHOLD,
        )

    def test_flat_trace_is_not_a_number(self):
        score = separator.trace_correlation([1.0, 2.0, 3.0], [-5.0] * 3)
        self.assertTrue(math.isnan(score))


if __name__ == "__main__":
    main()
