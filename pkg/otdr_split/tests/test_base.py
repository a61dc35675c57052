"""Tests for the base value types"""
from unittest import TestCase, main

import numpy as np

from otdr_split import base

from .fixtures import (
    COARSE_SETTINGS,
    FULL_SETTINGS,
    SHORT_SETTINGS,
    lab_design,
    two_branch_design,
)

__all__ = [
    "TestOtdrSettings",
    "TestDistanceIndexConversion",
    "TestTrace",
    "TestNetworkDesign",
    "TestRegionOfInterest",
]


class TestOtdrSettings(TestCase):
    def test_defaults_match_the_laboratory_acquisition(self):
        settings = base.OtdrSettings()
        self.assertEqual(settings.distance_range, 25.0)
        self.assertEqual(settings.resolution, 0.5)
        self.assertEqual(settings.pulse_width, 500.0)
        self.assertEqual(settings.averages, 60)

    def test_sample_count_spans_the_distance_range(self):
        self.assertEqual(FULL_SETTINGS.sample_count, 50001)
        self.assertEqual(COARSE_SETTINGS.sample_count, 5001)
        self.assertEqual(SHORT_SETTINGS.sample_count, 2001)

    def test_pulse_width_gives_a_hundred_meter_resolution(self):
        self.assertAlmostEqual(FULL_SETTINGS.spatial_resolution_m, 100.0)
        self.assertAlmostEqual(FULL_SETTINGS.dead_zone_km, 0.1)

    def test_invalid_settings_raise_errors(self):
        for kwargs in (
            {"distance_range": 0},
            {"distance_range": -3},
            {"resolution": 0},
            {"pulse_width": -1},
            {"averages": 0},
            {"distance_range": 0.0001, "resolution": 0.5},
        ):
            self.assertRaises(base.ParameterError, base.OtdrSettings, **kwargs)

    def test_errors_are_value_errors(self):
        self.assertRaises(ValueError, base.OtdrSettings, resolution=-1)

    def test_empty_trace_covers_the_grid(self):
        trace = COARSE_SETTINGS.empty_trace(-3.0)
        self.assertTrue(trace.matches(COARSE_SETTINGS))
        self.assertTrue(np.all(trace.samples == -3.0))


class TestDistanceIndexConversion(TestCase):
    def test_splitter_of_the_laboratory_network(self):
        self.assertEqual(base.index_of_distance(FULL_SETTINGS, 2.542), 5084)

    def test_range_bounds_are_valid(self):
        self.assertEqual(base.index_of_distance(FULL_SETTINGS, 0.0), 0)
        self.assertEqual(base.index_of_distance(FULL_SETTINGS, 25.0), 50000)

    def test_distances_round_to_the_nearest_sample(self):
        self.assertEqual(base.index_of_distance(FULL_SETTINGS, 0.0011), 2)
        self.assertEqual(base.index_of_distance(FULL_SETTINGS, 0.0014), 3)

    def test_distances_outside_the_range_raise_errors(self):
        for distance in (-0.1, 25.1, 100.0):
            self.assertRaises(
                base.OutOfRangeError,
                base.index_of_distance,
                FULL_SETTINGS,
                distance,
            )

    def test_distance_of_index_is_the_inverse(self):
        for index in (0, 1, 5084, 16400, 50000):
            distance = base.distance_of_index(FULL_SETTINGS, index)
            self.assertEqual(
                base.index_of_distance(FULL_SETTINGS, distance), index
            )

    def test_distance_of_index_outside_grid_raises_error(self):
        self.assertRaises(
            base.OutOfRangeError, base.distance_of_index, FULL_SETTINGS, 50001
        )


class TestTrace(TestCase):
    def make_trace(self, samples=(1.0, 2.0, 3.0)):
        return base.Trace(1.5, 0.5, np.array(samples))

    def test_distances_follow_the_grid(self):
        trace = self.make_trace()
        np.testing.assert_allclose(trace.distances, [1.5, 1.5005, 1.501])
        self.assertAlmostEqual(trace.end_distance, 1.501)

    def test_samples_are_read_only(self):
        trace = self.make_trace()
        with self.assertRaises(ValueError):
            trace.samples[0] = 4.0

    def test_nan_samples_raise_invalid_input(self):
        self.assertRaises(
            base.InvalidInputError, self.make_trace, (1.0, np.nan, 3.0)
        )

    def test_infinite_samples_raise_invalid_input(self):
        self.assertRaises(
            base.InvalidInputError, self.make_trace, (1.0, -np.inf, 3.0)
        )

    def test_empty_trace_raises_error(self):
        self.assertRaises(base.ParameterError, self.make_trace, ())

    def test_disconnected_trace_holds_only_the_sentinel(self):
        dark = base.Trace.disconnected_like(self.make_trace())
        self.assertTrue(dark.disconnected)
        self.assertEqual(len(dark), 3)
        self.assertTrue(np.all(np.isneginf(dark.samples)))

    def test_disconnected_flag_requires_the_sentinel(self):
        self.assertRaises(
            base.ParameterError,
            base.Trace,
            0.0,
            0.5,
            np.array([1.0, -np.inf]),
            True,
        )

    def test_equality_compares_grid_and_samples(self):
        trace = self.make_trace()
        self.assertEqual(trace, self.make_trace())
        self.assertNotEqual(trace, self.make_trace((1.0, 2.0, 3.5)))
        self.assertNotEqual(trace, base.Trace(1.0, 0.5, trace.samples))
        self.assertNotEqual(trace, base.Trace(1.5, 1.0, trace.samples))

    def test_with_samples_keeps_the_grid(self):
        trace = self.make_trace()
        other = trace.with_samples([4.0, 5.0, 6.0])
        self.assertTrue(trace.same_grid(other))
        np.testing.assert_array_equal(other.samples, [4.0, 5.0, 6.0])


class TestNetworkDesign(TestCase):
    def test_branches_are_sorted_by_id(self):
        design = lab_design()
        self.assertEqual(
            [branch.id for branch in design.branches], list(range(1, 9))
        )

    def test_end_distance_adds_feeder_and_branch(self):
        design = lab_design()
        self.assertAlmostEqual(design.end_distance(1), 8.1998)
        self.assertAlmostEqual(design.end_distance(7), 21.9659)

    def test_labels_fall_back_to_the_port_number(self):
        self.assertEqual(lab_design().branch(6).label, "PON06UDI")
        self.assertEqual(two_branch_design().branch(2).label, "BR02")

    def test_branch_count_must_match_the_ratio(self):
        design = lab_design()
        self.assertRaises(
            base.ParameterError,
            base.NetworkDesign,
            design.feeder_length,
            8,
            design.branches[:7],
        )

    def test_at_least_one_branch_is_connected(self):
        self.assertRaises(
            base.ParameterError, two_branch_design, connected=()
        )

    def test_unknown_branch_raises_error(self):
        self.assertRaises(base.ParameterError, lab_design().branch, 9)

    def test_with_connected_unplugs_the_other_branches(self):
        design = lab_design().with_connected([1, 3])
        self.assertEqual(design.connected_ids, (1, 3))
        self.assertEqual(len(design.branches), 8)

    def test_with_connected_rejects_unknown_branches(self):
        self.assertRaises(
            base.ParameterError, lab_design().with_connected, [2, 9]
        )

    def test_invalid_branches_raise_errors(self):
        for kwargs in (
            {"id": 0, "length": 1.0},
            {"id": 1, "length": 0.0},
            {"id": 1, "length": 1.0, "loss_per_km": -0.2},
        ):
            self.assertRaises(base.ParameterError, base.Branch, **kwargs)


class TestRegionOfInterest(TestCase):
    def test_default_region_of_the_laboratory_network(self):
        roi = base.RegionOfInterest.for_design(lab_design(), FULL_SETTINGS)
        self.assertEqual(roi.start_index, 5085)
        self.assertEqual(roi.end_index, 43932 + 16)

    def test_region_follows_the_farthest_connected_branch(self):
        design = lab_design(connected=[5, 6])
        roi = base.RegionOfInterest.for_design(design, FULL_SETTINGS)
        farthest = base.index_of_distance(FULL_SETTINGS, design.end_distance(6))
        self.assertEqual(roi.end_index, farthest + 16)

    def test_region_is_clipped_to_the_grid(self):
        design = two_branch_design(lengths=(0.8, 1.795))
        roi = base.RegionOfInterest.for_design(design, SHORT_SETTINGS)
        self.assertEqual(roi.end_index, SHORT_SETTINGS.sample_count)

    def test_empty_region_raises_error(self):
        self.assertRaises(base.ParameterError, base.RegionOfInterest, 5, 5)
        self.assertRaises(base.ParameterError, base.RegionOfInterest, -1, 5)

    def test_region_beyond_the_trace_raises_grid_error(self):
        trace = base.Trace(0.0, 1.0, np.zeros(10))
        roi = base.RegionOfInterest(2, 12)
        self.assertRaises(base.GridError, roi.take, trace)

    def test_take_returns_the_half_open_span(self):
        trace = base.Trace(0.0, 1.0, np.arange(10.0))
        roi = base.RegionOfInterest(2, 5)
        np.testing.assert_array_equal(roi.take(trace), [2.0, 3.0, 4.0])
        self.assertEqual(len(roi), 3)


if __name__ == "__main__":
    main()
