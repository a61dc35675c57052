"""Separation of the superimposed trace: fit one post-splitter power per
branch so that the simulated network matches a measured trace"""
import itertools
import logging
import math
import time
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .base import (
    GridError,
    NetworkDesign,
    OtdrSettings,
    ParameterError,
    RegionOfInterest,
    Trace,
    UndefinedCorrelationError,
)
from .evolution import DeConfig, DeResult, EarlyStop, run
from .superpose import db_to_linear, superpose_samples
from .waveform import NetworkSimulator

logger = logging.getLogger(__name__)

# correlations above this are necessary for a satisfactory separation
PEARSON_THRESHOLD = 0.97

DEFAULT_Y0_BOUNDS = (-40.0, 0.0)


def pearson(a: Sequence[float], b: Sequence[float]) -> float:
    """Pearson's product-moment correlation of two sample vectors

    Args:
        a, b (arrays of floats): vectors of equal length (at least 2)

    Returns:
        float: the correlation, in [-1, 1]

    Raises:
        ParameterError: if the lengths differ or are below 2
        UndefinedCorrelationError: if either vector has zero variance
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ParameterError("pearson needs two 1-D vectors of equal length")
    if a.size < 2:
        raise ParameterError("pearson needs at least two samples")
    da = a - a.mean()
    db = b - b.mean()
    spread = math.sqrt(float(np.dot(da, da)) * float(np.dot(db, db)))
    if spread == 0:
        raise UndefinedCorrelationError("a vector has zero variance")
    return min(1.0, max(-1.0, float(np.dot(da, db)) / spread))


def sum_squared_residuals(a: Sequence[float], b: Sequence[float]) -> float:
    residuals = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    return float(np.dot(residuals, residuals))


class TraceObjective:
    """Sum of squared residuals between a measured trace and the simulated
    network, over a region of interest. Calling it with a y0 genome (one
    value per connected branch) returns the fitness.

    Instances hold no mutable state, so they can be shared across threads.
    """

    def __init__(
        self,
        measured: Trace,
        design: NetworkDesign,
        settings: OtdrSettings,
        roi: RegionOfInterest,
    ) -> None:
        if not measured.matches(settings):
            raise GridError(
                "measured trace ({} samples at {} m from {} km) does not match"
                " the settings grid ({} samples at {} m)".format(
                    len(measured),
                    measured.resolution,
                    measured.start_distance,
                    settings.sample_count,
                    settings.resolution,
                )
            )
        roi.check(measured)
        self.simulator = NetworkSimulator(design, settings)
        self.roi = roi
        if roi.start_index <= self.simulator.splitter_index:
            raise ParameterError("region of interest starts before splitter")
        offset = self.simulator.splitter_index + 1
        self._local = slice(roi.start_index - offset, roi.end_index - offset)
        self._measured = measured.samples[roi.slice]

    def simulate(self, genome: Sequence[float]) -> np.ndarray:
        """The simulated network samples inside the region of interest"""
        channels = self.simulator.post_splitter(genome)[:, self._local]
        return superpose_samples(channels)

    def __call__(self, genome: Sequence[float]) -> float:
        return sum_squared_residuals(self._measured, self.simulate(genome))


def build_objective(
    measured: Trace,
    design: NetworkDesign,
    settings: OtdrSettings,
    roi: Optional[RegionOfInterest] = None,
) -> TraceObjective:
    """The fitness function of the separation

    Args:
        measured (Trace): the measured (or synthetic) aggregate trace
        design (NetworkDesign): the network; connected branches are fitted
        settings (OtdrSettings): the grid the measured trace was taken on
        roi (RegionOfInterest, optional): samples compared. Defaults to
            `RegionOfInterest.for_design(design, settings)`.

    Returns:
        TraceObjective: maps a y0 genome to the sum of squared residuals
    """
    if roi is None:
        roi = RegionOfInterest.for_design(design, settings)
    return TraceObjective(measured, design, settings, roi)


@dataclass(frozen=True)
class SeparationResult:
    """Outcome of a separation.

    Attributes:
        branch_ids (tuple of ints): the fitted (connected) branches, in order
        y0_per_channel (tuple of floats): fitted post-splitter powers, dB
        per_channel_traces (tuple of Traces): each branch simulated alone
        fitted_aggregate (Trace): the superposition of the fitted channels
        pearson (float): correlation of the linear intensities with the
            measured trace over the region of interest (NaN if undefined)
        residual_sse (float): sum of squared residuals over the region, dB^2
        generations_used (int): DE generations executed
        elapsed (float): wall time of the fit, seconds
        roi (RegionOfInterest): the region the fit was scored on
        history (tuple of floats): best SSE per generation
        ambiguous (tuple of (int, int)): branch pairs whose ends lie within
            one pulse of each other; the fit cannot tell them apart
    """

    branch_ids: Tuple[int, ...]
    y0_per_channel: Tuple[float, ...]
    per_channel_traces: Tuple[Trace, ...]
    fitted_aggregate: Trace
    pearson: float
    residual_sse: float
    generations_used: int
    elapsed: float
    roi: RegionOfInterest
    history: Tuple[float, ...] = ()
    ambiguous: Tuple[Tuple[int, int], ...] = ()

    @property
    def success(self) -> bool:
        """bool : whether the correlation passes the quality gate"""
        return self.pearson >= PEARSON_THRESHOLD


def ambiguous_pairs(
    design: NetworkDesign, settings: OtdrSettings
) -> List[Tuple[int, int]]:
    """Connected branch pairs whose ends are closer than the pulse's spatial
    resolution"""
    return [
        (a.id, b.id)
        for a, b in itertools.combinations(design.connected_branches, 2)
        if abs(a.length - b.length) < settings.dead_zone_km
    ]


def trace_correlation(
    measured: Sequence[float], fitted: Sequence[float]
) -> float:
    """Pearson correlation of two dB traces, taken on their linear intensities

    On intensities the score follows the Fresnel peak heights of the
    channels rather than the Rayleigh slope they all share.

    Returns:
        float: the correlation, or NaN when either trace is flat
    """
    try:
        return pearson(db_to_linear(measured), db_to_linear(fitted))
    except UndefinedCorrelationError:
        return float("nan")


def separate(
    measured: Trace,
    design: NetworkDesign,
    settings: OtdrSettings,
    config: Optional[DeConfig] = None,
    roi: Optional[RegionOfInterest] = None,
    initial: Optional[Sequence[Sequence[float]]] = None,
    callback: Optional[EarlyStop] = None,
) -> SeparationResult:
    """Separate a superimposed trace into its branches

    Runs differential evolution over one y0 per connected branch, minimizing
    the squared residuals between the measured trace and the simulated
    network, then rebuilds every channel from the best genome.

    Args:
        measured (Trace): the trace recorded in front of the splitter
        design (NetworkDesign): the network, with known branch lengths
        settings (OtdrSettings): the grid the trace was recorded on
        config (DeConfig, optional): DE settings. Missing bounds default to
            [-40, 0] dB for every branch.
        roi (RegionOfInterest, optional): the compared samples
        initial (list of genomes, optional): genomes seeded into the
            initial population
        callback (callable, optional): early-stop hook, see `evolution.run`

    Returns:
        SeparationResult: the fitted channels and their quality. A Pearson
                          score below the gate is reported, not raised.
    """
    config = config or DeConfig()
    objective = build_objective(measured, design, settings, roi)
    n_channels = len(objective.simulator)
    if config.bounds is None:
        config = config.with_bounds([DEFAULT_Y0_BOUNDS] * n_channels)
    elif config.dimension != n_channels:
        raise ParameterError(
            "bounds cover {} dimensions but the design has {} connected"
            " branches".format(config.dimension, n_channels)
        )
    ambiguous = ambiguous_pairs(design, settings)
    for pair in ambiguous:
        logger.warning(
            "branches %d and %d end within %.0f m of each other; their"
            " channels cannot be told apart",
            pair[0],
            pair[1],
            settings.spatial_resolution_m,
        )

    started = time.perf_counter()
    outcome = run(objective, config, initial=initial, callback=callback)
    elapsed = time.perf_counter() - started

    return _result(measured, objective, outcome, elapsed, tuple(ambiguous))


def _result(
    measured: Trace,
    objective: TraceObjective,
    outcome: DeResult,
    elapsed: float,
    ambiguous: Tuple[Tuple[int, int], ...],
) -> SeparationResult:
    simulator = objective.simulator
    y0s = tuple(float(value) for value in outcome.best.genome)
    channels = tuple(
        measured.with_samples(simulator.channel_samples(position, y0))
        for position, y0 in enumerate(y0s)
    )
    fitted = measured.with_samples(simulator.aggregate_samples(y0s))
    roi = objective.roi
    score = trace_correlation(roi.take(measured), roi.take(fitted))
    sse = sum_squared_residuals(roi.take(measured), roi.take(fitted))
    result = SeparationResult(
        branch_ids=simulator.branch_ids,
        y0_per_channel=y0s,
        per_channel_traces=channels,
        fitted_aggregate=fitted,
        pearson=score,
        residual_sse=sse,
        generations_used=outcome.generations,
        elapsed=elapsed,
        roi=roi,
        history=outcome.history,
        ambiguous=ambiguous,
    )
    if result.success:
        logger.info("separation succeeded: pearson %.5f", score)
    else:
        logger.warning(
            "separation below the %.2f gate: pearson %.5f",
            PEARSON_THRESHOLD,
            score,
        )
    return result
