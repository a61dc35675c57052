"""Validation of the splitter equation with unplugging sequences.

Each step of a sequence connects a set of channels. The channels are first
simulated one at a time, then superposed, and the result is compared with
the combination simulated directly. Measured runs read both from a
directory holding `channel_NN.csv` for every channel recorded alone and
`step_NN.csv` for every step.
"""
import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .base import (
    GridError,
    NetworkDesign,
    OtdrSettings,
    ParameterError,
    RegionOfInterest,
    Trace,
)
from .separator import PEARSON_THRESHOLD, trace_correlation
from .superpose import superpose
from .traceio import format_number, read_trace
from .waveform import simulate_branch, simulate_network

logger = logging.getLogger(__name__)

REPORT_HEADER = "step,channels,pearson,max_abs_err"


@dataclass(frozen=True)
class SequenceSpec:
    """A named list of steps, each the set of channels left plugged in"""

    name: str
    steps: Tuple[Tuple[int, ...], ...]

    def __post_init__(self) -> None:
        steps = tuple(tuple(sorted(set(step))) for step in self.steps)
        if not steps:
            raise ParameterError("a sequence needs at least one step")
        for step in steps:
            if not step:
                raise ParameterError("every step must connect a channel")
            if step[0] < 1:
                raise ParameterError("channel ids start at 1")
        object.__setattr__(self, "steps", steps)

    def __len__(self) -> int:
        return len(self.steps)


SEQUENCES = {
    # each channel alone
    "A": SequenceSpec("A", tuple((channel,) for channel in range(1, 9))),
    # pairs, then quads, then everything
    "B": SequenceSpec(
        "B",
        (
            (1, 2),
            (3, 4),
            (5, 6),
            (7, 8),
            (1, 2, 3, 4),
            (5, 6, 7, 8),
            tuple(range(1, 9)),
        ),
    ),
    # a growing number of connections
    "C": SequenceSpec(
        "C",
        tuple(tuple(range(1, k + 1)) for k in range(1, 7))
        + (tuple(range(1, 9)),),
    ),
}  # type: Dict[str, SequenceSpec]


def all_subsets(n: int) -> SequenceSpec:
    """Every nonempty set of channels of a 1xn splitter (2**n - 1 steps)"""
    if n < 1:
        raise ParameterError("a splitter has at least one channel")
    channels = range(1, n + 1)
    return SequenceSpec(
        "all",
        tuple(
            combination
            for size in range(1, n + 1)
            for combination in itertools.combinations(channels, size)
        ),
    )


@dataclass(frozen=True)
class StepReport:
    """Agreement of one step's superposition with the direct combination.

    Attributes:
        step (int): the step number, from 1
        channels (tuple of ints): the connected channels
        pearson (float): correlation over the region of interest (NaN if
            undefined)
        max_abs_error (float): largest absolute difference there, dB
    """

    step: int
    channels: Tuple[int, ...]
    pearson: float
    max_abs_error: float

    @property
    def passed(self) -> bool:
        return self.pearson >= PEARSON_THRESHOLD


@dataclass(frozen=True)
class MeasuredSequence:
    """Traces recorded while running a sequence on a real splitter.

    Attributes:
        isolated (dict): channel id to the trace of that channel alone
        combined (dict): step number (from 1) to the trace of the step's
            channels plugged in together
    """

    isolated: Mapping[int, Trace]
    combined: Mapping[int, Trace]

    def check(self, spec: SequenceSpec) -> None:
        """Raise ParameterError unless every trace of the sequence is here"""
        channels = sorted({channel for step in spec.steps for channel in step})
        missing = [
            "channel {}".format(channel)
            for channel in channels
            if channel not in self.isolated
        ] + [
            "step {}".format(number)
            for number in range(1, len(spec) + 1)
            if number not in self.combined
        ]
        if missing:
            raise ParameterError(
                "no measured trace for {}".format(", ".join(missing))
            )


def _read_on_grid(path: Path, settings: OtdrSettings) -> Trace:
    if not path.is_file():
        raise ParameterError("missing measured trace {}".format(path))
    trace = read_trace(path)
    if not trace.matches(settings):
        raise GridError(
            "{} is not on the design grid ({} samples at {} m)".format(
                path, settings.sample_count, settings.resolution
            )
        )
    return trace


def load_measured(
    directory: Union[str, Path], spec: SequenceSpec, settings: OtdrSettings
) -> MeasuredSequence:
    """Read the traces of a measured sequence

    Args:
        directory (path): holds `channel_NN.csv` per channel used by the
            sequence and `step_NN.csv` per step, NN zero-padded
        spec (SequenceSpec): the sequence that was recorded
        settings (OtdrSettings): the grid every trace must lie on

    Returns:
        MeasuredSequence: the traces

    Raises:
        ParameterError: if a file is missing
        GridError: if a trace is off the settings grid
        TraceFormatError: if a file is malformed
    """
    directory = Path(directory)
    channels = sorted({channel for step in spec.steps for channel in step})
    isolated = {
        channel: _read_on_grid(
            directory / "channel_{:02d}.csv".format(channel), settings
        )
        for channel in channels
    }
    combined = {
        number: _read_on_grid(
            directory / "step_{:02d}.csv".format(number), settings
        )
        for number in range(1, len(spec) + 1)
    }
    logger.info(
        "read %d isolated and %d combined traces from %s",
        len(isolated),
        len(combined),
        directory,
    )
    return MeasuredSequence(isolated, combined)


def compare_superposition(
    isolated: Sequence[Trace], combined: Trace, roi: RegionOfInterest
) -> Tuple[float, float]:
    """Compare the superposition of isolated channels with a combined trace

    Args:
        isolated (list of Traces): each channel recorded (or simulated) alone
        combined (Trace): the same channels recorded together
        roi (RegionOfInterest): the compared span

    Returns:
        tuple of (float, float): the intensity correlation (NaN when
                                 undefined) and the max absolute error, dB

    Raises:
        GridError: if the traces do not share a grid
    """
    superposed = superpose(isolated)
    if not superposed.same_grid(combined):
        raise GridError("the combined trace is on a different grid")
    expected = roi.take(superposed)
    actual = roi.take(combined)
    score = trace_correlation(expected, actual)
    return score, float(np.max(np.abs(expected - actual)))


def _run_step(
    number: int,
    channels: Tuple[int, ...],
    design: NetworkDesign,
    settings: OtdrSettings,
    y0_truth: Optional[Mapping[int, float]],
    measured: Optional[MeasuredSequence],
) -> StepReport:
    plugged = design.with_connected(channels)
    if measured is not None:
        isolated = [measured.isolated[channel] for channel in channels]
        combined = measured.combined[number]
    else:
        isolated = [
            simulate_branch(design, channel, y0_truth[channel], settings)
            for channel in channels
        ]
        combined = simulate_network(
            plugged, [y0_truth[channel] for channel in channels], settings
        )
    roi = RegionOfInterest.for_design(plugged, settings)
    score, error = compare_superposition(isolated, combined, roi)
    logger.debug(
        "step %d %s: pearson %.9f, max error %.3g dB",
        number,
        channels,
        score,
        error,
    )
    return StepReport(number, channels, score, error)


def run_sequence(
    spec: SequenceSpec,
    design: NetworkDesign,
    settings: OtdrSettings,
    y0_truth: Optional[Mapping[int, float]] = None,
    workers: int = 1,
    measured: Optional[MeasuredSequence] = None,
) -> List[StepReport]:
    """Run every step of a sequence, on noiseless simulations or on
    measured traces

    Args:
        spec (SequenceSpec): the steps to run
        design (NetworkDesign): the network. Its own connected flags are
            ignored; each step plugs in its channels.
        settings (OtdrSettings): the acquisition grid
        y0_truth (dict, optional): post-splitter power (dB) of every channel
            used. Required unless `measured` is given.
        workers (int, optional): steps run concurrently. Default is 1.
        measured (MeasuredSequence, optional): recorded traces replacing
            the simulations

    Returns:
        list of StepReports: one per step, in order

    Raises:
        ParameterError: if a step names a channel the design lacks, or a
            channel has neither a y0 nor a measured trace
    """
    needed = sorted({channel for step in spec.steps for channel in step})
    for channel in needed:
        design.branch(channel)
    if measured is not None:
        measured.check(spec)
    else:
        y0_truth = y0_truth or {}
        missing = [channel for channel in needed if channel not in y0_truth]
        if missing:
            raise ParameterError("no y0 for channels {}".format(missing))

    logger.info(
        "sequence %s: %d %s steps on %d samples",
        spec.name,
        len(spec),
        "simulated" if measured is None else "measured",
        settings.sample_count,
    )
    jobs = [
        (number, channels, design, settings, y0_truth, measured)
        for number, channels in enumerate(spec.steps, start=1)
    ]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            return list(executor.map(lambda job: _run_step(*job), jobs))
    return [_run_step(*job) for job in jobs]


def write_report(
    reports: Sequence[StepReport], path: Union[str, Path]
) -> Path:
    """Write step reports as CSV; channels are space-separated"""
    rows = [REPORT_HEADER]
    for report in reports:
        rows.append(
            "{},{},{},{}".format(
                report.step,
                " ".join(str(channel) for channel in report.channels),
                format_number(report.pearson),
                format_number(report.max_abs_error),
            )
        )
    path = Path(path)
    path.write_text("\n".join(rows) + "\n", encoding="utf-8", newline="\n")
    return path


def summarize(name: str, reports: Sequence[StepReport]) -> str:
    """A human-readable summary of a sequence run"""
    failed = [report for report in reports if not report.passed]
    worst = max((report.max_abs_error for report in reports), default=0.0)
    lowest = min((report.pearson for report in reports), default=float("nan"))
    lines = [
        "sequence {}: {} steps, {} below the {:.2f} gate".format(
            name, len(reports), len(failed), PEARSON_THRESHOLD
        ),
        "lowest pearson {:.9f}, largest error {:.3g} dB".format(lowest, worst),
    ]
    for report in failed:
        lines.append(
            "  step {} ({}): pearson {:.5f}".format(
                report.step,
                " ".join(str(channel) for channel in report.channels),
                report.pearson,
            )
        )
    return "\n".join(lines) + "\n"
