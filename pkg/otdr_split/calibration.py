"""Calibration of the design against field measurements: find fiber ends on
traces, compare measured and design branch lengths, and keep the calibrated
values in a flat-file database.

Database format (UTF-8, LF, append-only), one record per line::

    # otdr-split calibration v1
    code<TAB>branch<TAB>length_km<TAB>date

Lines starting with "#" are comments. Lengths carry 4 decimals and dates are
ISO-8601 (YYYY-MM-DD). When a code/branch pair appears more than once, the
record with the latest date wins (the later line on equal dates).
"""
import datetime
import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .base import (
    CalibrationError,
    CalibrationFormatError,
    NetworkDesign,
    ParameterError,
    Trace,
)
from .waveform import DECLINE_SAMPLES, FRESNEL_RAISE_DB, PEAK_SAMPLES

logger = logging.getLogger(__name__)

DATABASE_HEADER = "# otdr-split calibration v1"

LENGTH_DECIMALS = 4

DEFAULT_MIN_RISE_DB = FRESNEL_RAISE_DB / 2
BASELINE_WINDOW = 50
DEAD_ZONE_SAMPLES = PEAK_SAMPLES + DECLINE_SAMPLES


@dataclass(frozen=True)
class CalibrationRecord:
    """One branch length, as measured in the field or taken from the design.

    Attributes:
        code (str): external identifier of the branch (e.g. "PON06UDI")
        branch (int): the branch number
        length (float): branch length, km (stored with 4 decimals)
        date (datetime.date): when the length was recorded
    """

    code: str
    branch: int
    length: float
    date: datetime.date

    def __post_init__(self) -> None:
        if not self.code or any(c in self.code for c in "\t\r\n"):
            raise ParameterError(
                "a record code must be non-empty and hold no tabs/newlines"
            )
        if not self.length > 0:
            raise ParameterError(
                "record {} must have a positive length".format(self.code)
            )
        object.__setattr__(self, "length", round(self.length, LENGTH_DECIMALS))

    def to_line(self) -> str:
        return "{}\t{:02d}\t{:.{}f}\t{}\n".format(
            self.code,
            self.branch,
            self.length,
            LENGTH_DECIMALS,
            self.date.isoformat(),
        )

    @classmethod
    def from_line(cls, line: str, line_number: int) -> "CalibrationRecord":
        fields = line.rstrip("\r\n").split("\t")
        if len(fields) != 4:
            raise CalibrationFormatError(
                "expected 4 tab-separated fields, got {}".format(len(fields)),
                line_number,
            )
        code, branch, length, date = fields
        try:
            return cls(
                code,
                int(branch),
                float(length),
                datetime.date.fromisoformat(date),
            )
        except ValueError as error:
            raise CalibrationFormatError(str(error), line_number)


@dataclass(frozen=True)
class CalibrationDiff:
    """Measured minus design length of a branch, km (4 decimals)"""

    code: str
    measured: float
    design: float
    diff: float

    def calibrated(self, tolerance: float = 0.0) -> bool:
        """Whether field and design agree within a tolerance (km)"""
        return abs(self.diff) <= tolerance


def compare(
    field: CalibrationRecord, design: CalibrationRecord
) -> CalibrationDiff:
    """Compare a field measurement with the design value of the same branch

    Raises:
        CalibrationError: if the records describe different branches
    """
    if field.code != design.code or field.branch != design.branch:
        raise CalibrationError(
            "cannot compare {}/{} with {}/{}".format(
                field.code, field.branch, design.code, design.branch
            )
        )
    diff = round(field.length - design.length, LENGTH_DECIMALS)
    return CalibrationDiff(field.code, field.length, design.length, diff)


def design_records(
    design: NetworkDesign, date: datetime.date
) -> List[CalibrationRecord]:
    """The design branch lengths as calibration records"""
    return [
        CalibrationRecord(branch.label, branch.id, branch.length, date)
        for branch in design.branches
    ]


def detect_fiber_end(
    trace: Trace,
    splitter_position: float,
    min_rise: float = DEFAULT_MIN_RISE_DB,
    baseline_window: int = BASELINE_WINDOW,
    dead_zone: int = DEAD_ZONE_SAMPLES,
) -> List[float]:
    """Find the fiber ends (reflective Fresnel events) on a trace

    A sample k is an event when it rises at least `min_rise` above sample
    k - 1 and above the extrapolated Rayleigh baseline (a straight line
    fitted over the `baseline_window` preceding samples). Events closer than
    `dead_zone` samples to a previous one are dropped.

    Args:
        trace (Trace): the trace to analyze
        splitter_position (float): distance of the splitter, km. Only samples
            after it are considered.
        min_rise (float, optional): the minimum rise, dB. Default is half of
            the Fresnel raise (10.5 dB).
        baseline_window (int, optional): samples in the baseline fit.
            Default is 50.
        dead_zone (int, optional): deduplication width, in samples. Default
            is 15 (plateau plus decline).

    Returns:
        list of floats: the distance (km) of the last sample before each
                        event, i.e. the fiber end. Empty when nothing is found.
    """
    samples = trace.samples
    splitter = round(
        (splitter_position - trace.start_distance) / trace.resolution_km
    )
    first = max(int(splitter) + 2, 1)
    if first >= len(samples):
        return []
    steps = np.diff(samples[first - 1 :])
    candidates = np.flatnonzero(steps >= min_rise) + first

    ends = []  # type: List[float]
    last_event = None
    for k in candidates:
        if last_event is not None and k - last_event < dead_zone:
            continue
        window_start = max(first - 1, k - baseline_window)
        window = np.arange(window_start, k)
        if window.size >= 2:
            slope, intercept = np.polyfit(window, samples[window], 1)
            baseline = slope * k + intercept
        else:
            baseline = samples[k - 1]
        if samples[k] - baseline < min_rise:
            continue
        ends.append(trace.distance_of(int(k) - 1))
        last_event = k
    logger.debug("found %d fiber ends", len(ends))
    return ends


def match_ends(
    ends: Sequence[float], design: NetworkDesign
) -> Dict[int, float]:
    """Assign detected fiber ends to the connected branches of a design

    Pairs are made greedily, closest (detected, design) distance first, each
    end and each branch used at most once.

    Returns:
        dict: branch id -> measured branch length (end minus feeder), km
    """
    pairs = sorted(
        (abs(end - design.end_distance(branch.id)), i, branch.id)
        for i, end in enumerate(ends)
        for branch in design.connected_branches
    )
    used_ends = set()  # type: set
    lengths = {}  # type: Dict[int, float]
    for _, i, branch_id in pairs:
        if i in used_ends or branch_id in lengths:
            continue
        used_ends.add(i)
        lengths[branch_id] = ends[i] - design.feeder_length
    return lengths


def measured_records(
    design: NetworkDesign,
    lengths: Dict[int, float],
    date: datetime.date,
) -> List[CalibrationRecord]:
    """Field records for measured branch lengths, labelled like the design

    Raises:
        CalibrationError: for a branch the design does not have
    """
    records = []
    for branch_id, length in sorted(lengths.items()):
        try:
            branch = design.branch(branch_id)
        except ParameterError as error:
            raise CalibrationError(str(error))
        records.append(CalibrationRecord(branch.label, branch_id, length, date))
    return records


def store(
    records: Iterable[CalibrationRecord], path: Union[str, Path]
) -> Path:
    """Append records to a calibration database, creating it if needed"""
    path = Path(path)
    new_file = not path.exists() or path.stat().st_size == 0
    with path.open("a", encoding="utf-8", newline="\n") as database:
        if new_file:
            database.write(DATABASE_HEADER + "\n")
        count = 0
        for record in records:
            database.write(record.to_line())
            count += 1
    logger.info("stored %d calibration records in %s", count, path)
    return path


def load(path: Union[str, Path]) -> List[CalibrationRecord]:
    """Read a calibration database, keeping the latest record per branch

    Returns:
        list of CalibrationRecords: in order of first appearance

    Raises:
        CalibrationFormatError: on a corrupt line
    """
    latest = {}  # type: Dict[Tuple[str, int], CalibrationRecord]
    with Path(path).open(encoding="utf-8", newline="") as database:
        for number, line in enumerate(database, start=1):
            if not line.strip() or line.startswith("#"):
                continue
            record = CalibrationRecord.from_line(line, number)
            key = (record.code, record.branch)
            current = latest.get(key)
            if current is None or record.date >= current.date:
                latest[key] = record
    return list(latest.values())


def lookup(
    records: Iterable[CalibrationRecord],
    branch: int,
    code: Optional[str] = None,
) -> Optional[CalibrationRecord]:
    """The record of a branch, if any. When `code` is given the record's
    label must match it too."""
    for record in records:
        if record.branch == branch and code in (None, record.code):
            return record
    return None


def apply_calibration(
    design: NetworkDesign, records: Iterable[CalibrationRecord]
) -> NetworkDesign:
    """Replace the design lengths of the branches found in a calibration
    database

    A record applies to a branch with the same id and, when the branch has a
    code, the same code. The cable route's declared length follows the
    branch length.

    Args:
        design (NetworkDesign): the network
        records (list of CalibrationRecords): e.g. the result of `load`

    Returns:
        NetworkDesign: a copy with the calibrated lengths
    """
    records = list(records)
    branches = []
    for branch in design.branches:
        record = lookup(records, branch.id, branch.code)
        if record is None:
            branches.append(branch)
            continue
        logger.info(
            "branch %d (%s): calibrated length %.4f km (design %.4f km)",
            branch.id,
            record.code,
            record.length,
            branch.length,
        )
        geometry = branch.geometry
        if geometry is not None:
            geometry = replace(geometry, declared_length=record.length)
        branches.append(
            replace(branch, length=record.length, geometry=geometry)
        )
    return replace(design, branches=tuple(branches))
