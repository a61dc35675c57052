"""Reading and writing traces.

The canonical trace file is a headerless CSV with one sample per line,
``distance_km,power_db``, LF-terminated, with at least six fractional digits
and uniformly increasing distances. Numbers are always written with "." as
the decimal separator and with enough digits to be read back exactly.

The overlay export is a wide CSV whose first row names the series:
``distance_km,measured,fitted,channel_1,...``.
"""
import logging
import os
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np

from .base import (
    GridError,
    InvalidInputError,
    ParameterError,
    Trace,
    TraceFormatError,
)

logger = logging.getLogger(__name__)

FRACTIONAL_DIGITS = 6

# allowed deviation between consecutive spacings, in km
SPACING_TOLERANCE_KM = 1e-6

PathLike = Union[str, "os.PathLike[str]"]


def format_number(value: float) -> str:
    """Positional notation, at least six fractional digits, exact round-trip"""
    return np.format_float_positional(
        float(value), unique=True, trim="k", min_digits=FRACTIONAL_DIGITS
    )


def _parse_fields(line: str):
    fields = line.split(",")
    if len(fields) != 2:
        raise ValueError("expected 2 fields, got {}".format(len(fields)))
    return float(fields[0]), float(fields[1])


def _is_header(line: str) -> bool:
    """Whether no field of the line reads as a number"""
    for field in line.split(","):
        try:
            float(field)
        except ValueError:
            continue
        return False
    return True


def parse_csv(data: Union[bytes, str]) -> Trace:
    """Parse a canonical trace file

    CRLF line endings and a single header line are tolerated. A first line
    is a header only when none of its fields is a number.

    Args:
        data (bytes or str): the file contents

    Returns:
        Trace: the trace, with its resolution inferred from the first two
               distances

    Raises:
        TraceFormatError: on empty files, non-numeric or non-finite fields,
            fewer than two samples, or non-uniform spacing. The error carries
            the offending line number.
    """
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as error:
            raise TraceFormatError("not UTF-8 text ({})".format(error), 1)
    lines = data.split("\n")
    if lines and lines[-1] == "":
        lines.pop()

    distances = []  # type: List[float]
    powers = []  # type: List[float]
    step = None
    for number, line in enumerate(lines, start=1):
        line = line.rstrip("\r")
        try:
            distance, power = _parse_fields(line)
        except ValueError as error:
            if number == 1 and _is_header(line):
                logger.debug("skipping header line %r", line)
                continue
            raise TraceFormatError(str(error), number)
        if not (np.isfinite(distance) and np.isfinite(power)):
            raise TraceFormatError("non-finite value", number)

        if distances:
            spacing = distance - distances[-1]
            if step is None:
                if not spacing > 0:
                    raise TraceFormatError(
                        "distances must increase", number
                    )
                step = spacing
            elif abs(spacing - step) > SPACING_TOLERANCE_KM:
                raise TraceFormatError(
                    "spacing {:.6f} km differs from {:.6f} km".format(
                        spacing, step
                    ),
                    number,
                )
        distances.append(distance)
        powers.append(power)

    if not distances:
        raise TraceFormatError("no samples", max(len(lines), 1))
    if step is None:
        raise TraceFormatError(
            "a single sample does not define a resolution", len(lines)
        )
    resolution = round(step * 1000.0, 6)
    return Trace(distances[0], resolution, np.array(powers))


def write_csv(trace: Trace) -> bytes:
    """Serialize a trace in the canonical format

    Raises:
        ParameterError: for single-sample traces (resolution underdetermined)
        InvalidInputError: for traces holding the disconnected sentinel
    """
    if len(trace) < 2:
        raise ParameterError("cannot write a trace with fewer than 2 samples")
    if trace.disconnected:
        raise InvalidInputError("cannot write a disconnected channel")
    lines = [
        "{},{}\n".format(format_number(distance), format_number(power))
        for distance, power in zip(trace.distances, trace.samples)
    ]
    return "".join(lines).encode("ascii")


def read_trace(path: PathLike) -> Trace:
    """Read a canonical trace file from disk"""
    return parse_csv(Path(path).read_bytes())


def write_trace(trace: Trace, path: PathLike) -> Path:
    """Write a trace to disk in the canonical format"""
    path = Path(path)
    path.write_bytes(write_csv(trace))
    logger.debug("wrote %d samples to %s", len(trace), path)
    return path


def export_overlay(
    measured: Trace,
    fitted: Trace,
    channels: Sequence[Trace],
    path: PathLike,
    channel_names: Optional[Sequence[str]] = None,
) -> Path:
    """Write measured, fitted and per-channel traces side by side

    Args:
        measured (Trace): the measured trace
        fitted (Trace): the fitted aggregate
        channels (list of Traces): the separated channels
        path (path-like): where to write the wide CSV
        channel_names (list of str, optional): column names for the channels.
            Default is channel_1, channel_2, ...

    Returns:
        Path: the written file

    Raises:
        GridError: if the traces do not share a grid
    """
    series = [measured, fitted] + list(channels)
    for trace in series[1:]:
        if not measured.same_grid(trace):
            raise GridError("overlay series must share the measured grid")
    if channel_names is None:
        channel_names = [
            "channel_{}".format(i) for i in range(1, len(channels) + 1)
        ]
    if len(channel_names) != len(channels):
        raise ParameterError("one name per channel is required")
    header = ["distance_km", "measured", "fitted"] + list(channel_names)

    columns = np.vstack([measured.distances] + [t.samples for t in series])
    rows = [",".join(header) + "\n"]
    for row in columns.T:
        rows.append(",".join(format_number(value) for value in row) + "\n")

    path = Path(path)
    path.write_text("".join(rows), encoding="utf-8", newline="\n")
    logger.debug("wrote %d-series overlay to %s", len(series), path)
    return path


def export_channels(
    channels: Sequence[Trace], names: Sequence[str], out_dir: PathLike
) -> List[Path]:
    """Write every separated channel as its own canonical trace file"""
    if len(channels) != len(names):
        raise ParameterError("one name per channel is required")
    out_dir = Path(out_dir)
    return [
        write_trace(trace, out_dir / "channel_{}.csv".format(name))
        for trace, name in zip(channels, names)
    ]
