"""The splitter superposition: how the backscatter of N branches adds up on
the single trace recorded before the splitter"""
import math
from typing import Sequence, Union

import numpy as np

from .base import GridError, InvalidInputError, ParameterError, Trace

# dB value standing for a channel that carries no light (unplugged)
DISCONNECTED = float("-inf")

ArrayLike = Union[float, Sequence[float], np.ndarray]


def db_to_linear(power: ArrayLike) -> Union[float, np.ndarray]:
    """Convert a power (or array of powers) from dB to linear intensity

    Args:
        power (float or array of floats): the power in dB. The DISCONNECTED
            sentinel (-inf) is allowed and maps to zero intensity.

    Returns:
        float or ndarray: 10^(0.1 * power), of the same shape as the input

    Raises:
        InvalidInputError: if any value is NaN (or +inf)
    """
    values = np.asarray(power, dtype=float)
    if np.isnan(values).any() or np.isposinf(values).any():
        raise InvalidInputError("cannot convert {} to linear".format(power))
    linear = 10.0 ** (0.1 * values)
    if linear.ndim == 0:
        return float(linear)
    return linear


def linear_to_db(intensity: ArrayLike) -> Union[float, np.ndarray]:
    """Inverse of `db_to_linear`. Zero intensity maps to DISCONNECTED."""
    values = np.asarray(intensity, dtype=float)
    if np.isnan(values).any() or (values < 0).any():
        raise InvalidInputError(
            "intensities must be non-negative numbers, got {}".format(
                intensity
            )
        )
    with np.errstate(divide="ignore"):
        power = 10.0 * np.log10(values)
    if power.ndim == 0:
        return float(power)
    return power


def superpose_samples(powers: np.ndarray) -> np.ndarray:
    """Apply the splitter equation to a stack of per-channel sample arrays

        S(z) = 10 log10( sqrt( sum_c (10^(0.1 P_c(z)))^2 ) )

    Args:
        powers (2-D array): one row per channel, in dB. Rows may hold the
            DISCONNECTED sentinel.

    Returns:
        ndarray: the superposed power at every sample, in dB

    Raises:
        InvalidInputError: if every channel is dark at some sample
    """
    powers = np.atleast_2d(np.asarray(powers, dtype=float))
    linear = 10.0 ** (0.1 * powers)
    total = np.sqrt(np.sum(linear ** 2, axis=0))
    if (total == 0).any():
        dark = int(np.flatnonzero(total == 0)[0])
        raise InvalidInputError(
            "no channel carries light at sample {}".format(dark)
        )
    return 10.0 * np.log10(total)


def superpose(traces: Sequence[Trace]) -> Trace:
    """Superimpose the traces of several splitter channels into the trace the
    OTDR records before the splitter

    Args:
        traces (list of Traces): the per-channel traces. They must all share
            the same grid. Disconnected (sentinel) traces contribute nothing.

    Returns:
        Trace: the superposed trace, on the common grid

    Raises:
        InvalidInputError: if no trace is provided, or if all channels are
            disconnected at some sample
        GridError: if the traces do not share a grid
    """
    traces = list(traces)
    if not traces:
        raise InvalidInputError("at least one trace is needed to superpose")
    reference = traces[0]
    for i, trace in enumerate(traces[1:], start=1):
        if not reference.same_grid(trace):
            raise GridError(
                "trace {} does not share the grid of trace 0".format(i)
            )
    stack = np.vstack([trace.samples for trace in traces])
    return reference.with_samples(superpose_samples(stack))


def conservation_check(
    incident: float, branches: Sequence[float], tol: float = 1e-9
) -> bool:
    """Check that the branch intensities of a splitter add up to its input

    Args:
        incident (float): linear intensity entering the splitter
        branches (list of floats): linear intensity leaving each branch
        tol (float, optional): relative tolerance. Default is 1e-9.

    Returns:
        bool: whether |incident - sum(branches)| <= tol * incident
    """
    return abs(incident - math.fsum(branches)) <= tol * incident


def ideal_split(incident: float, ratio: int) -> list:
    """Intensities leaving a lossless 1xN splitter"""
    if ratio < 1:
        raise ParameterError("a splitter has at least one output")
    if incident < 0:
        raise InvalidInputError("intensity cannot be negative")
    return [incident / ratio] * ratio


def splitter_loss_db(ratio: int) -> float:
    """Insertion loss of an ideal 1xN splitter, in dB"""
    if ratio < 1:
        raise ParameterError("a splitter has at least one output")
    return 10.0 * math.log10(ratio)
