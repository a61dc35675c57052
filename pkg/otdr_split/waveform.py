"""Synthetic OTDR traces: one branch at a time from a four-segment piecewise
model, and whole networks by superposing their branches"""
import logging
import math
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence

import numpy as np

from .base import (
    NetworkDesign,
    OtdrSettings,
    OutOfRangeError,
    ParameterError,
    Trace,
    index_of_distance,
)
from .superpose import splitter_loss_db, superpose_samples

logger = logging.getLogger(__name__)

# Rayleigh slope from the fiber datasheet, in dB per sample on a 0.5 m grid
RAYLEIGH_SLOPE = math.atan(-1 / 1150)
SLOPE_REFERENCE_RESOLUTION_M = 0.5

FRESNEL_RAISE_DB = 21.0
FIRST_PEAK_SCALE = math.sqrt(2) / 2
PEAK_SAMPLES = 11
DECLINE_SAMPLES = 4
DECLINE_SLOPE = -3.86
TAIL_COEFFICIENT = -2.41
TAIL_OFFSET = 1.0


@dataclass(frozen=True)
class ChannelSimParams:
    """Parameters of the piecewise model of one channel after the splitter.

    Sample positions are 1-based and local: position 1 is the first sample
    after the splitter and position `length` the last sample of the trace.
    The model is made of

    - a Rayleigh line ``y0 + slope * x`` up to `fiber_end` (the last sample
      before the end of the fiber),
    - a Fresnel plateau of `peak_len` samples raised by `fresnel_raise`, whose
      first sample is softened by a factor sqrt(2)/2,
    - a linear decline of `decline_len` samples with `decline_slope` per
      sample,
    - a logarithmic tail ``tail_coeff * ln(x - C) + tail_offset`` to the end.

    Attributes:
        y0 (float): initial power right after the splitter, dB
        fiber_end (int): last Rayleigh sample (1-based, local)
        length (int): total number of local samples
        slope (float): Rayleigh slope, dB per sample
        fresnel_raise (float): rise of the reflection plateau, dB
        peak_len (int): samples in the plateau
        decline_len (int): samples in the linear decline
        decline_slope (float): dB per sample of the decline
        tail_coeff (float): logarithmic coefficient of the tail, dB
        tail_offset (float): constant added to the tail, dB
    """

    y0: float
    fiber_end: int
    length: int
    slope: float = RAYLEIGH_SLOPE
    fresnel_raise: float = FRESNEL_RAISE_DB
    peak_len: int = PEAK_SAMPLES
    decline_len: int = DECLINE_SAMPLES
    decline_slope: float = DECLINE_SLOPE
    tail_coeff: float = TAIL_COEFFICIENT
    tail_offset: float = TAIL_OFFSET

    def __post_init__(self) -> None:
        if self.peak_len < 1 or self.decline_len < 1:
            raise ParameterError("plateau and decline need at least 1 sample")
        if not 1 <= self.fiber_end < self.decline_end < self.length:
            raise ParameterError(
                "need 1 <= A < A + {} + {} < D, got A={} D={}".format(
                    self.peak_len, self.decline_len, self.fiber_end, self.length
                )
            )
        if not all(
            math.isfinite(value)
            for value in (
                self.y0,
                self.slope,
                self.fresnel_raise,
                self.decline_slope,
                self.tail_coeff,
                self.tail_offset,
            )
        ):
            raise ParameterError("model parameters must be finite")

    @property
    def peak_end(self) -> int:
        """int : the last plateau sample (B)"""
        return self.fiber_end + self.peak_len

    @property
    def decline_end(self) -> int:
        """int : the last decline sample (C)"""
        return self.peak_end + self.decline_len


def simulate_channel(params: ChannelSimParams) -> np.ndarray:
    """Synthesize the local trace of one channel

    Args:
        params (ChannelSimParams): the channel's model parameters

    Returns:
        ndarray: `params.length` amplitudes in dB. Element i holds local
                 sample position i + 1.
    """
    a, b, c = params.fiber_end, params.peak_end, params.decline_end
    x = np.arange(1, params.length + 1, dtype=float)
    y = np.empty(params.length)

    y[:a] = params.y0 + params.slope * x[:a]
    y_a = y[a - 1]

    y[a] = (y_a + params.fresnel_raise) * FIRST_PEAK_SCALE
    y[a + 1 : b] = y_a + params.fresnel_raise
    y_b = y[b - 1]

    y[b:c] = y_b + params.decline_slope * (x[b:c] - b)
    y_c = y[c - 1]

    y[c:] = y_c + params.tail_coeff * np.log(x[c:] - c) + params.tail_offset
    return y


def scaled_slope(settings: OtdrSettings) -> float:
    """The datasheet Rayleigh slope rescaled to the settings' sample spacing"""
    return RAYLEIGH_SLOPE * settings.resolution / SLOPE_REFERENCE_RESOLUTION_M


def default_y0(design: NetworkDesign, branch_id: int) -> float:
    """A plausible post-splitter level for a branch, from the design budget:
    launch level, minus feeder loss, minus the port's insertion loss (the
    ideal 1xN loss when the design gives none)
    """
    branch = design.branch(branch_id)
    insertion = branch.insertion_loss or splitter_loss_db(
        design.splitter_ratio
    )
    feeder_loss = design.feeder_length * design.feeder_loss_per_km
    return design.launch_level - feeder_loss - insertion


def params_from_design(
    design: NetworkDesign,
    branch_id: int,
    y0: float,
    settings: OtdrSettings,
    use_design_slope: bool = False,
    **overrides
) -> ChannelSimParams:
    """Place a branch's piecewise model on the trace grid

    Args:
        design (NetworkDesign): the network design
        branch_id (int): the (connected) branch to model
        y0 (float): the branch's post-splitter power, dB
        settings (OtdrSettings): the acquisition grid
        use_design_slope (bool, optional): derive the Rayleigh slope from the
            branch's loss_per_km rather than the datasheet constant. Default
            is False.
        **overrides: any other ChannelSimParams field (e.g. peak_len)

    Returns:
        ChannelSimParams: the model parameters, in local coordinates relative
                          to the splitter

    Raises:
        ParameterError: if the branch is unplugged, or too short for the model
        OutOfRangeError: if the fiber end lies beyond the distance range
    """
    branch = design.branch(branch_id)
    if not branch.connected:
        raise ParameterError("branch {} is not connected".format(branch_id))
    end_distance = design.end_distance(branch_id)
    if end_distance > settings.distance_range:
        raise OutOfRangeError(
            "branch {} ends at {:.4f} km, beyond the {} km range".format(
                branch_id, end_distance, settings.distance_range
            )
        )
    splitter = index_of_distance(settings, design.splitter_position)
    fiber_end = index_of_distance(settings, end_distance) - splitter
    if use_design_slope:
        slope = -branch.loss_per_km * settings.resolution_km
    else:
        slope = scaled_slope(settings)
    fields = dict(
        y0=y0,
        fiber_end=fiber_end,
        length=settings.sample_count - 1 - splitter,
        slope=slope,
    )
    fields.update(overrides)
    return ChannelSimParams(**fields)


class NetworkSimulator:
    """Forward model of a whole network on a fixed grid.

    The per-branch model placement is computed once, so that evaluating many
    y0 vectors (as the separator does) only re-synthesizes the amplitudes.

    Attributes:
        design (NetworkDesign): the simulated network
        settings (OtdrSettings): the acquisition grid
        branch_ids (tuple of ints): the connected branches, in order
        splitter_index (int): the global index of the splitter sample
    """

    def __init__(
        self,
        design: NetworkDesign,
        settings: OtdrSettings,
        use_design_slope: bool = False,
        **overrides
    ) -> None:
        self.design = design
        self.settings = settings
        self.branch_ids = design.connected_ids
        self.splitter_index = index_of_distance(
            settings, design.splitter_position
        )
        self._templates = [
            params_from_design(
                design,
                branch_id,
                0.0,
                settings,
                use_design_slope=use_design_slope,
                **overrides
            )
            for branch_id in self.branch_ids
        ]
        feeder_x = np.arange(1, self.splitter_index + 2, dtype=float)
        self.feeder = design.launch_level + scaled_slope(settings) * feeder_x

    def __len__(self) -> int:
        return len(self.branch_ids)

    def params(self, y0_per_channel: Sequence[float]) -> List[ChannelSimParams]:
        y0s = self._check(y0_per_channel)
        return [
            replace(template, y0=float(y0))
            for template, y0 in zip(self._templates, y0s)
        ]

    def _check(self, y0_per_channel: Sequence[float]) -> np.ndarray:
        y0s = np.asarray(y0_per_channel, dtype=float).ravel()
        if y0s.size != len(self):
            raise ParameterError(
                "expected {} y0 values (one per connected branch), got"
                " {}".format(len(self), y0s.size)
            )
        return y0s

    def post_splitter(self, y0_per_channel: Sequence[float]) -> np.ndarray:
        """Stack of local channel amplitudes, one row per connected branch"""
        return np.vstack(
            [simulate_channel(p) for p in self.params(y0_per_channel)]
        )

    def channel_samples(self, position: int, y0: float) -> np.ndarray:
        """One connected branch (by position in `branch_ids`) on the full
        grid, with the feeder span filled in"""
        params = replace(self._templates[position], y0=float(y0))
        return np.concatenate([self.feeder, simulate_channel(params)])

    def aggregate_samples(self, y0_per_channel: Sequence[float]) -> np.ndarray:
        """Noiseless network trace samples on the full grid"""
        post = superpose_samples(self.post_splitter(y0_per_channel))
        return np.concatenate([self.feeder, post])

    def simulate(
        self,
        y0_per_channel: Sequence[float],
        noise_sigma: float = 0.0,
        seed: Optional[int] = None,
    ) -> Trace:
        """The network trace, optionally with Gaussian noise in dB"""
        if noise_sigma < 0:
            raise ParameterError("noise sigma cannot be negative")
        samples = self.aggregate_samples(y0_per_channel)
        if noise_sigma > 0:
            rng = np.random.default_rng(seed)
            samples = samples + rng.normal(0.0, noise_sigma, samples.size)
        return Trace(0.0, self.settings.resolution, samples)


def simulate_branch(
    design: NetworkDesign,
    branch_id: int,
    y0: float,
    settings: OtdrSettings,
    **overrides
) -> Trace:
    """The trace one branch would produce alone, on the full grid

    Args:
        design (NetworkDesign): the network design
        branch_id (int): the branch to simulate. It must be connected.
        y0 (float): the branch's post-splitter power, dB
        settings (OtdrSettings): the acquisition grid
        **overrides: forwarded to `params_from_design`

    Returns:
        Trace: the feeder line followed by the branch's piecewise model
    """
    simulator = NetworkSimulator(
        design.with_connected([branch_id]), settings, **overrides
    )
    return Trace(
        0.0, settings.resolution, simulator.channel_samples(0, y0)
    )


def simulate_network(
    design: NetworkDesign,
    y0_per_channel: Sequence[float],
    settings: OtdrSettings,
    noise_sigma: float = 0.0,
    seed: Optional[int] = None,
    **overrides
) -> Trace:
    """Simulate the trace an OTDR records in front of the splitter

    Each connected branch is synthesized with `simulate_channel`, placed
    after the splitter, and the branches are superposed. The feeder span is
    filled with a Rayleigh line from the launch level.

    Args:
        design (NetworkDesign): the network design
        y0_per_channel (list of floats): one post-splitter power (dB) per
            connected branch, in branch-id order
        settings (OtdrSettings): the acquisition grid
        noise_sigma (float, optional): standard deviation of zero-mean
            Gaussian noise added to every sample, in dB. Default is 0.
        seed (int, optional): seed of the noise generator
        **overrides: forwarded to `params_from_design`

    Returns:
        Trace: the aggregate trace on the settings' grid
    """
    simulator = NetworkSimulator(design, settings, **overrides)
    logger.debug(
        "simulating %d channels on %d samples",
        len(simulator),
        settings.sample_count,
    )
    return simulator.simulate(y0_per_channel, noise_sigma, seed)
