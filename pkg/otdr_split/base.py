"""Base value types shared by every other module, and the error hierarchy"""
import math
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, Iterable, Optional, Tuple

import numpy as np

if TYPE_CHECKING:  # pragma: no cover
    from .geomap import BranchGeometry

DEFAULT_DISTANCE_RANGE_KM = 25.0
DEFAULT_RESOLUTION_M = 0.5
DEFAULT_PULSE_WIDTH_NS = 500.0
DEFAULT_AVERAGES = 60

# 500 ns of pulse resolves roughly 100 m of fiber
METERS_PER_PULSE_NS = 0.2

# tolerance used when comparing grid coordinates, in km
GRID_TOLERANCE_KM = 1e-9


class OtdrSplitError(ValueError):
    """Root of every error raised by this package"""


class ParameterError(OtdrSplitError):
    """A value violates the invariants of the type it was given to"""


class InvalidInputError(OtdrSplitError):
    """An input is not a number the operation can work with (e.g. NaN)"""


class OutOfRangeError(OtdrSplitError):
    """A distance or index lies outside the domain it must be in"""


class GridError(OtdrSplitError):
    """Traces that must share a sampling grid do not"""


class UndefinedCorrelationError(OtdrSplitError):
    """Pearson's correlation is undefined for zero-variance data"""


class GeometryError(OtdrSplitError):
    """A branch polyline is malformed or disagrees with its declared length"""


class CalibrationError(OtdrSplitError):
    """Field and design records cannot be compared"""


class DesignFileError(OtdrSplitError):
    """A design file does not validate into a network design"""


class _LineError(OtdrSplitError):
    def __init__(self, message: str, line_number: int) -> None:
        super().__init__("line {}: {}".format(line_number, message))
        self.line_number = line_number


class TraceFormatError(_LineError):
    """A trace file is malformed. The offending line is in `line_number`"""


class CalibrationFormatError(_LineError):
    """A calibration database line is corrupt. See `line_number`"""


@dataclass(frozen=True)
class OtdrSettings:
    """Acquisition parameters of the OTDR.

    Attributes:
        distance_range (float): the displayed distance range, in km
        resolution (float): spacing between samples, in meters
        pulse_width (float): laser pulse duration, in ns
        averages (int): number of averaged acquisitions
    """

    distance_range: float = DEFAULT_DISTANCE_RANGE_KM
    resolution: float = DEFAULT_RESOLUTION_M
    pulse_width: float = DEFAULT_PULSE_WIDTH_NS
    averages: int = DEFAULT_AVERAGES

    def __post_init__(self) -> None:
        if not self.distance_range > 0:
            raise ParameterError("distance range must be positive")
        if not self.resolution > 0:
            raise ParameterError("resolution must be positive")
        if not self.pulse_width > 0:
            raise ParameterError("pulse width must be positive")
        if self.averages < 1:
            raise ParameterError("at least one average is required")
        if self.sample_count < 2:
            raise ParameterError(
                "distance range {} km holds fewer than two samples at {} m"
                " resolution".format(self.distance_range, self.resolution)
            )

    @property
    def sample_count(self) -> int:
        """int : the number of samples spanning the distance range"""
        span = self.distance_range * 1000.0 / self.resolution
        return int(math.floor(span + 1e-9)) + 1

    @property
    def resolution_km(self) -> float:
        return self.resolution / 1000.0

    @property
    def spatial_resolution_m(self) -> float:
        """float : the length of fiber a single pulse smears an event over"""
        return self.pulse_width * METERS_PER_PULSE_NS

    @property
    def dead_zone_km(self) -> float:
        return self.spatial_resolution_m / 1000.0

    def empty_trace(self, fill: float = 0.0) -> "Trace":
        """A constant trace covering the full grid"""
        return Trace(0.0, self.resolution, np.full(self.sample_count, fill))


def index_of_distance(settings: OtdrSettings, z: float) -> int:
    """Convert a distance along the trace into a (0-based) sample index

    Args:
        settings (OtdrSettings): the acquisition settings defining the grid
        z (float): the distance, in km

    Returns:
        int: the index of the sample nearest to z

    Raises:
        OutOfRangeError: if z lies outside [0, distance_range]
    """
    if not -GRID_TOLERANCE_KM <= z <= settings.distance_range + 1e-6:
        raise OutOfRangeError(
            "distance {} km outside the range [0, {}] km".format(
                z, settings.distance_range
            )
        )
    index = int(math.floor(z * 1000.0 / settings.resolution + 0.5))
    return min(max(index, 0), settings.sample_count - 1)


def distance_of_index(settings: OtdrSettings, index: int) -> float:
    """Inverse of `index_of_distance`: the distance (km) of a sample"""
    if not 0 <= index < settings.sample_count:
        raise OutOfRangeError(
            "sample {} outside [0, {})".format(index, settings.sample_count)
        )
    return index * settings.resolution_km


@dataclass(frozen=True, eq=False)
class Trace:
    """A uniformly sampled two-way power-vs-distance record.

    The sample stored at position k sits at
    ``start_distance + k * resolution / 1000`` km.

    Attributes:
        start_distance (float): distance of the first sample, in km
        resolution (float): spacing between samples, in meters
        samples (ndarray): power of every sample, in dB. Read-only.
        disconnected (bool): True for the sentinel trace of an unplugged
            channel, whose samples are all -inf (zero intensity)
    """

    start_distance: float
    resolution: float
    samples: np.ndarray
    disconnected: bool = field(default=False)

    def __post_init__(self) -> None:
        samples = np.array(self.samples, dtype=float)
        if samples.ndim != 1 or samples.size == 0:
            raise ParameterError("a trace needs a non-empty 1-D sample array")
        if not self.resolution > 0:
            raise ParameterError("resolution must be positive")
        if np.isnan(samples).any():
            raise InvalidInputError("trace samples contain NaN")
        if self.disconnected:
            if not np.all(np.isneginf(samples)):
                raise ParameterError(
                    "a disconnected trace must hold only the -inf sentinel"
                )
        elif not np.isfinite(samples).all():
            raise InvalidInputError("trace samples must be finite")
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)

    @classmethod
    def disconnected_like(cls, other: "Trace") -> "Trace":
        """The zero-intensity sentinel trace on another trace's grid"""
        return cls(
            other.start_distance,
            other.resolution,
            np.full(len(other), -np.inf),
            disconnected=True,
        )

    def __len__(self) -> int:
        return self.samples.size

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Trace):
            return NotImplemented
        return (
            self.same_grid(other)
            and self.disconnected == other.disconnected
            and np.array_equal(self.samples, other.samples)
        )

    __hash__ = None  # type: ignore[assignment]

    @property
    def resolution_km(self) -> float:
        return self.resolution / 1000.0

    @property
    def distances(self) -> np.ndarray:
        """ndarray : the distance (km) of every sample"""
        return self.start_distance + np.arange(len(self)) * self.resolution_km

    @property
    def end_distance(self) -> float:
        return self.distance_of(len(self) - 1)

    def distance_of(self, index: int) -> float:
        return self.start_distance + index * self.resolution_km

    def same_grid(self, other: "Trace") -> bool:
        """Whether two traces share start, spacing and length"""
        return (
            len(self) == len(other)
            and abs(self.start_distance - other.start_distance)
            <= GRID_TOLERANCE_KM
            and abs(self.resolution - other.resolution)
            <= GRID_TOLERANCE_KM * 1000.0
        )

    def matches(self, settings: OtdrSettings) -> bool:
        """Whether the trace lies exactly on the grid described by settings"""
        return (
            len(self) == settings.sample_count
            and abs(self.start_distance) <= GRID_TOLERANCE_KM
            and abs(self.resolution - settings.resolution)
            <= GRID_TOLERANCE_KM * 1000.0
        )

    def with_samples(self, samples: Iterable[float]) -> "Trace":
        """A trace on the same grid carrying different samples"""
        return Trace(self.start_distance, self.resolution, np.asarray(samples))


@dataclass(frozen=True)
class Branch:
    """One output of the splitter, as documented in the design.

    Attributes:
        id (int): the splitter port, 1..N
        length (float): fiber length from the splitter to the fiber end, km
        insertion_loss (float): loss through the splitter port, dB
        loss_per_km (float): fiber attenuation, dB/km
        return_loss (float): optical return loss at the fiber end, dB
        connected (bool): False when the port is unplugged
        code (str, optional): external label (e.g. a surveillance DB code)
        geometry (BranchGeometry, optional): the cable's polyline
    """

    id: int
    length: float
    insertion_loss: float = 0.0
    loss_per_km: float = 0.2
    return_loss: float = 0.0
    connected: bool = True
    code: Optional[str] = None
    geometry: Optional["BranchGeometry"] = None

    def __post_init__(self) -> None:
        if self.id < 1:
            raise ParameterError("branch ids start at 1")
        if not self.length > 0:
            raise ParameterError(
                "branch {} must have a positive length".format(self.id)
            )
        if self.loss_per_km < 0:
            raise ParameterError("fiber attenuation cannot be negative")

    @property
    def label(self) -> str:
        if self.code:
            return self.code
        return "BR{:02d}".format(self.id)


@dataclass(frozen=True)
class NetworkDesign:
    """A feeder fiber, a 1xN splitter and its N branches.

    Attributes:
        feeder_length (float): distance from the OTDR to the splitter, km
        splitter_ratio (int): number of splitter output ports N
        branches (tuple of Branch): exactly N branches, ordered by id.
            Unplugged ports are kept with ``connected=False``.
        launch_level (float): trace level at the OTDR connector, dB
        feeder_loss_per_km (float): feeder attenuation, dB/km
    """

    feeder_length: float
    splitter_ratio: int
    branches: Tuple[Branch, ...]
    launch_level: float = 0.0
    feeder_loss_per_km: float = 0.2

    def __post_init__(self) -> None:
        branches = tuple(sorted(self.branches, key=lambda branch: branch.id))
        object.__setattr__(self, "branches", branches)
        if not self.feeder_length > 0:
            raise ParameterError("feeder length must be positive")
        if len(branches) != self.splitter_ratio:
            raise ParameterError(
                "a 1x{} splitter needs exactly {} branches, got {}".format(
                    self.splitter_ratio, self.splitter_ratio, len(branches)
                )
            )
        ids = [branch.id for branch in branches]
        if ids != list(range(1, self.splitter_ratio + 1)):
            raise ParameterError(
                "branch ids must be 1..{}, got {}".format(
                    self.splitter_ratio, ids
                )
            )
        if not self.connected_branches:
            raise ParameterError("at least one branch must be connected")

    @property
    def splitter_position(self) -> float:
        """float : distance of the splitter along the trace, km"""
        return self.feeder_length

    @property
    def connected_branches(self) -> Tuple[Branch, ...]:
        return tuple(branch for branch in self.branches if branch.connected)

    @property
    def connected_ids(self) -> Tuple[int, ...]:
        return tuple(branch.id for branch in self.connected_branches)

    def branch(self, branch_id: int) -> Branch:
        """Look a branch up by its port id

        Raises:
            ParameterError: if the splitter has no such port
        """
        for branch in self.branches:
            if branch.id == branch_id:
                return branch
        raise ParameterError(
            "the design has no branch {} (ports are 1..{})".format(
                branch_id, self.splitter_ratio
            )
        )

    def end_distance(self, branch_id: int) -> float:
        """Distance along the trace of a branch's fiber end, km"""
        return self.feeder_length + self.branch(branch_id).length

    def with_connected(self, branch_ids: Iterable[int]) -> "NetworkDesign":
        """The same network with only the given ports plugged in"""
        wanted = set(branch_ids)
        for branch_id in wanted:
            self.branch(branch_id)
        branches = tuple(
            replace(branch, connected=branch.id in wanted)
            for branch in self.branches
        )
        return replace(self, branches=branches)


@dataclass(frozen=True)
class RegionOfInterest:
    """A half-open span ``[start_index, end_index)`` of trace samples over
    which the splitter equation is valid (between the splitter and the dead
    zone of the farthest branch).
    """

    start_index: int
    end_index: int

    def __post_init__(self) -> None:
        if not 0 <= self.start_index < self.end_index:
            raise ParameterError(
                "region of interest needs 0 <= start < end, got"
                " [{}, {})".format(self.start_index, self.end_index)
            )

    @property
    def slice(self) -> slice:
        return slice(self.start_index, self.end_index)

    def __len__(self) -> int:
        return self.end_index - self.start_index

    def check(self, trace: Trace) -> None:
        if self.end_index > len(trace):
            raise GridError(
                "region of interest ends at {} but the trace has {}"
                " samples".format(self.end_index, len(trace))
            )

    def take(self, trace: Trace) -> np.ndarray:
        """The trace samples inside the region"""
        self.check(trace)
        return trace.samples[self.slice]

    @classmethod
    def for_design(
        cls,
        design: NetworkDesign,
        settings: OtdrSettings,
        dead_zone_samples: int = 15,
        splitter_guard: int = 0,
    ) -> "RegionOfInterest":
        """Default region: from the first sample after the splitter up to the
        end of the farthest connected branch's linear dead-zone decline.

        Args:
            design (NetworkDesign): the network
            settings (OtdrSettings): the acquisition grid
            dead_zone_samples (int, optional): samples of plateau plus decline
                that follow a fiber end. Default is 15 (11 + 4).
            splitter_guard (int, optional): extra samples skipped after the
                splitter. Default is 0 (the model has no splitter event).
        """
        splitter = index_of_distance(settings, design.splitter_position)
        farthest = max(
            design.end_distance(branch.id)
            for branch in design.connected_branches
        )
        end = index_of_distance(settings, farthest) + dead_zone_samples + 1
        return cls(
            splitter + 1 + splitter_guard, min(end, settings.sample_count)
        )
