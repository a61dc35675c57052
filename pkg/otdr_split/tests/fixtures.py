"""Reference networks for use in tests"""
from pathlib import Path
from typing import Dict, Iterable, Optional

from otdr_split.base import Branch, NetworkDesign, OtdrSettings
from otdr_split.geomap import BranchGeometry
from otdr_split.traceio import write_trace
from otdr_split.waveform import default_y0, simulate_branch, simulate_network

FEEDER_LENGTH = 2.542

# (length km, insertion loss dB, return loss dB, loss dB/km) per branch
LAB_BRANCHES = (
    (5.6578, 10.375, 71.14, 0.190),
    (6.0108, 12.173, 59.61, 0.224),
    (5.7039, 11.438, 60.14, 0.200),
    (3.3251, 10.088, 73.25, 0.233),
    (2.5168, 10.804, 72.18, 0.193),
    (2.6294, 9.684, 78.01, 0.219),
    (19.4239, 11.219, 71.94, 0.203),
    (12.4718, 10.50, 72.65, 0.223),
)

# labels of the branches in the field surveillance database
LAB_CODES = (
    "PON02UDI",
    "PON03UDI",
    "PON03UDI",
    "PON04UDI",
    "PON05UDI",
    "PON06UDI",
    "PON07UDI",
    "PON08UDI",
)

# the database as recorded in the field, feeder included as branch 01
FIELD_DATABASE = (
    ("PON01UDI", 1, 2.5420),
    ("PON02UDI", 2, 5.6578),
    ("PON03UDI", 3, 6.0108),
    ("PON03UDI", 4, 5.7039),
    ("PON04UDI", 5, 3.3251),
    ("PON05UDI", 6, 2.5168),
    ("PON06UDI", 7, 2.6294),
    ("PON07UDI", 8, 19.4239),
    ("PON08UDI", 9, 12.4718),
)

FULL_SETTINGS = OtdrSettings()

# a coarser grid that keeps the slower tests fast
COARSE_SETTINGS = OtdrSettings(resolution=5.0)


def straight_geometry(length: float) -> BranchGeometry:
    return BranchGeometry(((0.0, 0.0), (length, 0.0)), length)


def lab_design(
    connected: Optional[Iterable[int]] = None,
    with_geometry: bool = False,
) -> NetworkDesign:
    """The 1x8 laboratory network

    Args:
        connected (list of ints, optional): the plugged-in branches.
            Default is all of them.
        with_geometry (bool, optional): give every branch a straight cable
            along the x axis. Default is False.
    """
    plugged = set(range(1, 9) if connected is None else connected)
    branches = tuple(
        Branch(
            id=i,
            length=length,
            insertion_loss=insertion,
            return_loss=return_loss,
            loss_per_km=loss,
            connected=i in plugged,
            code=LAB_CODES[i - 1],
            geometry=straight_geometry(length) if with_geometry else None,
        )
        for i, (length, insertion, return_loss, loss) in enumerate(
            LAB_BRANCHES, start=1
        )
    )
    return NetworkDesign(
        feeder_length=FEEDER_LENGTH,
        splitter_ratio=8,
        branches=branches,
        feeder_loss_per_km=0.2,
    )


def lab_y0(design: Optional[NetworkDesign] = None) -> Dict[int, float]:
    """Budget-derived post-splitter levels of every laboratory branch"""
    design = design or lab_design()
    return {
        branch.id: default_y0(design, branch.id) for branch in design.branches
    }


def two_branch_design(
    lengths=(0.8, 1.3), connected=(1, 2), feeder_length: float = 0.2
) -> NetworkDesign:
    """A small 1x2 network that fits in SHORT_SETTINGS"""
    return NetworkDesign(
        feeder_length=feeder_length,
        splitter_ratio=2,
        branches=tuple(
            Branch(i, length, insertion_loss=3.5, connected=i in connected)
            for i, length in enumerate(lengths, start=1)
        ),
    )


SHORT_SETTINGS = OtdrSettings(distance_range=2.0, resolution=1.0)


def write_measured_sequence(directory, spec, design, settings, y0):
    """Record a sequence the way a bench run leaves it: every channel alone
    in `channel_NN.csv`, every step in `step_NN.csv`"""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    channels = sorted({channel for step in spec.steps for channel in step})
    for channel in channels:
        write_trace(
            simulate_branch(design, channel, y0[channel], settings),
            directory / "channel_{:02d}.csv".format(channel),
        )
    for number, step in enumerate(spec.steps, start=1):
        write_trace(
            simulate_network(
                design.with_connected(step),
                [y0[channel] for channel in step],
                settings,
            ),
            directory / "step_{:02d}.csv".format(number),
        )
    return directory
