"""Loading and saving JSON design files.

A design file describes the acquisition settings and the network::

    {
      "settings": {"distance_range_km": 25.0, "resolution_m": 0.5,
                   "pulse_width_ns": 500.0, "averages": 60},
      "feeder": {"length_km": 2.542, "loss_per_km": 0.2},
      "splitter_ratio": 8,
      "launch_level_db": 0.0,
      "branches": [
        {"id": 1, "length_km": 5.6578, "insertion_loss_db": 10.375,
         "return_loss_db": 71.14, "loss_per_km": 0.19, "connected": true,
         "code": "PON02UDI",
         "geometry": {"vertices": [[0, 0], [5.6578, 0]],
                      "geographic": false, "tolerance": 0.01}}
      ]
    }

"settings", "launch_level_db" and every branch key but "id" and "length_km"
are optional. Unknown keys are rejected.
"""
import json
import logging
from pathlib import Path
from typing import Any, Dict, Mapping, Tuple, Union

from .base import (
    DEFAULT_AVERAGES,
    DEFAULT_DISTANCE_RANGE_KM,
    DEFAULT_PULSE_WIDTH_NS,
    DEFAULT_RESOLUTION_M,
    Branch,
    DesignFileError,
    NetworkDesign,
    OtdrSettings,
    OtdrSplitError,
)
from .geomap import (
    DEFAULT_LENGTH_TOLERANCE,
    BranchGeometry,
    validate_geometry,
    vertices_from,
)

logger = logging.getLogger(__name__)

_TOP_KEYS = {
    "settings",
    "feeder",
    "splitter_ratio",
    "launch_level_db",
    "branches",
}
_SETTINGS_KEYS = {
    "distance_range_km",
    "resolution_m",
    "pulse_width_ns",
    "averages",
}
_FEEDER_KEYS = {"length_km", "loss_per_km"}
_BRANCH_KEYS = {
    "id",
    "length_km",
    "insertion_loss_db",
    "return_loss_db",
    "loss_per_km",
    "connected",
    "code",
    "geometry",
}
_GEOMETRY_KEYS = {"vertices", "geographic", "tolerance"}


def _section(document: Any, where: str, allowed: set, required=()) -> dict:
    if not isinstance(document, Mapping):
        raise DesignFileError("{} must be an object".format(where))
    unknown = sorted(set(document) - allowed)
    if unknown:
        raise DesignFileError(
            "unknown key(s) in {}: {}".format(where, ", ".join(unknown))
        )
    missing = [key for key in required if key not in document]
    if missing:
        raise DesignFileError(
            "missing key(s) in {}: {}".format(where, ", ".join(missing))
        )
    return dict(document)


def _number(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise DesignFileError("{} must be a number".format(where))
    return float(value)


def _integer(value: Any, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise DesignFileError("{} must be an integer".format(where))
    return value


def _settings(document: Any) -> OtdrSettings:
    section = _section(document, "settings", _SETTINGS_KEYS)
    return OtdrSettings(
        distance_range=_number(
            section.get("distance_range_km", DEFAULT_DISTANCE_RANGE_KM),
            "settings.distance_range_km",
        ),
        resolution=_number(
            section.get("resolution_m", DEFAULT_RESOLUTION_M),
            "settings.resolution_m",
        ),
        pulse_width=_number(
            section.get("pulse_width_ns", DEFAULT_PULSE_WIDTH_NS),
            "settings.pulse_width_ns",
        ),
        averages=_integer(
            section.get("averages", DEFAULT_AVERAGES), "settings.averages"
        ),
    )


def _geometry(document: Any, where: str, length: float) -> BranchGeometry:
    section = _section(document, where, _GEOMETRY_KEYS, ("vertices",))
    geographic = section.get("geographic", False)
    if not isinstance(geographic, bool):
        raise DesignFileError("{}.geographic must be a boolean".format(where))
    geometry = BranchGeometry(
        vertices=vertices_from(section["vertices"]),
        declared_length=length,
        geographic=geographic,
        tolerance=_number(
            section.get("tolerance", DEFAULT_LENGTH_TOLERANCE),
            where + ".tolerance",
        ),
    )
    validate_geometry(geometry)
    return geometry


def _branch(document: Any, position: int) -> Branch:
    where = "branches[{}]".format(position)
    section = _section(document, where, _BRANCH_KEYS, ("id", "length_km"))
    length = _number(section["length_km"], where + ".length_km")
    connected = section.get("connected", True)
    if not isinstance(connected, bool):
        raise DesignFileError("{}.connected must be a boolean".format(where))
    code = section.get("code")
    if code is not None and not isinstance(code, str):
        raise DesignFileError("{}.code must be a string".format(where))
    geometry = None
    if section.get("geometry") is not None:
        geometry = _geometry(section["geometry"], where + ".geometry", length)
    return Branch(
        id=_integer(section["id"], where + ".id"),
        length=length,
        insertion_loss=_number(
            section.get("insertion_loss_db", 0.0), where + ".insertion_loss_db"
        ),
        loss_per_km=_number(
            section.get("loss_per_km", 0.2), where + ".loss_per_km"
        ),
        return_loss=_number(
            section.get("return_loss_db", 0.0), where + ".return_loss_db"
        ),
        connected=connected,
        code=code,
        geometry=geometry,
    )


def parse_design(document: Any) -> Tuple[NetworkDesign, OtdrSettings]:
    """Validate a decoded design document

    Args:
        document (dict): the decoded JSON

    Returns:
        tuple of (NetworkDesign, OtdrSettings): the network and its grid

    Raises:
        DesignFileError: for any structural or semantic problem
    """
    top = _section(
        document,
        "the design",
        _TOP_KEYS,
        ("feeder", "splitter_ratio", "branches"),
    )
    try:
        settings = _settings(top.get("settings", {}))
        feeder = _section(top["feeder"], "feeder", _FEEDER_KEYS, ("length_km",))
        branches = top["branches"]
        if not isinstance(branches, list):
            raise DesignFileError("branches must be a list")
        design = NetworkDesign(
            feeder_length=_number(feeder["length_km"], "feeder.length_km"),
            splitter_ratio=_integer(top["splitter_ratio"], "splitter_ratio"),
            branches=tuple(
                _branch(branch, i) for i, branch in enumerate(branches)
            ),
            launch_level=_number(
                top.get("launch_level_db", 0.0), "launch_level_db"
            ),
            feeder_loss_per_km=_number(
                feeder.get("loss_per_km", 0.2), "feeder.loss_per_km"
            ),
        )
    except DesignFileError:
        raise
    except OtdrSplitError as error:
        raise DesignFileError(str(error))
    return design, settings


def load_design(
    path: Union[str, Path]
) -> Tuple[NetworkDesign, OtdrSettings]:
    """Read and validate a JSON design file

    Raises:
        DesignFileError: if the file cannot be read, is not JSON, or does not
            describe a valid network
    """
    path = Path(path)
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except OSError as error:
        raise DesignFileError("cannot read {}: {}".format(path, error))
    except ValueError as error:
        raise DesignFileError("{} is not valid JSON: {}".format(path, error))
    design, settings = parse_design(document)
    logger.info(
        "loaded 1x%d design from %s (%d connected branches)",
        design.splitter_ratio,
        path,
        len(design.connected_branches),
    )
    return design, settings


def design_document(
    design: NetworkDesign, settings: OtdrSettings
) -> Dict[str, Any]:
    """The JSON-ready representation of a design"""
    branches = []
    for branch in design.branches:
        entry = {
            "id": branch.id,
            "length_km": branch.length,
            "insertion_loss_db": branch.insertion_loss,
            "return_loss_db": branch.return_loss,
            "loss_per_km": branch.loss_per_km,
            "connected": branch.connected,
        }  # type: Dict[str, Any]
        if branch.code is not None:
            entry["code"] = branch.code
        if branch.geometry is not None:
            entry["geometry"] = {
                "vertices": [list(v) for v in branch.geometry.vertices],
                "geographic": branch.geometry.geographic,
                "tolerance": branch.geometry.tolerance,
            }
        branches.append(entry)
    return {
        "settings": {
            "distance_range_km": settings.distance_range,
            "resolution_m": settings.resolution,
            "pulse_width_ns": settings.pulse_width,
            "averages": settings.averages,
        },
        "feeder": {
            "length_km": design.feeder_length,
            "loss_per_km": design.feeder_loss_per_km,
        },
        "splitter_ratio": design.splitter_ratio,
        "launch_level_db": design.launch_level,
        "branches": branches,
    }


def dump_design(
    design: NetworkDesign, settings: OtdrSettings, path: Union[str, Path]
) -> Path:
    """Write a design file that `load_design` reads back unchanged"""
    path = Path(path)
    path.write_text(
        json.dumps(design_document(design, settings), indent=2) + "\n",
        encoding="utf-8",
    )
    return path
