__version__ = "0.1.0"

from .base import (  # noqa: F401
    Branch,
    NetworkDesign,
    OtdrSettings,
    OtdrSplitError,
    RegionOfInterest,
    Trace,
    distance_of_index,
    index_of_distance,
)
from .calibration import (  # noqa: F401
    CalibrationRecord,
    apply_calibration,
    compare,
)
from .config import dump_design, load_design  # noqa: F401
from .evolution import DeConfig, run  # noqa: F401
from .geomap import BranchGeometry, arc_length, locate_event  # noqa: F401
from .harness import SEQUENCES, load_measured, run_sequence  # noqa: F401
from .separator import pearson, separate, trace_correlation  # noqa: F401
from .superpose import superpose  # noqa: F401
from .traceio import read_trace, write_trace  # noqa: F401
from .waveform import simulate_channel, simulate_network  # noqa: F401
