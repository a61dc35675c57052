from .test_base import *  # noqa: F401, F403
from .test_calibration import *  # noqa: F401, F403
from .test_cli import *  # noqa: F401, F403
from .test_config import *  # noqa: F401, F403
from .test_evolution import *  # noqa: F401, F403
from .test_geomap import *  # noqa: F401, F403
from .test_harness import *  # noqa: F401, F403
from .test_separator import *  # noqa: F401, F403
from .test_superpose import *  # noqa: F401, F403
from .test_traceio import *  # noqa: F401, F403
from .test_waveform import *  # noqa: F401, F403
