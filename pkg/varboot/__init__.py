"""Module contain varboot."""
__version__ = "0.1.0"

from ._typing import FloatArray  # noqa: F401, E402
from .asymptotics import *  # noqa: F403, E402
from .bootstrap import *  # noqa: F403, E402
from .data import *  # noqa: F403, E402
from .enumcls import *  # noqa: F403, E402
from .estimation import *  # noqa: F403, E402
from .exceptions import *  # noqa: F403, E402
from .interval import *  # noqa: F403, E402
from .montecarlo import *  # noqa: F403, E402
from .rolling import *  # noqa: F403, E402
from .seeding import *  # noqa: F403, E402
from .store import ResultStore  # noqa: F401, E402
from .volatility import *  # noqa: F403, E402
