"""Heat and Poisson semigroups of Laguerre-type operators, their kernel bounds,
weighted maximal inequalities and transference between Laguerre systems."""
from .special import *  # noqa: F401,F403
from .functions import *  # noqa: F401,F403
from .quadrature import *  # noqa: F401,F403
from .systems import *  # noqa: F401,F403
from .heat import *  # noqa: F401,F403
from .poisson import *  # noqa: F401,F403
from .maximal import *  # noqa: F401,F403
from .weights import *  # noqa: F401,F403
from .reports import *  # noqa: F401,F403
from .transference import *  # noqa: F401,F403
from .experiments import *  # noqa: F401,F403
from .cli import (  # noqa: F401
    ExperimentConfig,
    cmd_converge,
    cmd_kernel,
    cmd_transfer,
    cmd_weights,
)

__version__ = "0.1.0"
