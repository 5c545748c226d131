"""Cell-free precoding, rate reduction, and companion solvers (C++ core)."""

from ._wwlab import *  # noqa: F401,F403
from ._wwlab import __version__  # noqa: F401
