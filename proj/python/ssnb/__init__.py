from ._ssnb import *  # noqa: F401,F403
from ._ssnb import __version__  # noqa: F401
