"""Photon-pair rangefinding workbench: python surface over the C++ core."""

from twinrange._core import *  # noqa: F401,F403
from twinrange._core import __doc__  # noqa: F401

try:
    from twinrange._core import __version__  # noqa: F401
except ImportError:  # pragma: no cover - version baked in by the build
    __version__ = "0.0.0"
