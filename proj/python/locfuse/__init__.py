"""RSSI-based indoor localization toolkit: 5G/WiFi fusion, random forests,
classical baselines and the Monte Carlo evaluation protocol."""

from ._locfuse import *  # noqa: F401,F403
from ._locfuse import __doc__ as _core_doc  # noqa: F401

__version__ = "0.1.0"
