"""Secure-rate and channel-monitoring toolkit for two-way quantum-secured communication.

Modules build bottom-up: :mod:`qsc.gaussian` (covariance algebra),
:mod:`qsc.link` (receiver statistics), :mod:`qsc.eve` (Holevo bounds),
:mod:`qsc.optimize` (secure-rate optimization), :mod:`qsc.monitor`
(coincidence monitoring) and :mod:`qsc.oracle` (independent checks).
"""

from .link import SystemParams
from .optimize import Configuration, OptimizerGrid, distance_sweep, optimize_operating_point, secure_rate_lb

__all__ = ["SystemParams", "Configuration", "OptimizerGrid", "distance_sweep",
           "optimize_operating_point", "secure_rate_lb"]
__version__ = "0.1.0"
