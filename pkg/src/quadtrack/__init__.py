"""Quadrotor trajectory-tracking toolkit.

Simulation and synthesis for horizontal trajectory tracking with a saturated
altitude loop, a disturbance-generator internal model, and a high-gain
extended observer that works without pitch/roll measurements. The `simulator`
module assembles the closed loop; `cli` runs scenarios and writes CSV logs.
"""

__version__ = "0.1.0"
