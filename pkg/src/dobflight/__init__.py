"""Translational force control of a multirotor with a disturbance observer.

Subpackages and modules:

* :mod:`dobflight.linsys` -- SISO transfer functions, frequency response, Tustin filters
* :mod:`dobflight.vehicle` -- rigid-body plant and attitude PD loop
* :mod:`dobflight.conversion` -- acceleration to (pitch, roll, thrust) converters
* :mod:`dobflight.dob` -- disturbance observer
* :mod:`dobflight.robust` -- uncertainty weights, mu upper bound, tau boundaries
* :mod:`dobflight.sim` -- closed-loop scenarios and metrics
* :mod:`dobflight.cli` -- command line front end
"""

__version__ = "0.1.0"
