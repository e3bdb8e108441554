"""Numerics for quantum states seen by uniformly accelerated observers.

Modules cover Gaussian-state algebra (gaussian), imaginary-order Bessel
machinery (specfun), quadrature utilities (quad), field-mode construction
(modes), the inertial-to-accelerated Gaussian channel (channel),
three-detector cavity entanglement harvesting (harvest), and decay-based
clock rates (clock).  Import submodules directly, e.g.
``from unruhlab import gaussian``.
"""

__version__ = "0.1.0"
