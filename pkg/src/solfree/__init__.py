"""solfree: exact computation with solution-free sets on Z/m and the circle.

Subpackages and modules:

- ``forms``     linear-form algebra (parsing, invariance, heights, weights)
- ``cyclic``    sets/functions on Z/m: solution measures, DFT, U^2 norm
- ``torus``     grid sets on the circle: exact measures, Eulerian weights
- ``transfer``  spectrum regularization and Freiman-isomorphism transfer
- ``rounding``  randomized rounding of [0,1] functions to sets
- ``removal``   constructive removal to reach solution-free remainders
- ``extremal``  maximal free densities and convergence experiments
- ``kernels``   compiled/pure integer convolution kernels
- ``cli``       command-line interface
"""

from .forms import FormFamily, LinearForm, parse_form
from .groups import TORUS

__all__ = ["FormFamily", "LinearForm", "parse_form", "TORUS"]

__version__ = "0.1.0"
