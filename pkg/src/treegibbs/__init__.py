"""Period-2 boundary-law equations for Gibbs measures on Cayley trees with
spin space [0, 1]: kernels, Nystrom operators, a uniqueness check and a
multistart 2-cycle solver."""
from ._backend import NAME as BACKEND
from .analysis import band_limits, pk_band, shift_norm_check, sign_change, uniqueness_condition
from .errors import KernelBuildError, NonPositiveError, RuleMismatchError
from .grid import GridFunction, QuadratureRule, build_rule
from .kernels import Kernel, build_family, find_k0, kernel_from_xi
from .operators import CyclePair, a_to_h44, a_to_hammerstein, apply_A, apply_H, cycle_residual, rescale_pair
from .solver import SolverConfig, find_cycles, iterate_pair, verify_catalog

__version__ = "0.1.0"
