"""Exact dense numerics for dissipative quantum spin lattices."""
from .errors import *  # noqa: F401,F403
from .operators import Operator, SiteFactorization, partial_trace, tensor, trace_norm, vn_entropy
from .channels import Superoperator, choi, diamond_bounds, is_cptp
from .lindblad import LindbladGenerator, build_generator, evolve, fixed_point, propagator, spectral_gap
from .lattice import LatticeGeometry, UniformFamily, builtin, check_assumptions, check_frustration_free, instantiate
from .mixing import contraction, local_mixing_time, mixing_time, rapid_mixing_fit
from .sigma import SigmaContext, variational_gap
from .correlations import area_law_scan, decay_scan, sandwich_check

__version__ = "0.1.0"
