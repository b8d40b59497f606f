"""Moments of Dirichlet and simplex splines, and the hypergeometric functions they evaluate."""

from .config import DEFAULT as DEFAULT_TOLERANCES, Tolerances
from .errors import (AccuracyError, DegenerateGeometryError, DomainError, InvalidArgumentError,
                     NonConvergenceError, ParameterError, PoleError, ResourceError,
                     SingularConfigurationError, SplineError, StrategyUnavailableError)
from .hypergeo import (DEFAULT_CONTROL, LAURICELLA_METHODS, LauricellaSpec, SeriesControl, appell_f4,
                       build_lauricella_knots, divided_difference_exp, f4_via_moments,
                       lauricella_fb, lauricella_genfun_check, lauricella_poly, r_function,
                       s_function, watson_product)
from .moments import (STRATEGIES, BezierCoefficients, MomentTable, base_moment_prop52, bernstein,
                      decasteljau, degree_elevate_check, dirichlet_moment, first_moment_prefix,
                      param_elevate_617, simplex_moment_alg53)
from .multiindex import appell_symbol, enumerate_indices, multinomial
from .simplex_core import (DirichletParams, Estimate, KnotSet, dirichlet_density,
                           dirichlet_monomial_integral, negative_moment, oracle_moment)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
