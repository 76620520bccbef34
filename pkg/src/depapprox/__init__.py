"""Approximations for sums of 1-dependent integer-valued random variables.

Exact laws of 2-runs, (k1, k2)-event counts and independent sums, their
factorial cumulants, Poisson-type approximants and the tools to measure how
fast they converge.
"""

from .approximants import Approximant, Kind, make_approximant
from .cumulants import CumulantSet, ConditionFlags, check_conditions, gamma_set, hat_e, hat_e_plus
from .errors import DegenerateParameterError, NumericalValidityError, PreconditionError, ResourceLimitError
from .measure import LatticeMeasure, convolve, delta, exp_measure, fourier_at, from_pmf, norm, truncate_tail
from .models import IndependentModel, PatternModel, build_model, k1k2, k1k2_sequence, two_runs

__version__ = "0.1.0"
