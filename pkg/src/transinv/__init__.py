"""Learning under a finite collection of input transformations: worst-case
risk, coverage and regret rules, Multiplicative-Weights reductions to ERM,
brute-force VC checks for composed families, and a hypercube SGD
augmentation experiment."""

from .core import (ErrorMatrix, FiniteDistribution, InvariantViolation, LabeledSample,
                   PreconditionError, WeightedExampleSet, empirical_error, error_matrix,
                   population_error)
from .games import (coverage_select, minmax_erm, mw_erm_reduction, mw_regret_bound_check,
                    mw_regret_reduction, realizable_inflation, regret_minmax)
from .vc import (linear_closure_check, lowerbound_check, sample_size, sauer_bound_check,
                 vc_dimension)

__version__ = "0.1.0"
