"""Universal binary and M-ary classification from empirical types."""

from .classifiers import (ClassifierSpec, MultiStructure, Verdict, binary_reject_classify,
                          gutman_binary_classify, gutman_multi_classify, multi_structure,
                          multi_threshold, second_order_region_check, threshold_chi2_dual,
                          threshold_gutman_corrected, threshold_second_order,
                          unnikrishnan_classify)
from .distributions import (EmpiricalType, as_distribution, bernoulli, empirical_type,
                            in_typical_set, make_stream, mixture, point_mass, sample,
                            training_length)
from .divergences import (dispersion_v, gjs, gjs_gradient, gjs_hessian_diag, info_density,
                          kl, moments, renyi, third_moment_t, tilted, triple_div)
from .errors import AssumptionViolation, DomainError, EnumerationBudgetError
from .exponents import ExponentSolution, SlackTerms, exponent_f, exponent_fn, exponent_k, slack_terms
from .simulation import (ExactReport, SimulationReport, exact_binary, max_type1_search,
                         mc_binary, mc_multi, weak_convergence_check)

__version__ = "0.1.0"
