"""Exact and sampled tools for adaptivity gaps in stochastic probing."""
from .adaptive import (LEAF, Leaf, Node, adap_online_value, adap_value, alg_value, deepness, opt_adaptive,
                       probe, random_tree, stem)
from .analysis import (GapReport, bfns_check, concentration_experiment, disjointify_fact_check, gap_report,
                       stem_inequality, stemmass_check)
from .constraints import (BudgetPathConstraint, CardinalityConstraint, PartitionMatroidConstraint,
                          PathWitnessConstraint, PrefixDagConstraint)
from .core import GroundSet, enumerate_outcomes, sample_subset
from .errors import LimitError, PreconditionError, ProbingError, StateBudgetError, StructuralError, TheoremViolation
from .functions import (AllTypesFunction, CoverageFunction, CutFunction, PartitionRankFunction, TableFunction,
                        XosFunction, contract, fmax, fmax_half_estimate, verify_monotone, verify_submodular)
from .instances import Instance, gen_alltypes_lb, gen_partition_lb, gen_random, gen_xos_tree_lb
from .nonadaptive import (ProbePlan, greedy_nonadaptive, natural_nonadaptive, opt_nonadaptive, plan_value,
                          xos_algorithm1)

__version__ = "0.1.0"
