"""Norm-additive maps between positive cones of function spaces.

Weighted composition operators ``Tf(y) = h(y) f(tau(y))`` on finite discrete
spaces (exact rationals) and on the real line (piecewise functions), property
checks for black-box maps, recovery of ``(tau, h)`` from oracle access, and a
brute-force search over tiny grid cones.
"""

from .cone import (FiniteDiscrete, PLLine, DiscreteFunction, PLFunction, RationalFunction,
                   rational, zero, indicator, constant_function, tent, plateau, plateau_on,
                   add, scale, sup_norm, sup_distance, pointwise_min, pointwise_max,
                   clamped_difference, truncate, leq, equal, is_zero, coz, supp, disjoint)
from .errors import (NormAddError, InvalidInput, NotInCone, NotLocalizable, BudgetExhausted,
                     TauNotBijective, WeightZero, WeightUnstable, TooLarge, OracleFailure)
from .operators import (Permutation, PLHomeo, DiscreteWeights, PLWeight, RationalWeight,
                        WeightedCompositionOp, MapOracle, apply, invert, compose, identity_op,
                        as_oracle, random_op, validate_op)
from .verification import (Sampler, Witness, CheckReport, check_norm_additive, check_zero,
                           check_order_iso, check_biseparating, estimate_bound, check_lipschitz,
                           run_all_checks, replay)
from .recovery import (RecoveryConfig, RecoveryResult, ProbeFamily, localize_tau,
                       extract_weight, recover, recover_inverse, certify, check_duality)

__version__ = "0.1.0"
