"""finkern: exact kernel calculus on finite state spaces.

Kernels over the semiring [0, oo] with exact rational entries, the
copy/delete structure of finite probability, order-theoretic tooling
(absolute continuity, meets, Lebesgue decompositions, Radon-Nikodym
derivatives), and constructions with decidable correctness checks for
Metropolis-Hastings-type Markov chains.
"""

from .semiring import INF, ONE, ZERO, ExtNonneg, SemiringDivisionError, residual
from .spaces import EMPTY, UNIT, FinSpace, Tagged, product, product_many
from .kernels import (
    Involution, Kernel, SpaceMismatchError, associator, compose, copy, delete,
    deterministic, dirac, effect, effect_mul, identity, is_copyable,
    is_normalized, is_substochastic, left_unitor, lift_involution, measure,
    pushforward, reweight, right_unitor, row_mass, structure, swap, tensor,
    uniform,
)
from .enrichment import (
    Decomposition, NoExactDerivative, NotAbsolutelyContinuous,
    NotCancellative, abs_cont, ae_equal, equivalent, involutive_decompose,
    is_cancellative, is_finite_morphism, is_singular, kernel_add, kernel_zero,
    lebesgue_decompose, leq_kernel, leq_witness, meet, rn_derivative,
    support_labels,
)
from .mcmc import (
    BALANCING_FUNCTIONS, BARKER, METROPOLIS, BalancingFunction, MhProblem,
    TheoremFlags, augment_reversible, balancing_alpha, bayesian_inverse,
    build_mh, build_skew_mh, check_balancing, classical_mh, conditional,
    exchange_algorithm, first_summand_reversible, gibbs, gibbs_site_kernels,
    is_invariant, is_reversible, is_skew_reversible, verify_mh_theorem,
    verify_skew_theorem,
)
from .coproducts import copair, distributivity_iso, injection, oplus
from .sampler import ChainRun, empirical, run_chain, to_float, tv_distance
from .modelfile import ModelDocument, ModelError, emit, parse

__version__ = "0.1.0"
