"""Markov chain constructions and exact correctness checkers.

Builds involutive Metropolis-Hastings kernels (accept to the involution's
image, otherwise stay), checks invariance, detailed balance, the skew
variant, and the balancing condition that characterizes reversibility, and
recovers the classical Metropolis-Hastings chain, the exchange algorithm for
doubly-intractable targets, and the systematic-scan Gibbs sampler. Every
check is an exact decidable equality.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

from .semiring import ExtNonneg, ONE, ZERO, ext_sum, residual
from .spaces import FinSpace, Label, UNIT, product, product_many
from .kernels import (
    Involution, Kernel, SpaceMismatchError, compose, copy, delete,
    deterministic, effect, identity, is_normalized, lift_involution,
    pushforward, reweight, right_unitor, tensor,
)
from .enrichment import (
    NotCancellative, is_cancellative, rn_derivative,
)


class InfiniteMassError(ValueError):
    """An exact ratio was requested over an infinite mass."""


# ---------------------------------------------------------------------------
# balancing functions


@dataclass(frozen=True)
class BalancingFunction:
    """A named map [0, oo] -> [0, 1] with a(0) = 0 and a(t) = t * a(1/t)."""

    name: str
    fn: Callable[[ExtNonneg], ExtNonneg]

    def __call__(self, ratio: ExtNonneg) -> ExtNonneg:
        return self.fn(ratio)


def _metropolis(ratio: ExtNonneg) -> ExtNonneg:
    # min(1, t); the limit convention gives a(oo) = 1.
    if not ratio.is_finite or ratio >= ONE:
        return ONE
    return ratio


def _barker(ratio: ExtNonneg) -> ExtNonneg:
    # t / (1 + t); the limit convention gives a(oo) = 1.
    if not ratio.is_finite:
        return ONE
    return ExtNonneg(ratio.num, ratio.num + ratio.den)


METROPOLIS = BalancingFunction("metropolis", _metropolis)
BARKER = BalancingFunction("barker", _barker)

BALANCING_FUNCTIONS = {f.name: f for f in (METROPOLIS, BARKER)}


# ---------------------------------------------------------------------------
# problem container


@dataclass(frozen=True)
class MhProblem:
    """A target measure, an involution on its space, and an acceptance effect.

    The target must have finite atoms and the acceptance must be a
    probability (all values at most 1).
    """

    target: Kernel
    involution: Involution
    acceptance: Kernel

    def __post_init__(self):
        if not self.target.is_measure:
            raise SpaceMismatchError("target must be a measure")
        if self.target.cod != self.involution.space:
            raise SpaceMismatchError("involution lives on a different space")
        if not self.acceptance.is_effect or self.acceptance.dom != self.target.cod:
            raise SpaceMismatchError("acceptance must be an effect on the target space")
        if not is_cancellative(self.target):
            raise NotCancellative("target must have finite atoms")
        for value in self.acceptance.effect_values():
            if not value <= ONE:
                raise ValueError(f"acceptance value {value} exceeds 1")

    @property
    def space(self) -> FinSpace:
        return self.target.cod


class TheoremFlags(NamedTuple):
    reversible: bool
    balanced: bool


# ---------------------------------------------------------------------------
# invariance and reversibility


def is_invariant(target: Kernel, chain: Kernel) -> bool:
    """Whether the chain preserves the target: chain ∘ target == target."""
    _check_endo(target, chain)
    return compose(chain, target) == target


def detailed_balance_violation(target: Kernel, chain: Kernel) -> tuple[Label, Label] | None:
    """The first (x, y) with target[x]*chain[x][y] != target[y]*chain[y][x]."""
    _check_endo(target, chain)
    masses = target.entries[0]
    labels = target.cod.labels
    n = len(labels)
    for i in range(n):
        for j in range(i + 1, n):
            if masses[i] * chain.entries[i][j] != masses[j] * chain.entries[j][i]:
                return labels[i], labels[j]
    return None


def is_reversible(target: Kernel, chain: Kernel) -> bool:
    """Exact detailed balance of the chain against the target."""
    return detailed_balance_violation(target, chain) is None


def is_skew_reversible(target: Kernel, twist: Involution, chain: Kernel) -> bool:
    """Detailed balance twisted by a target-invariant involution.

    Checks target[x]*chain[x][y] == target[y]*(s∘chain∘s)[y][x] for all
    pairs, where s is the twist. Raises if the twist does not preserve the
    target (a precondition of the definition).
    """
    _check_endo(target, chain)
    lifted = lift_involution(twist)
    if not is_invariant(target, lifted):
        raise ValueError("twist involution does not preserve the target")
    conjugated = compose(lifted, compose(chain, lifted))
    masses = target.entries[0]
    n = len(masses)
    for i in range(n):
        for j in range(n):
            if masses[i] * chain.entries[i][j] != masses[j] * conjugated.entries[j][i]:
                return False
    return True


def _check_endo(target: Kernel, chain: Kernel) -> None:
    if not target.is_measure:
        raise SpaceMismatchError("target must be a measure")
    if chain.dom != target.cod or chain.cod != target.cod:
        raise SpaceMismatchError("chain must be an endomorphism on the target space")


# ---------------------------------------------------------------------------
# Bayesian inversion and state-space augmentation


def bayesian_inverse(prior: Kernel, forward: Kernel) -> Kernel:
    """The posterior kernel reversing ``forward`` across ``prior``.

    Rows at outputs the joint never reaches are set to the uniform
    distribution (any normalized row satisfies the defining equation).
    """
    if not prior.is_measure or prior.cod != forward.dom:
        raise SpaceMismatchError("prior must be a measure on the forward domain")
    joint_cols = []
    for j in range(len(forward.cod)):
        col = tuple(prior.entries[0][i] * forward.entries[i][j]
                    for i in range(len(forward.dom)))
        joint_cols.append(col)
    n = len(forward.dom)
    rows = []
    for col in joint_cols:
        mass = ext_sum(col)
        if not mass.is_finite or any(not v.is_finite for v in col):
            raise InfiniteMassError("bayesian_inverse needs finite joint masses")
        if mass.num == 0:
            rows.append(tuple(ExtNonneg(1, n) for _ in range(n)))
        else:
            rows.append(tuple(v / mass for v in col))
    return Kernel._new(forward.cod, forward.dom, tuple(rows))


def augment_reversible(target: Kernel, proposal: Kernel, inner: Kernel) -> tuple[Kernel, Kernel]:
    """Marginalize a chain on an augmented space back to the base space.

    ``proposal`` attaches an auxiliary coordinate (X -> Z, normalized rows);
    ``inner`` is an endomorphism on X (x) Z. Returns the marginal chain on X
    together with the augmented measure it should be checked against. If
    ``inner`` is reversible for that measure, the marginal chain is
    reversible for the target (and likewise for invariance).
    """
    base = target.cod
    if proposal.dom != base:
        raise SpaceMismatchError("proposal must start from the target space")
    aux = proposal.cod
    joint = product(base, aux)
    if inner.dom != joint or inner.cod != joint:
        raise SpaceMismatchError("inner chain must act on base (x) aux")
    embed = compose(tensor(identity(base), proposal), copy(base))
    augmented = compose(embed, target)
    marginalize = compose(right_unitor(base), tensor(identity(base), delete(aux)))
    chain = compose(marginalize, compose(inner, embed))
    return chain, augmented


# ---------------------------------------------------------------------------
# the involutive Metropolis-Hastings kernel


def build_mh(problem: MhProblem) -> Kernel:
    """accept * involution + (1 - accept) * identity; always normalized."""
    accept = problem.acceptance
    space = problem.space
    reject_values = []
    for value in accept.effect_values():
        rest = residual(value, ONE)
        if rest is None:
            raise ValueError(f"acceptance value {value} exceeds 1")
        reject_values.append(rest)
    reject = effect(space, reject_values)
    return (reweight(accept, lift_involution(problem.involution))
            + reweight(reject, identity(space)))


def _balancing_violation(target: Kernel, phi: Involution, accept: Kernel) -> Label | None:
    ratio = rn_derivative(pushforward(phi, target), target)
    masses = target.entries[0]
    alpha = accept.effect_values()
    r = ratio.effect_values()
    for i, mass in enumerate(masses):
        if mass.num == 0:
            continue
        if alpha[i] != alpha[phi.perm[i]] * r[i]:
            return target.cod.labels[i]
    return None


def balancing_violation(problem: MhProblem) -> Label | None:
    """The first charged point where accept != (accept ∘ phi) * density."""
    return _balancing_violation(problem.target, problem.involution,
                                problem.acceptance)


def check_balancing(problem: MhProblem) -> bool:
    """The balancing condition, checked at every point the target charges."""
    return balancing_violation(problem) is None


def balancing_alpha(balancing: BalancingFunction, target: Kernel,
                    phi: Involution) -> Kernel:
    """Derive an acceptance effect from a balancing function.

    Applies the function to the density of the pushforward target against
    the target; the resulting problem always satisfies the balancing
    condition.
    """
    ratio = rn_derivative(pushforward(phi, target), target)
    return effect(target.cod, [balancing(r) for r in ratio.effect_values()])


def verify_mh_theorem(problem: MhProblem) -> TheoremFlags:
    """Both sides of the reversibility characterization, independently.

    The flags are provably equal; computing both exposes the equivalence as
    a checkable fact rather than an assumption.
    """
    chain = build_mh(problem)
    return TheoremFlags(
        reversible=is_reversible(problem.target, chain),
        balanced=check_balancing(problem))


def build_skew_mh(problem: MhProblem, twist: Involution) -> Kernel:
    """Post-compose the MH kernel with a target-preserving involution."""
    lifted = lift_involution(twist)
    if not is_invariant(problem.target, lifted):
        raise ValueError("twist involution does not preserve the target")
    return compose(lifted, build_mh(problem))


def verify_skew_theorem(problem: MhProblem, twist: Involution) -> TheoremFlags:
    """Skew reversibility of the twisted kernel vs the balancing condition."""
    chain = build_skew_mh(problem, twist)
    return TheoremFlags(
        reversible=is_skew_reversible(problem.target, twist, chain),
        balanced=check_balancing(problem))


def first_summand_reversible(target: Kernel, phi: Involution,
                             accept: Kernel) -> TheoremFlags:
    """Detailed balance of the accept-move summand alone vs balancing.

    The summand accept * involution is generally unnormalized; reversibility
    still means the same exact detailed-balance identity.
    """
    summand = reweight(accept, lift_involution(phi))
    return TheoremFlags(
        reversible=is_reversible(target, summand),
        balanced=_balancing_violation(target, phi, accept) is None)


def reweighted_involution_identity(target: Kernel, phi: Involution) -> bool:
    """The involution is reversible up to reweighting by the density.

    Checks target[x]*[phi(x)=y] == target[y]*r[y]*[phi(y)=x] for all pairs,
    with r the density of the pushforward target against the target. Holds
    whenever the density exists.
    """
    ratio = rn_derivative(pushforward(phi, target), target)
    masses = target.entries[0]
    r = ratio.effect_values()
    n = len(masses)
    for i in range(n):
        for j in range(n):
            lhs = masses[i] * (ONE if phi.perm[i] == j else ZERO)
            rhs = masses[j] * r[j] * (ONE if phi.perm[j] == i else ZERO)
            if lhs != rhs:
                return False
    return True


# ---------------------------------------------------------------------------
# classical Metropolis-Hastings via augmentation


def mh_acceptance_ratio(num: ExtNonneg, den: ExtNonneg) -> ExtNonneg:
    """min(1, num/den) with the convention that a zero denominator gives 0.

    A zero denominator means the proposal is never launched from that
    configuration under the chain, so the value is free; 0 is canonical.
    """
    if den.num == 0:
        return ZERO
    ratio = num / den
    return ONE if ratio >= ONE or not ratio.is_finite else ratio


def classical_mh(target: Kernel, proposal: Kernel) -> tuple[Kernel, Kernel]:
    """The textbook Metropolis-Hastings chain, built two independent ways.

    ``viaInvolution`` augments the state with the proposed point, applies
    the involutive MH kernel for the swap involution, and marginalizes
    back; ``direct`` fills in the familiar matrix (off-diagonal
    proposal*acceptance, diagonal residual). The two are equal and both
    reversible for the target.
    """
    base = target.cod
    if proposal.dom != base or proposal.cod != base:
        raise SpaceMismatchError("proposal must be an endomorphism on the target space")
    if not is_normalized(proposal):
        raise ValueError("proposal rows must be normalized")
    if not is_cancellative(target):
        raise InfiniteMassError("classical_mh needs finite target masses")
    masses = target.entries[0]
    n = len(base)

    def alpha_at(i: int, j: int) -> ExtNonneg:
        return mh_acceptance_ratio(
            masses[j] * proposal.entries[j][i],
            masses[i] * proposal.entries[i][j])

    joint = product(base, base)
    swap_inv = Involution.from_function(joint, lambda p: (p[1], p[0]))
    accept = effect(joint, [alpha_at(base.index(p[0]), base.index(p[1]))
                            for p in joint.labels])
    inner = build_mh(MhProblem(
        target=compose(compose(tensor(identity(base), proposal), copy(base)), target),
        involution=swap_inv,
        acceptance=accept))
    via_involution, _ = augment_reversible(target, proposal, inner)

    rows = []
    for i in range(n):
        off = [proposal.entries[i][j] * alpha_at(i, j) if j != i else ZERO
               for j in range(n)]
        stay = residual(ext_sum(off), ONE)
        if stay is None:
            raise ValueError("proposal rows must be normalized")
        off[i] = stay
        rows.append(tuple(off))
    direct = Kernel._new(base, base, tuple(rows))
    return via_involution, direct


# ---------------------------------------------------------------------------
# the exchange algorithm


def exchange_algorithm(prior: Kernel, likelihood: Kernel, observed: Label,
                       proposal: Kernel) -> tuple[Kernel, Involution, Kernel]:
    """Set up the exchange algorithm for a doubly-intractable posterior.

    The chain targets the posterior over parameters X given one observation,
    augmented with synthetic data Z drawn from the proposed parameter, on
    the space X (x) (Z (x) X). The acceptance is computed from unnormalized
    prior and likelihood values; the likelihood's normalizing constants
    cancel in the ratio, so rescaling likelihood rows leaves the acceptance
    unchanged.

    Returns the augmented measure, the parameter-swap involution, and the
    acceptance effect. Feed them to MhProblem / build_mh / check_balancing.
    """
    base = prior.cod
    data = likelihood.cod
    if likelihood.dom != base:
        raise SpaceMismatchError("likelihood must map parameters to data")
    if proposal.dom != base or proposal.cod != base:
        raise SpaceMismatchError("proposal must be an endomorphism on parameters")
    obs_j = data.index(observed)

    prior_values = prior.entries[0]
    posterior_raw = [prior_values[i] * likelihood.entries[i][obs_j]
                     for i in range(len(base))]
    total = ext_sum(posterior_raw)
    if total.num == 0:
        raise ValueError("target has zero mass at the observed data")
    posterior = Kernel._new(UNIT, base,
                            (tuple(v / total for v in posterior_raw),))

    # X -> Z (x) X: propose a parameter, then draw synthetic data from it
    # (keeping the proposed parameter alongside the data).
    attach = compose(tensor(likelihood, identity(base)),
                     compose(copy(base), proposal))
    embed = compose(tensor(identity(base), attach), copy(base))
    augmented = compose(embed, posterior)

    aug_space = augmented.cod
    phi = Involution.from_function(
        aug_space, lambda p: (p[1][1], (p[1][0], p[0])))

    def alpha_at(point) -> ExtNonneg:
        x, (z, y) = point
        xi, zi, yi = base.index(x), data.index(z), base.index(y)
        num = (prior_values[yi] * likelihood.entries[yi][obs_j]
               * proposal.entries[yi][xi] * likelihood.entries[xi][zi])
        den = (prior_values[xi] * likelihood.entries[xi][obs_j]
               * proposal.entries[xi][yi] * likelihood.entries[yi][zi])
        return mh_acceptance_ratio(num, den)

    accept = effect(aug_space, [alpha_at(p) for p in aug_space.labels])
    return augmented, phi, accept


# ---------------------------------------------------------------------------
# conditionals and the systematic-scan Gibbs sampler


def conditional(joint: Kernel, given: str = "left") -> Kernel:
    """A conditional of a measure on a binary product space.

    With ``given="left"`` returns f: X -> Y with joint[(x, y)] ==
    marginal[x] * f[x][y]; ``given="right"`` conditions on the second
    factor. Rows at marginal-null points are set to the uniform
    distribution (any normalized row satisfies the defining equation).
    """
    if not joint.is_measure:
        raise SpaceMismatchError("conditional needs a measure")
    left_sp, right_sp = _split_product(joint.cod)
    if given == "right":
        flipped = compose(
            deterministic(joint.cod, product(right_sp, left_sp),
                          lambda p: (p[1], p[0])),
            joint)
        return conditional(flipped, given="left")
    if given != "left":
        raise ValueError("given must be 'left' or 'right'")
    n, m = len(left_sp), len(right_sp)
    values = joint.entries[0]
    rows = []
    for i in range(n):
        block = values[i * m:(i + 1) * m]
        mass = ext_sum(block)
        if not mass.is_finite:
            raise InfiniteMassError("conditional needs finite marginal masses")
        if mass.num == 0:
            rows.append(tuple(ExtNonneg(1, m) for _ in range(m)))
        else:
            rows.append(tuple(v / mass for v in block))
    return Kernel._new(left_sp, right_sp, tuple(rows))


def _split_product(space: FinSpace) -> tuple[FinSpace, FinSpace]:
    """Recover the factors of a space built by ``product``."""
    firsts: list[Label] = []
    seconds: list[Label] = []
    for label in space.labels:
        if not isinstance(label, tuple) or len(label) != 2:
            raise SpaceMismatchError(f"label {label!r} is not a product pair")
        if label[0] not in firsts:
            firsts.append(label[0])
        if label[1] not in seconds and len(firsts) == 1:
            seconds.append(label[1])
    left_sp = FinSpace(firsts)
    right_sp = FinSpace(seconds)
    if product(left_sp, right_sp) != space:
        raise SpaceMismatchError("space is not a binary product in index order")
    return left_sp, right_sp


def gibbs_site_kernels(joint: Kernel, factors: Sequence[FinSpace]) -> list[Kernel]:
    """One single-site resampling kernel per coordinate of the joint space.

    The joint space carries flat tuple labels over ``factors``. For each
    coordinate, an explicit relabeling kernel moves it to the last slot,
    the coordinate is deleted, the remaining coordinates are copied, and
    the conditional refills the slot; the inverse relabeling restores the
    original coordinate order.
    """
    factors = tuple(factors)
    if len(factors) < 2:
        raise SpaceMismatchError("gibbs needs at least two factors")
    space = product_many(factors)
    if not joint.is_measure or joint.cod != space:
        raise SpaceMismatchError("joint must be a measure on the product of the factors")
    if not is_cancellative(joint):
        raise NotCancellative("gibbs needs a finite joint measure")
    sites = []
    for i, factor in enumerate(factors):
        rest = factors[:i] + factors[i + 1:]
        rest_sp = product_many(rest)
        grouped_sp = product(rest_sp, factor)

        def group(label, i=i):
            return (label[:i] + label[i + 1:], label[i])

        def ungroup(label, i=i):
            rest_part, coord = label
            return rest_part[:i] + (coord,) + rest_part[i:]

        to_grouped = deterministic(space, grouped_sp, group)
        from_grouped = deterministic(grouped_sp, space, ungroup)
        resample = conditional(compose(to_grouped, joint), given="left")
        update = compose(
            tensor(identity(rest_sp), resample),
            compose(copy(rest_sp),
                    compose(right_unitor(rest_sp),
                            tensor(identity(rest_sp), delete(factor)))))
        sites.append(compose(from_grouped, compose(update, to_grouped)))
    return sites


def gibbs(joint: Kernel, factors: Sequence[FinSpace]) -> Kernel:
    """The systematic-scan Gibbs sampler: site updates composed in order.

    The result preserves the joint measure exactly.
    """
    sites = gibbs_site_kernels(joint, factors)
    chain = sites[0]
    for site in sites[1:]:
        chain = compose(site, chain)
    return chain
