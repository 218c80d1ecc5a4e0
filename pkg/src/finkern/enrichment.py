"""Sums of kernels and the order structure they induce.

Hom-sets of kernels are commutative monoids under entrywise addition, which
yields two preorders: the additive order (P <= Q when some R has P + R = Q)
and pointwise absolute continuity (P << Q when Q's null entries are null for
P). On top of these live cancellativity, meets, singularity, Lebesgue
decompositions, Radon-Nikodym derivatives, and almost-everywhere equality,
all decided exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .semiring import ONE, ZERO, residual
from .spaces import FinSpace, Label
from .kernels import (
    Involution, Kernel, SpaceMismatchError, compose, dirac, effect,
    pushforward, row_masses,
)


class NotAbsolutelyContinuous(ValueError):
    """The requested derivative's numerator is not dominated by its base."""


class NoExactDerivative(ValueError):
    """No exact density exists (finite positive mass over an infinite atom)."""


class NotCancellative(ValueError):
    """An operation required a cancellative (all-finite) measure."""


def _check_same_type(p: Kernel, q: Kernel, what: str) -> None:
    if p.dom != q.dom or p.cod != q.cod:
        raise SpaceMismatchError(f"{what} needs kernels with equal dom and cod")


# ---------------------------------------------------------------------------
# the commutative-monoid structure


def kernel_add(p: Kernel, q: Kernel) -> Kernel:
    return p + q


def kernel_zero(dom: FinSpace, cod: FinSpace) -> Kernel:
    rows = tuple(tuple(ZERO for _ in cod.labels) for _ in dom.labels)
    return Kernel._new(dom, cod, rows)


def leq_kernel(p: Kernel, q: Kernel) -> bool:
    """The additive preorder, decided entrywise."""
    _check_same_type(p, q, "leq")
    return all(a <= b
               for r1, r2 in zip(p.entries, q.entries)
               for a, b in zip(r1, r2))


def leq_witness(p: Kernel, q: Kernel) -> Kernel | None:
    """A kernel R with p + R == q, or None when p <= q fails.

    Entrywise residuals assemble into a witness; this is the explicit
    construction the entrywise test is validated against.
    """
    _check_same_type(p, q, "leq")
    rows = []
    for r1, r2 in zip(p.entries, q.entries):
        row = []
        for a, b in zip(r1, r2):
            c = residual(a, b)
            if c is None:
                return None
            row.append(c)
        rows.append(tuple(row))
    return Kernel._new(p.dom, p.cod, tuple(rows))


# ---------------------------------------------------------------------------
# cancellativity and finiteness


def is_cancellative(kernel: Kernel) -> bool:
    """Whether sums with this kernel can be cancelled.

    On a finite space a row measure is sigma-finite exactly when it has no
    infinite atom, so this reduces to all entries being finite.
    """
    return all(v.is_finite for row in kernel.entries for v in row)


def cancellation_counterexample(kernel: Kernel) -> tuple[Kernel, Kernel] | None:
    """A pair (Q, R) with kernel+Q == kernel+R but Q != R, if one exists."""
    for i, row in enumerate(kernel.entries):
        for j, v in enumerate(row):
            if not v.is_finite:
                q = kernel_zero(kernel.dom, kernel.cod)
                rows = [list(r) for r in q.entries]
                rows[i][j] = ONE
                r = Kernel._new(kernel.dom, kernel.cod,
                                tuple(tuple(r) for r in rows))
                return q, r
    return None


def is_finite_morphism(kernel: Kernel) -> bool:
    """Every row has finite total mass."""
    return all(m.is_finite for m in row_masses(kernel))


# ---------------------------------------------------------------------------
# absolute continuity and singularity


def abs_cont(p: Kernel, q: Kernel) -> bool:
    """Pointwise absolute continuity: q's null entries are null for p."""
    _check_same_type(p, q, "abs_cont")
    return all(a.num == 0
               for r1, r2 in zip(p.entries, q.entries)
               for a, b in zip(r1, r2) if b.num == 0)


def abs_cont_basis(p: Kernel, q: Kernel) -> bool:
    """Definitional absolute-continuity check over the Dirac/indicator basis.

    Quantifies the pre-composition over all Dirac measures on the domain and
    the post-composition over all indicator effects on the codomain. This is
    exponential in the codomain size; it exists as the oracle the fast
    support check is validated against.
    """
    _check_same_type(p, q, "abs_cont")
    points = list(p.dom.labels)
    indices = range(len(p.cod))
    for x in points:
        delta = dirac(p.dom, x)
        for size in range(len(p.cod) + 1):
            for subset in combinations(indices, size):
                ind = effect(p.cod, [ONE if j in subset else ZERO
                                     for j in indices])
                if compose(ind, compose(q, delta)).entries[0][0].num == 0:
                    if compose(ind, compose(p, delta)).entries[0][0].num != 0:
                        return False
    return True


def equivalent(p: Kernel, q: Kernel) -> bool:
    """Mutual absolute continuity: equal supports, row by row."""
    return abs_cont(p, q) and abs_cont(q, p)


def meet(p: Kernel, q: Kernel) -> Kernel:
    """The canonical greatest lower bound for << : p masked to q's support."""
    _check_same_type(p, q, "meet")
    rows = tuple(
        tuple(a if b.num != 0 else ZERO for a, b in zip(r1, r2))
        for r1, r2 in zip(p.entries, q.entries))
    return Kernel._new(p.dom, p.cod, rows)


def is_singular(p: Kernel, q: Kernel) -> bool:
    """Whether p and q put mass on disjoint points, row by row."""
    _check_same_type(p, q, "is_singular")
    return all(a.num == 0 or b.num == 0
               for r1, r2 in zip(p.entries, q.entries)
               for a, b in zip(r1, r2))


# ---------------------------------------------------------------------------
# Lebesgue decompositions


@dataclass(frozen=True)
class Decomposition:
    """A split P = ac + si with ac << reference and si singular to it."""

    ac: Kernel
    si: Kernel

    @property
    def total(self) -> Kernel:
        return self.ac + self.si


def lebesgue_decompose(p: Kernel, q: Kernel) -> Decomposition:
    """Split p into the part dominated by q and the part singular to q."""
    _check_same_type(p, q, "lebesgue_decompose")
    ac_rows = []
    si_rows = []
    for r1, r2 in zip(p.entries, q.entries):
        ac_rows.append(tuple(a if b.num != 0 else ZERO for a, b in zip(r1, r2)))
        si_rows.append(tuple(a if b.num == 0 else ZERO for a, b in zip(r1, r2)))
    return Decomposition(
        ac=Kernel._new(p.dom, p.cod, tuple(ac_rows)),
        si=Kernel._new(p.dom, p.cod, tuple(si_rows)))


def involutive_decompose(mu: Kernel, phi: Involution) -> tuple[tuple[Label, ...], Decomposition]:
    """Decompose a measure against its own pushforward under an involution.

    Returns the set S of points where the measure and its pushforward are
    jointly supported, together with the decomposition mu = mu|_S + mu|_S^c.
    The pieces satisfy ac ~ phi.ac, si _|_ phi.si, and ac _|_ si.
    """
    if not mu.is_measure:
        raise SpaceMismatchError("involutive_decompose needs a measure")
    if mu.cod != phi.space:
        raise SpaceMismatchError("measure and involution live on different spaces")
    if not is_cancellative(mu):
        raise NotCancellative("involutive_decompose needs finite atoms")
    pushed = pushforward(phi, mu)
    decomposition = lebesgue_decompose(mu, pushed)
    support = tuple(x for x, v in zip(mu.cod.labels, decomposition.ac.entries[0])
                    if v.num != 0)
    return support, decomposition


# ---------------------------------------------------------------------------
# Radon-Nikodym derivatives and a.e. equality


def rn_derivative(pi: Kernel, mu: Kernel) -> Kernel:
    """The exact density r with pi = r * mu, as an effect.

    Convention: r is 0 on mu-null points (forced to carry no pi-mass by
    absolute continuity) and 1 on atoms where both measures are infinite.
    Raises NotAbsolutelyContinuous when pi is not dominated by mu, and
    NoExactDerivative at an infinite mu-atom carrying finite positive
    pi-mass, where no exact scalar exists under 0*oo = 0.
    """
    if not pi.is_measure or not mu.is_measure:
        raise SpaceMismatchError("rn_derivative needs two measures")
    if pi.cod != mu.cod:
        raise SpaceMismatchError("rn_derivative needs measures on the same space")
    values = []
    for x, (p, m) in zip(mu.cod.labels, zip(pi.entries[0], mu.entries[0])):
        if m.num == 0:
            if p.num != 0:
                raise NotAbsolutelyContinuous(
                    f"mass {p} at {x!r} outside the base measure's support")
            values.append(ZERO)
        elif m.is_finite:
            values.append(p / m)
        elif p.num == 0:
            values.append(ZERO)
        elif p.is_finite:
            raise NoExactDerivative(
                f"finite mass {p} over an infinite atom at {x!r}")
        else:
            values.append(ONE)
    return effect(mu.cod, values)


def ae_equal(mu: Kernel, p: Kernel, q: Kernel) -> bool:
    """Whether p and q agree at every point the measure charges."""
    if not mu.is_measure or mu.cod != p.dom:
        raise SpaceMismatchError("ae_equal needs a measure on the kernels' domain")
    _check_same_type(p, q, "ae_equal")
    if not is_cancellative(mu):
        raise NotCancellative("ae_equal needs finite atoms")
    for mass, r1, r2 in zip(mu.entries[0], p.entries, q.entries):
        if mass.num != 0 and r1 != r2:
            return False
    return True


def support_labels(mu: Kernel) -> tuple[Label, ...]:
    """The points a measure charges, in space order."""
    return tuple(x for x, v in zip(mu.cod.labels, mu.measure_values())
                 if v.num != 0)
