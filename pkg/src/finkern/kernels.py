"""Kernels between finite spaces, valued in the exact semiring [0, oo].

A kernel from X to Y is a |X| x |Y| matrix of masses; measures are kernels
out of the unit space (one row) and effects are kernels into it (one
column). Composition is the Chapman-Kolmogorov sum, the monoidal product is
the Kronecker product, and each space carries copy/delete/swap structure.

``P >> Q`` runs P then Q (i.e. ``compose(Q, P)``); ``P @ Q`` is the
monoidal product; ``P + Q`` is the entrywise sum.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence, Union

from .semiring import ExtNonneg, INF, ONE, ZERO, ext_sum
from .spaces import FinSpace, Label, UNIT, product

Entry = Union[ExtNonneg, int]


class SpaceMismatchError(ValueError):
    """Raised when an operation is applied to incompatible spaces."""


def _coerce(value: Entry) -> ExtNonneg:
    if isinstance(value, ExtNonneg):
        return value
    if isinstance(value, int):
        return ExtNonneg(value)
    raise TypeError(f"kernel entries must be ExtNonneg or int, got {value!r}")


class Kernel:
    """An ExtNonneg-valued matrix with named domain and codomain spaces."""

    __slots__ = ("dom", "cod", "entries")

    def __init__(self, dom: FinSpace, cod: FinSpace, entries: Iterable[Iterable[Entry]]):
        rows = tuple(tuple(_coerce(v) for v in row) for row in entries)
        if len(rows) != len(dom):
            raise SpaceMismatchError(
                f"expected {len(dom)} rows for {dom!r}, got {len(rows)}")
        for row in rows:
            if len(row) != len(cod):
                raise SpaceMismatchError(
                    f"expected {len(cod)} columns for {cod!r}, got {len(row)}")
        self.dom = dom
        self.cod = cod
        self.entries = rows

    @classmethod
    def _new(cls, dom: FinSpace, cod: FinSpace, rows) -> "Kernel":
        # Internal fast path: rows already a tuple of tuples of ExtNonneg.
        k = object.__new__(cls)
        k.dom = dom
        k.cod = cod
        k.entries = rows
        return k

    @classmethod
    def from_function(cls, dom: FinSpace, cod: FinSpace,
                      fn: Callable[[Label, Label], Entry]) -> "Kernel":
        return cls(dom, cod, ((fn(x, y) for y in cod.labels) for x in dom.labels))

    def entry(self, x: Label, y: Label) -> ExtNonneg:
        return self.entries[self.dom.index(x)][self.cod.index(y)]

    def row(self, x: Label) -> tuple[ExtNonneg, ...]:
        return self.entries[self.dom.index(x)]

    @property
    def is_measure(self) -> bool:
        return self.dom == UNIT

    @property
    def is_effect(self) -> bool:
        return self.cod == UNIT

    def measure_values(self) -> tuple[ExtNonneg, ...]:
        if not self.is_measure:
            raise SpaceMismatchError("not a measure (domain is not the unit space)")
        return self.entries[0]

    def effect_values(self) -> tuple[ExtNonneg, ...]:
        if not self.is_effect:
            raise SpaceMismatchError("not an effect (codomain is not the unit space)")
        return tuple(row[0] for row in self.entries)

    def is_zero(self) -> bool:
        return all(v.num == 0 for row in self.entries for v in row)

    def __add__(self, other):
        if not isinstance(other, Kernel):
            return NotImplemented
        if self.dom != other.dom or self.cod != other.cod:
            raise SpaceMismatchError("kernel sum needs equal dom and cod")
        rows = tuple(
            tuple(a + b for a, b in zip(r1, r2))
            for r1, r2 in zip(self.entries, other.entries))
        return Kernel._new(self.dom, self.cod, rows)

    def __rshift__(self, other):
        """``P >> Q``: run P, then Q."""
        return compose(other, self)

    def __matmul__(self, other):
        return tensor(self, other)

    def __eq__(self, other):
        if not isinstance(other, Kernel):
            return NotImplemented
        return (self.dom == other.dom and self.cod == other.cod
                and self.entries == other.entries)

    def __hash__(self):
        return hash((self.dom, self.cod, self.entries))

    def __repr__(self):
        body = "; ".join(
            " ".join(str(v) for v in row) for row in self.entries[:4])
        if len(self.entries) > 4:
            body += "; ..."
        return f"Kernel({self.dom!r} -> {self.cod!r}: {body})"


def measure(space: FinSpace, values: Union[Sequence[Entry], Mapping[Label, Entry]]) -> Kernel:
    """A measure on ``space``: a kernel out of the unit space.

    ``values`` is either a full sequence in point order or a mapping from
    labels to masses (absent labels get 0).
    """
    if isinstance(values, Mapping):
        row = [values.get(x, ZERO) for x in space.labels]
    else:
        row = list(values)
    return Kernel(UNIT, space, (row,))


def effect(space: FinSpace, values: Union[Sequence[Entry], Mapping[Label, Entry]]) -> Kernel:
    """An effect on ``space``: a kernel into the unit space."""
    if isinstance(values, Mapping):
        col = [values.get(x, ZERO) for x in space.labels]
    else:
        col = list(values)
    return Kernel(space, UNIT, ((v,) for v in col))


def uniform(space: FinSpace) -> Kernel:
    """The uniform probability measure on a nonempty space."""
    n = len(space)
    if n == 0:
        raise SpaceMismatchError("no uniform measure on the empty space")
    return measure(space, [ExtNonneg(1, n)] * n)


# ---------------------------------------------------------------------------
# composition and monoidal product


def compose(later: Kernel, earlier: Kernel) -> Kernel:
    """Sequential composition ``later ∘ earlier`` (Chapman-Kolmogorov)."""
    if earlier.cod != later.dom:
        raise SpaceMismatchError(
            f"cannot compose: middle spaces differ ({earlier.cod!r} vs {later.dom!r})")
    width = len(later.cod)
    out_rows = []
    for row in earlier.entries:
        acc = [ZERO] * width
        for mid, mass in enumerate(row):
            if mass.num == 0:
                continue
            later_row = later.entries[mid]
            for j, w in enumerate(later_row):
                if w.num != 0:
                    acc[j] = acc[j] + mass * w
        out_rows.append(tuple(acc))
    return Kernel._new(earlier.dom, later.cod, tuple(out_rows))


def tensor(left: Kernel, right: Kernel) -> Kernel:
    """Parallel composition: the Kronecker product of the two matrices."""
    dom = product(left.dom, right.dom)
    cod = product(left.cod, right.cod)
    rows = []
    for lrow in left.entries:
        for rrow in right.entries:
            rows.append(tuple(a * b for a in lrow for b in rrow))
    return Kernel._new(dom, cod, tuple(rows))


# ---------------------------------------------------------------------------
# structure morphisms


def identity(space: FinSpace) -> Kernel:
    n = len(space)
    rows = tuple(
        tuple(ONE if i == j else ZERO for j in range(n)) for i in range(n))
    return Kernel._new(space, space, rows)


def deterministic(dom: FinSpace, cod: FinSpace, fn: Callable[[Label], Label]) -> Kernel:
    """The kernel of a function: unit mass at ``fn(x)`` in each row."""
    rows = []
    for x in dom.labels:
        j = cod.index(fn(x))
        rows.append(tuple(ONE if k == j else ZERO for k in range(len(cod))))
    return Kernel._new(dom, cod, tuple(rows))


def copy(space: FinSpace) -> Kernel:
    """Copy: X -> X (x) X, unit mass at (x, x)."""
    return deterministic(space, product(space, space), lambda x: (x, x))


def delete(space: FinSpace) -> Kernel:
    """Delete: X -> I, the all-ones effect."""
    return Kernel._new(space, UNIT, tuple((ONE,) for _ in space.labels))


def swap(left: FinSpace, right: FinSpace) -> Kernel:
    """Swap: X (x) Y -> Y (x) X."""
    return deterministic(product(left, right), product(right, left),
                         lambda p: (p[1], p[0]))


def dirac(space: FinSpace, point: Label) -> Kernel:
    """The Dirac measure at ``point``: I -> X with unit mass at the point."""
    j = space.index(point)
    return Kernel._new(
        UNIT, space,
        (tuple(ONE if k == j else ZERO for k in range(len(space))),))


def left_unitor(space: FinSpace) -> Kernel:
    """Relabeling I (x) X -> X."""
    return deterministic(product(UNIT, space), space, lambda p: p[1])


def right_unitor(space: FinSpace) -> Kernel:
    """Relabeling X (x) I -> X."""
    return deterministic(product(space, UNIT), space, lambda p: p[0])


def associator(a: FinSpace, b: FinSpace, c: FinSpace) -> Kernel:
    """Relabeling (A (x) B) (x) C -> A (x) (B (x) C)."""
    return deterministic(
        product(product(a, b), c), product(a, product(b, c)),
        lambda p: (p[0][0], (p[0][1], p[1])))


STRUCTURE_KINDS = ("identity", "copy", "delete", "swap", "dirac")


def structure(kind: str, space: FinSpace, other: FinSpace | None = None,
              point: Label | None = None) -> Kernel:
    """Build a structure morphism by name (dispatcher for the CLI layer)."""
    if kind == "identity":
        return identity(space)
    if kind == "copy":
        return copy(space)
    if kind == "delete":
        return delete(space)
    if kind == "swap":
        if other is None:
            raise ValueError("swap needs a second space")
        return swap(space, other)
    if kind == "dirac":
        if point is None:
            raise ValueError("dirac needs a point label")
        return dirac(space, point)
    raise ValueError(f"unknown structure morphism {kind!r}")


# ---------------------------------------------------------------------------
# involutions


@dataclass(frozen=True)
class Involution:
    """A self-inverse permutation of a space's points."""

    space: FinSpace
    perm: tuple[int, ...]

    def __post_init__(self):
        n = len(self.space)
        perm = tuple(self.perm)
        object.__setattr__(self, "perm", perm)
        if sorted(perm) != list(range(n)):
            raise ValueError("not a permutation of the space's points")
        for i, j in enumerate(perm):
            if perm[j] != i:
                raise ValueError(
                    f"permutation is not self-inverse at index {i}")

    @classmethod
    def identity(cls, space: FinSpace) -> "Involution":
        return cls(space, tuple(range(len(space))))

    @classmethod
    def from_mapping(cls, space: FinSpace, mapping: Mapping[Label, Label]) -> "Involution":
        """Build from moved points; labels absent from the mapping stay fixed."""
        perm = list(range(len(space)))
        for src, dst in mapping.items():
            perm[space.index(src)] = space.index(dst)
        return cls(space, tuple(perm))

    @classmethod
    def from_function(cls, space: FinSpace, fn: Callable[[Label], Label]) -> "Involution":
        return cls(space, tuple(space.index(fn(x)) for x in space.labels))

    def __call__(self, label: Label) -> Label:
        return self.space.labels[self.perm[self.space.index(label)]]

    def moved_pairs(self) -> tuple[tuple[Label, Label], ...]:
        """All (source, image) pairs with source != image."""
        return tuple(
            (self.space.labels[i], self.space.labels[j])
            for i, j in enumerate(self.perm) if i != j)


def lift_involution(phi: Involution) -> Kernel:
    """The deterministic kernel of an involution (a permutation matrix)."""
    return deterministic(phi.space, phi.space, phi)


def pushforward(phi: Involution, mu: Kernel) -> Kernel:
    """The pushforward of a measure under an involution."""
    return compose(lift_involution(phi), mu)


# ---------------------------------------------------------------------------
# structural predicates and the effect algebra


def row_masses(kernel: Kernel) -> tuple[ExtNonneg, ...]:
    return tuple(ext_sum(row) for row in kernel.entries)


def row_mass(kernel: Kernel) -> Kernel:
    """The effect sending each input point to its total output mass."""
    return Kernel._new(kernel.dom, UNIT,
                       tuple((ext_sum(row),) for row in kernel.entries))


def is_normalized(kernel: Kernel) -> bool:
    """Every row carries total mass exactly 1."""
    return all(ext_sum(row) == ONE for row in kernel.entries)


def is_substochastic(kernel: Kernel) -> bool:
    """Every row carries total mass at most 1."""
    return all(ext_sum(row) <= ONE for row in kernel.entries)


def is_copyable(kernel: Kernel) -> bool:
    """Whether the kernel commutes with copy.

    On finite spaces this holds exactly when each row has at most one
    nonzero entry and that entry is idempotent under multiplication
    (1 or oo); see the copy-equation oracle in the test suite.
    """
    for row in kernel.entries:
        nonzero = [v for v in row if v.num != 0]
        if len(nonzero) > 1:
            return False
        if nonzero and nonzero[0] != ONE and nonzero[0] != INF:
            return False
    return True


def effect_mul(left: Kernel, right: Kernel) -> Kernel:
    """Pointwise product of two effects on the same space; unit is delete."""
    if not left.is_effect or not right.is_effect:
        raise SpaceMismatchError("effect_mul needs two effects")
    if left.dom != right.dom:
        raise SpaceMismatchError("effect_mul needs effects on the same space")
    rows = tuple((a[0] * b[0],) for a, b in zip(left.entries, right.entries))
    return Kernel._new(left.dom, UNIT, rows)


def reweight(weight: Kernel, kernel: Kernel) -> Kernel:
    """Scale each row of ``kernel`` by the effect ``weight`` at that point."""
    if not weight.is_effect:
        raise SpaceMismatchError("reweight needs an effect")
    if weight.dom != kernel.dom:
        raise SpaceMismatchError("reweight needs an effect on the kernel's domain")
    rows = tuple(
        tuple(w[0] * v for v in row)
        for w, row in zip(weight.entries, kernel.entries))
    return Kernel._new(kernel.dom, kernel.cod, rows)
