"""The textual model format consumed and emitted by the CLI.

A document is a sequence of declarations::

    space X { a b c }
    measure mu on X { a = 1/2  c = 1/2 }
    effect w on X { a = 2  b = inf }
    probability alpha on X { a = 1  b = 1/2 }
    kernel P : X -> X {
      a -> a = 1/2
      a -> b = 1/2
      b -> b = 1
    }
    involution phi on X { a -> b  b -> a }
    balancing met = metropolis

Comments run from ``#`` to end of line; entries may be separated by commas
or whitespace. Absent measure/effect/kernel entries are zero. Values are
``p/q``, integer strings, or ``inf``. Labels are atoms
(``[A-Za-z0-9_.*]+``), tuples ``(a,b)`` (any arity >= 2, nested), or tagged
coproduct points ``L:a`` / ``R:b``. Involutions list moved points as
``source -> image`` pairs and must be self-inverse; omitted points are
fixed. ``probability`` entries must lie in [0, 1].

``emit`` prints a canonical form; ``parse(emit(doc)) == doc`` for every
document, and all semantic validation happens at parse with line numbers.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .semiring import ExtNonneg, ONE
from .spaces import FinSpace, Label, Tagged
from .kernels import Involution, Kernel, effect, measure
from .mcmc import BALANCING_FUNCTIONS


class ModelError(ValueError):
    """A model-file problem, with the 1-based line it was found on."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass
class ModelDocument:
    """Named spaces, kernels, measures, effects, probabilities, involutions,
    and balancing-function selections."""

    spaces: dict[str, FinSpace] = field(default_factory=dict)
    measures: dict[str, Kernel] = field(default_factory=dict)
    effects: dict[str, Kernel] = field(default_factory=dict)
    probabilities: dict[str, Kernel] = field(default_factory=dict)
    kernels: dict[str, Kernel] = field(default_factory=dict)
    involutions: dict[str, Involution] = field(default_factory=dict)
    balancing: dict[str, str] = field(default_factory=dict)

    def space_name(self, space: FinSpace) -> str:
        for name, candidate in self.spaces.items():
            if candidate == space:
                return name
        raise ValueError(f"document declares no space equal to {space!r}")

    def add_space(self, name: str, space: FinSpace) -> None:
        if name in self.spaces:
            raise ValueError(f"duplicate space name {name!r}")
        self.spaces[name] = space


_ATOM_RE = re.compile(r"^[A-Za-z0-9_.*]+$")
_TOKEN_RE = re.compile(r"->|[(){},=]|[A-Za-z0-9_.*/:]+|\S")
_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


def format_label(label: Label) -> str:
    if isinstance(label, Tagged):
        return f"{label.side}:{format_label(label.label)}"
    if isinstance(label, tuple):
        return "(" + ",".join(format_label(p) for p in label) + ")"
    return str(label)


def parse_label(text: str) -> Label:
    """Parse a single label written in model-file syntax."""
    tokens = _Tokens(text)
    label = _parse_label(tokens)
    if tokens.peek() is not None:
        raise ModelError(tokens.line, f"trailing input after label: {tokens.peek()!r}")
    return label


class _Tokens:
    def __init__(self, text: str):
        self.items: list[tuple[str, int]] = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.split("#", 1)[0]
            for tok in _TOKEN_RE.findall(line):
                if tok == ",":
                    continue
                self.items.append((tok, lineno))
        self.pos = 0

    def peek(self) -> str | None:
        return self.items[self.pos][0] if self.pos < len(self.items) else None

    @property
    def line(self) -> int:
        if self.pos < len(self.items):
            return self.items[self.pos][1]
        return self.items[-1][1] if self.items else 1

    def take(self, what: str) -> str:
        if self.pos >= len(self.items):
            raise ModelError(self.line, f"unexpected end of document, expected {what}")
        tok, _ = self.items[self.pos]
        self.pos += 1
        return tok

    def next(self, expected: str) -> str:
        if self.pos >= len(self.items):
            raise ModelError(self.line,
                             f"unexpected end of document, expected {expected!r}")
        tok, line = self.items[self.pos]
        if tok != expected:
            raise ModelError(line, f"expected {expected!r}, got {tok!r}")
        self.pos += 1
        return tok


def _parse_label(tokens: _Tokens) -> Label:
    line = tokens.line
    tok = tokens.take("a label")
    if tok == "(":
        parts = [_parse_label(tokens)]
        while tokens.peek() != ")":
            parts.append(_parse_label(tokens))
        tokens.next(")")
        if len(parts) < 2:
            raise ModelError(line, "tuple labels need at least two components")
        return tuple(parts)
    if ":" in tok:
        side, _, rest = tok.partition(":")
        if side not in ("L", "R"):
            raise ModelError(line, f"tag must be L or R, got {side!r}")
        if rest:
            if not _ATOM_RE.match(rest):
                raise ModelError(line, f"bad atom {rest!r}")
            return Tagged(side, rest)
        return Tagged(side, _parse_label(tokens))
    if not _ATOM_RE.match(tok):
        raise ModelError(line, f"bad label {tok!r}")
    return tok


def _parse_value(tokens: _Tokens) -> ExtNonneg:
    line = tokens.line
    tok = tokens.take("a value")
    try:
        return ExtNonneg.parse(tok)
    except ValueError as exc:
        raise ModelError(line, str(exc)) from None


def _parse_point_map(tokens: _Tokens, space: FinSpace, what: str) -> list[ExtNonneg]:
    values = [ExtNonneg(0)] * len(space)
    seen: set[int] = set()
    tokens.next("{")
    while tokens.peek() != "}":
        line = tokens.line
        label = _parse_label(tokens)
        if label not in space:
            raise ModelError(line, f"label {format_label(label)} is not in the {what} space")
        idx = space.index(label)
        if idx in seen:
            raise ModelError(line, f"duplicate entry for {format_label(label)}")
        seen.add(idx)
        tokens.next("=")
        values[idx] = _parse_value(tokens)
    tokens.next("}")
    return values


def parse(text: str) -> ModelDocument:
    """Parse a document, validating every semantic invariant."""
    tokens = _Tokens(text)
    doc = ModelDocument()

    def fresh_name(kind: dict, what: str) -> str:
        line = tokens.line
        name = tokens.take("a name")
        if not _NAME_RE.match(name):
            raise ModelError(line, f"bad {what} name {name!r}")
        if name in kind:
            raise ModelError(line, f"duplicate {what} name {name!r}")
        return name

    def named_space() -> FinSpace:
        line = tokens.line
        name = tokens.take("a space name")
        if name not in doc.spaces:
            raise ModelError(line, f"unknown space {name!r}")
        return doc.spaces[name]

    while tokens.peek() is not None:
        line = tokens.line
        keyword = tokens.take("a declaration keyword")
        if keyword == "space":
            name = fresh_name(doc.spaces, "space")
            tokens.next("{")
            labels = []
            while tokens.peek() != "}":
                labels.append(_parse_label(tokens))
            tokens.next("}")
            try:
                doc.spaces[name] = FinSpace(labels)
            except ValueError as exc:
                raise ModelError(line, str(exc)) from None
        elif keyword in ("measure", "effect", "probability"):
            store = {"measure": doc.measures, "effect": doc.effects,
                     "probability": doc.probabilities}[keyword]
            name = fresh_name(store, keyword)
            tokens.next("on")
            space = named_space()
            values = _parse_point_map(tokens, space, keyword)
            if keyword == "probability":
                for x, v in zip(space.labels, values):
                    if not v <= ONE:
                        raise ModelError(
                            line, f"probability value {v} at {format_label(x)} exceeds 1")
            if keyword == "measure":
                store[name] = measure(space, values)
            else:
                store[name] = effect(space, values)
        elif keyword == "kernel":
            name = fresh_name(doc.kernels, "kernel")
            tokens.next(":")
            dom = named_space()
            tokens.next("->")
            cod = named_space()
            rows = [[ExtNonneg(0)] * len(cod) for _ in range(len(dom))]
            seen: set[tuple[int, int]] = set()
            tokens.next("{")
            while tokens.peek() != "}":
                entry_line = tokens.line
                src = _parse_label(tokens)
                if src not in dom:
                    raise ModelError(entry_line,
                                     f"label {format_label(src)} is not in the domain")
                tokens.next("->")
                dst = _parse_label(tokens)
                if dst not in cod:
                    raise ModelError(entry_line,
                                     f"label {format_label(dst)} is not in the codomain")
                key = (dom.index(src), cod.index(dst))
                if key in seen:
                    raise ModelError(entry_line, "duplicate kernel entry")
                seen.add(key)
                tokens.next("=")
                rows[key[0]][key[1]] = _parse_value(tokens)
            tokens.next("}")
            doc.kernels[name] = Kernel(dom, cod, rows)
        elif keyword == "involution":
            name = fresh_name(doc.involutions, "involution")
            tokens.next("on")
            space = named_space()
            mapping: dict[Label, Label] = {}
            tokens.next("{")
            while tokens.peek() != "}":
                entry_line = tokens.line
                src = _parse_label(tokens)
                tokens.next("->")
                dst = _parse_label(tokens)
                for lab in (src, dst):
                    if lab not in space:
                        raise ModelError(entry_line,
                                         f"label {format_label(lab)} is not in the space")
                if src in mapping:
                    raise ModelError(entry_line,
                                     f"{format_label(src)} mapped twice")
                mapping[src] = dst
            tokens.next("}")
            try:
                doc.involutions[name] = Involution.from_mapping(space, mapping)
            except ValueError as exc:
                raise ModelError(line, str(exc)) from None
        elif keyword == "balancing":
            name = fresh_name(doc.balancing, "balancing")
            tokens.next("=")
            fn_line = tokens.line
            fn = tokens.take("a balancing function name")
            if fn not in BALANCING_FUNCTIONS:
                raise ModelError(fn_line, f"unknown balancing function {fn!r}")
            doc.balancing[name] = fn
        else:
            raise ModelError(line, f"unknown declaration {keyword!r}")
    return doc


def emit(doc: ModelDocument) -> str:
    """Print a document in canonical form (zero entries omitted)."""
    out: list[str] = []
    for name, space in doc.spaces.items():
        labels = " ".join(format_label(x) for x in space.labels)
        out.append(f"space {name} {{ {labels} }}")
    for keyword, store in (("measure", doc.measures),
                           ("effect", doc.effects),
                           ("probability", doc.probabilities)):
        for name, kernel in store.items():
            space = kernel.cod if keyword == "measure" else kernel.dom
            values = (kernel.measure_values() if keyword == "measure"
                      else kernel.effect_values())
            body = "  ".join(f"{format_label(x)} = {v}"
                             for x, v in zip(space.labels, values) if v.num != 0)
            block = f"{{ {body} }}" if body else "{ }"
            out.append(f"{keyword} {name} on {doc.space_name(space)} {block}")
    for name, kernel in doc.kernels.items():
        out.append(f"kernel {name} : {doc.space_name(kernel.dom)} -> "
                   f"{doc.space_name(kernel.cod)} {{")
        for x, row in zip(kernel.dom.labels, kernel.entries):
            for y, v in zip(kernel.cod.labels, row):
                if v.num != 0:
                    out.append(f"  {format_label(x)} -> {format_label(y)} = {v}")
        out.append("}")
    for name, inv in doc.involutions.items():
        body = "  ".join(f"{format_label(a)} -> {format_label(b)}"
                         for a, b in inv.moved_pairs())
        block = f"{{ {body} }}" if body else "{ }"
        out.append(f"involution {name} on {doc.space_name(inv.space)} {block}")
    for name, fn in doc.balancing.items():
        out.append(f"balancing {name} = {fn}")
    return "\n".join(out) + "\n"
