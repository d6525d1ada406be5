"""Monotone AND/OR access formulas.

Surface grammar (``&`` binds tighter than ``|``)::

    or   := and ("|" and)*
    and  := atom ("&" atom)*
    atom := IDENT | "(" or ")"

Parsed formulas are normalized (same-operator nesting flattened, unary
gates collapsed) and every variable occurrence is labelled with its
per-attribute occurrence number ``j`` (from 1) and its left-to-right
``address`` (from 0).  Those addresses are the PRF inputs for shares, so
they are fixed on the original formula and never shifted by the public
``Y`` leaves that the advanced scheme adds.
"""

from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass, field
from typing import Iterator, Union

from .errors import FormatError, FormulaSyntaxError, SizeExceeded

DEFAULT_MAX_LEAVES = 512
IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


@dataclass(frozen=True)
class Var:
    attr: str
    j: int = 0
    address: int = 0


@dataclass(frozen=True)
class Y:
    """Public leaf of a fictitious trustee; ``value`` is its published share."""

    index: int
    value: int


@dataclass(frozen=True)
class Gate:
    children: tuple

    op = ""

    def __init__(self, *children):
        if len(children) == 1 and isinstance(children[0], (list, tuple)):
            children = children[0]
        object.__setattr__(self, "children", tuple(children))

    def __repr__(self):
        return f"{type(self).__name__}({', '.join(map(repr, self.children))})"


class And(Gate):
    op = "and"


class Or(Gate):
    op = "or"


Node = Union[Var, Y, And, Or]


def iter_leaves(node: Node) -> Iterator[Union[Var, Y]]:
    if isinstance(node, Gate):
        for child in node.children:
            yield from iter_leaves(child)
    else:
        yield node


@dataclass(frozen=True)
class Formula:
    """Normalized, addressed formula with no ``Y`` leaves."""

    root: Node
    size: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "size", sum(1 for _ in iter_leaves(self.root)))

    def leaves(self) -> list[Var]:
        return list(iter_leaves(self.root))

    def attributes(self) -> frozenset[str]:
        return frozenset(leaf.attr for leaf in iter_leaves(self.root))

    def __str__(self):
        return render(self)


@dataclass(frozen=True)
class ModifiedFormula:
    """A formula after the share transform, carrying public ``Y`` leaves."""

    root: Node

    def leaves(self) -> list[Union[Var, Y]]:
        return list(iter_leaves(self.root))

    @property
    def leaf_count(self) -> int:
        return sum(1 for _ in iter_leaves(self.root))

    def y_leaves(self) -> list[Y]:
        return [leaf for leaf in iter_leaves(self.root) if isinstance(leaf, Y)]

    def var_leaves(self) -> list[Var]:
        return [leaf for leaf in iter_leaves(self.root) if isinstance(leaf, Var)]

    def attributes(self) -> frozenset[str]:
        return frozenset(leaf.attr for leaf in self.var_leaves())

    def original(self) -> Formula:
        return strip_y(self)


# -- parsing ---------------------------------------------------------------

_TOKEN_RE = re.compile(r"\s*(?:(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[&|()])|(?P<bad>\S))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while True:
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            break
        if m.group("ident"):
            tokens.append(("ident", m.group("ident"), m.start("ident")))
        elif m.group("op"):
            tokens.append((m.group("op"), m.group("op"), m.start("op")))
        else:
            raise FormulaSyntaxError(m.start("bad"), "identifier, '&', '|', '(' or ')'",
                                     m.group("bad"))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def parse(self) -> Node:
        node = self.or_expr()
        kind, value, pos = self.peek()
        if kind != "eof":
            raise FormulaSyntaxError(pos, "'&', '|' or end of input", value)
        return node

    def or_expr(self) -> Node:
        items = [self.and_expr()]
        while self.peek()[0] == "|":
            self.take()
            items.append(self.and_expr())
        return items[0] if len(items) == 1 else Or(items)

    def and_expr(self) -> Node:
        items = [self.atom()]
        while self.peek()[0] == "&":
            self.take()
            items.append(self.atom())
        return items[0] if len(items) == 1 else And(items)

    def atom(self) -> Node:
        kind, value, pos = self.take()
        if kind == "ident":
            return Var(value)
        if kind == "(":
            node = self.or_expr()
            kind, value, pos = self.take()
            if kind != ")":
                raise FormulaSyntaxError(pos, "')'", value)
            return node
        raise FormulaSyntaxError(pos, "identifier or '('", value)


def parse(text: str, max_leaves: int = DEFAULT_MAX_LEAVES) -> Formula:
    """Parse, normalize and address a formula.

    >>> inspect_rows(parse("(X1 & X2) | (X1 & X3)"))
    [('X1', 1, 0), ('X2', 1, 1), ('X1', 2, 2), ('X3', 1, 3)]
    """
    root = _Parser(text).parse()
    count = sum(1 for _ in iter_leaves(root))
    if count > max_leaves:
        raise SizeExceeded(f"formula has {count} leaves, limit is {max_leaves}")
    return Formula(address(normalize(root)))


def normalize(node: Node) -> Node:
    """Flatten same-operator nesting and collapse single-child gates."""
    if not isinstance(node, Gate):
        return node
    flat = []
    for child in node.children:
        child = normalize(child)
        if type(child) is type(node):
            flat.extend(child.children)
        else:
            flat.append(child)
    if len(flat) == 1:
        return flat[0]
    return type(node)(flat)


def address(node: Node) -> Node:
    """Relabel variables with occurrence numbers and left-to-right addresses."""
    occurrences: dict[str, int] = {}
    counter = itertools.count()

    def walk(n: Node) -> Node:
        if isinstance(n, Gate):
            return type(n)([walk(c) for c in n.children])
        if isinstance(n, Var):
            occurrences[n.attr] = occurrences.get(n.attr, 0) + 1
            return Var(n.attr, occurrences[n.attr], next(counter))
        return n

    return walk(node)


def render(f: Union[Formula, Node]) -> str:
    """Text form that :func:`parse` reads back to an equal formula."""
    node = f.root if isinstance(f, (Formula, ModifiedFormula)) else f

    def go(n: Node, parent=None) -> str:
        if isinstance(n, Var):
            return n.attr
        if isinstance(n, Y):
            return f"Y{n.index}"
        sep = " & " if isinstance(n, And) else " | "
        text = sep.join(go(c, n) for c in n.children)
        if parent is not None:
            text = f"({text})"
        return text

    return go(node)


def inspect_rows(f: Formula) -> list[tuple[str, int, int]]:
    return [(leaf.attr, leaf.j, leaf.address) for leaf in f.leaves()]


def evaluate(f: Union[Formula, ModifiedFormula, Node], attrs) -> bool:
    """Whether holding ``attrs`` satisfies the formula (``Y`` leaves count as held)."""
    node = f.root if isinstance(f, (Formula, ModifiedFormula)) else f
    held = frozenset(attrs)

    def go(n: Node) -> bool:
        if isinstance(n, Var):
            return n.attr in held
        if isinstance(n, Y):
            return True
        if isinstance(n, And):
            return all(go(c) for c in n.children)
        return any(go(c) for c in n.children)

    return go(node)


def strip_y(f: Union[ModifiedFormula, Node]) -> Formula:
    """Remove ``Y`` leaves and re-normalize, recovering the original formula."""
    node = f.root if isinstance(f, ModifiedFormula) else f

    def go(n: Node):
        if isinstance(n, Y):
            return None
        if isinstance(n, Var):
            return n
        kept = [c for c in (go(c) for c in n.children) if c is not None]
        if not kept:
            return None
        return type(n)(kept)

    root = go(node)
    if root is None:
        raise FormatError("$", "formula has no variable leaves")
    return Formula(normalize(root))


# -- canonical JSON --------------------------------------------------------

def to_obj(f: Union[Formula, ModifiedFormula, Node]) -> dict:
    """JSON-ready dict with keys in canonical order."""
    node = f.root if isinstance(f, (Formula, ModifiedFormula)) else f

    def go(n: Node) -> dict:
        if isinstance(n, Var):
            return {"op": "var", "attr": n.attr, "j": n.j, "addr": n.address}
        if isinstance(n, Y):
            return {"op": "y", "index": n.index, "value": str(n.value)}
        return {"op": n.op, "children": [go(c) for c in n.children]}

    return go(node)


def canonical_json(obj) -> bytes:
    return json.dumps(obj, separators=(",", ":"), ensure_ascii=False).encode("utf-8")


def serialize(f: Union[Formula, ModifiedFormula]) -> bytes:
    return canonical_json(to_obj(f))


DEC_RE = re.compile(r"0|[1-9][0-9]*")
_KEYS = {
    "and": {"op", "children"},
    "or": {"op", "children"},
    "var": {"op", "attr", "j", "addr"},
    "y": {"op", "index", "value"},
}


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _node_from_obj(obj, path: str) -> Node:
    if not isinstance(obj, dict):
        raise FormatError(path, "expected object")
    op = obj.get("op")
    if op not in _KEYS:
        raise FormatError(f"{path}.op", f"unknown op {op!r}")
    if set(obj) != _KEYS[op]:
        raise FormatError(path, f"{op} node must have exactly keys {sorted(_KEYS[op])}")
    if op == "var":
        attr = obj["attr"]
        if not isinstance(attr, str) or not IDENT_RE.fullmatch(attr):
            raise FormatError(f"{path}.attr", "invalid attribute identifier")
        for key in ("j", "addr"):
            if not _is_int(obj[key]) or obj[key] < 0:
                raise FormatError(f"{path}.{key}", "expected non-negative integer")
        return Var(attr, obj["j"], obj["addr"])
    if op == "y":
        if not _is_int(obj["index"]) or obj["index"] < 1:
            raise FormatError(f"{path}.index", "expected positive integer")
        value = obj["value"]
        if not isinstance(value, str) or not DEC_RE.fullmatch(value):
            raise FormatError(f"{path}.value", "expected decimal string")
        return Y(obj["index"], int(value))
    children = obj["children"]
    if not isinstance(children, list) or len(children) < 2:
        raise FormatError(f"{path}.children", "gate needs at least two children")
    nodes = [_node_from_obj(c, f"{path}.children[{i}]") for i, c in enumerate(children)]
    gate = And if op == "and" else Or
    for i, child in enumerate(nodes):
        if isinstance(child, gate):
            raise FormatError(f"{path}.children[{i}]", f"nested {op} is not normalized")
    return gate(nodes)


def _check_labels(root: Node, max_leaves: int) -> None:
    occurrences: dict[str, int] = {}
    expected_addr = 0
    expected_y = 1
    var_count = 0
    for n, leaf in enumerate(iter_leaves(root)):
        if isinstance(leaf, Var):
            occurrences[leaf.attr] = occurrences.get(leaf.attr, 0) + 1
            if leaf.j != occurrences[leaf.attr]:
                raise FormatError(f"$.leaf[{n}].j", f"expected occurrence {occurrences[leaf.attr]}")
            if leaf.address != expected_addr:
                raise FormatError(f"$.leaf[{n}].addr", f"expected address {expected_addr}")
            expected_addr += 1
            var_count += 1
        else:
            if leaf.index != expected_y:
                raise FormatError(f"$.leaf[{n}].index", f"expected Y index {expected_y}")
            expected_y += 1
    if var_count == 0:
        raise FormatError("$", "formula has no variable leaves")
    if var_count > max_leaves:
        raise SizeExceeded(f"formula has {var_count} leaves, limit is {max_leaves}")


def from_obj(obj, q: int | None = None,
             max_leaves: int = DEFAULT_MAX_LEAVES) -> Union[Formula, ModifiedFormula]:
    """Validate a JSON object; returns :class:`ModifiedFormula` iff it has ``Y`` leaves."""
    root = _node_from_obj(obj, "$")
    _check_labels(root, max_leaves)
    ys = [leaf for leaf in iter_leaves(root) if isinstance(leaf, Y)]
    if not ys:
        return Formula(root)
    if q is not None:
        for y in ys:
            if y.value >= q:
                raise FormatError(f"$.Y{y.index}.value", "value outside Z_q")
    modified = ModifiedFormula(root)
    strip_y(modified)
    return modified


def deserialize(data: Union[bytes, str], q: int | None = None,
                max_leaves: int = DEFAULT_MAX_LEAVES) -> Union[Formula, ModifiedFormula]:
    try:
        obj = json.loads(data)
    except (ValueError, UnicodeDecodeError) as exc:
        raise FormatError("$", f"invalid JSON: {exc}") from None
    return from_obj(obj, q=q, max_leaves=max_leaves)
