"""Benaloh-Leichter generalized secret sharing over Z_q.

OR gates hand their secret unchanged to every child; AND gates split it
into uniform summands.  The advanced scheme is checked against this one.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from .crypto import RandomSource, from_hex, random_below
from .errors import FormatError, NotSatisfied
from .formula import DEC_RE, And, Formula, Node, Or, Var, Y, canonical_json, from_obj, to_obj


@dataclass(frozen=True)
class Share:
    attr: str
    j: int
    address: int
    value: int


@dataclass(frozen=True)
class Sharing:
    formula: Formula
    shares: tuple[Share, ...]
    q: int

    def shares_of(self, attrs) -> list[Share]:
        held = set(attrs)
        return [sh for sh in self.shares if sh.attr in held]

    def to_json(self) -> dict:
        return {
            "scheme": "standard",
            "q": format(self.q, "x"),
            "formula": to_obj(self.formula),
            "shares": [{"attr": sh.attr, "j": sh.j, "addr": sh.address, "value": str(sh.value)}
                       for sh in self.shares],
        }

    def dumps(self) -> bytes:
        return canonical_json(self.to_json())

    @classmethod
    def from_json(cls, obj) -> "Sharing":
        if not isinstance(obj, dict) or obj.get("scheme") != "standard":
            raise FormatError("$.scheme", "expected standard sharing")
        q = from_hex(obj.get("q"), "$.q")
        formula = from_obj(obj.get("formula"))
        if not isinstance(formula, Formula):
            raise FormatError("$.formula", "standard sharing formula must not contain Y leaves")
        raw = obj.get("shares")
        if not isinstance(raw, list):
            raise FormatError("$.shares", "expected list")
        shares = []
        for i, item in enumerate(raw):
            path = f"$.shares[{i}]"
            if not isinstance(item, dict) or set(item) != {"attr", "j", "addr", "value"}:
                raise FormatError(path, "expected keys attr, j, addr, value")
            value = item["value"]
            if not isinstance(value, str) or not DEC_RE.fullmatch(value) or int(value) >= q:
                raise FormatError(f"{path}.value", "expected decimal scalar below q")
            shares.append(Share(item["attr"], item["j"], item["addr"], int(value)))
        expected = [(v.attr, v.j, v.address) for v in formula.leaves()]
        if [(s.attr, s.j, s.address) for s in shares] != expected:
            raise FormatError("$.shares", "shares do not cover the formula leaves in order")
        return cls(formula, tuple(shares), q)


def split_sum(s: int, parts: int, q: int, rng: RandomSource) -> list[int]:
    """``parts`` uniform summands of ``s`` mod ``q`` (last one absorbs the rest)."""
    head = [random_below(q, rng) for _ in range(parts - 1)]
    return head + [(s - sum(head)) % q]


def share_standard(s: int, f: Formula, q: int, rng: RandomSource) -> Sharing:
    if not 0 <= s < q:
        raise ValueError("secret outside Z_q")
    out: list[Share] = []

    def deal(node: Node, secret: int) -> None:
        if isinstance(node, Var):
            out.append(Share(node.attr, node.j, node.address, secret))
        elif isinstance(node, Or):
            for child in node.children:
                deal(child, secret)
        else:
            for child, part in zip(node.children, split_sum(secret, len(node.children), q, rng)):
                deal(child, part)

    deal(f.root, s)
    return Sharing(f, tuple(out), q)


def recover(node: Node, value_of: Callable[[object], Optional[int]], q: int) -> Optional[int]:
    if isinstance(node, (Var, Y)):
        return value_of(node)
    if isinstance(node, And):
        total = 0
        for child in node.children:
            v = recover(child, value_of, q)
            if v is None:
                return None
            total += v
        return total % q
    for child in node.children:
        v = recover(child, value_of, q)
        if v is not None:
            return v
    return None


def reconstruct_standard(sharing: Sharing, attrs) -> int:
    by_addr = {sh.address: sh.value for sh in sharing.shares_of(attrs)}
    s = recover(sharing.formula.root,
                 lambda leaf: by_addr.get(leaf.address) if isinstance(leaf, Var) else None,
                 sharing.q)
    if s is None:
        raise NotSatisfied("attribute set does not satisfy the formula")
    return s


def implied_secret(root: Node, value_of: Callable[[object], int], q: int) -> Optional[int]:
    """Secret a complete leaf assignment encodes under the sharing rules.

    Returns ``None`` when the assignment is not a valid sharing, i.e. some
    OR gate has children encoding different secrets.
    """
    if isinstance(root, (Var, Y)):
        return value_of(root) % q
    values = [implied_secret(c, value_of, q) for c in root.children]
    if any(v is None for v in values):
        return None
    if isinstance(root, And):
        return sum(values) % q
    return values[0] if len(set(values)) == 1 else None

