"""Secret sharing with one master key per trustee.

Trustee ``p`` derives the share of each of its variable occurrences as
``prf(mk_p, address)``.  The dealer, who knows every master key, rewrites
the formula so that each minimal conjunctive clause also contains a public
leaf ``Y_i`` whose value makes the clause sum to the clause secret:

* a conjunction of variables only gets ``Y_i = s - sum(shares)``;
* a conjunction of variables and OR-subformulas splits ``s - sum(shares)``
  uniformly among the OR children and recurses, adding no ``Y``;
* an OR passes ``s`` to every child, a bare variable child being treated
  as a one-variable conjunction.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Optional

from .crypto import PRF, RandomSource
from .errors import AttributeMismatch, MissingMasterKey, NotSatisfied, SizeExceeded
from .formula import And, Formula, ModifiedFormula, Node, Or, Var, Y
from .sss_standard import recover, split_sum


@dataclass(frozen=True)
class MasterKey:
    attr: str
    key: bytes


@dataclass(frozen=True)
class TransformResult:
    modified: ModifiedFormula
    y_count: int

    @property
    def y_values(self) -> dict[int, int]:
        return {y.index: y.value for y in self.modified.y_leaves()}


def derive_share(mk: MasterKey, leaf: Var, prf: PRF) -> int:
    if leaf.attr != mk.attr:
        raise AttributeMismatch(f"master key of {mk.attr!r} used for a leaf of {leaf.attr!r}")
    return prf(mk.key, leaf.address)


def transform(s: int, f: Formula, mks: Mapping[str, MasterKey], q: int,
              rng: RandomSource, prf: PRF) -> TransformResult:
    """Insert public ``Y`` leaves so that authorized sums hit ``s``.

    Fresh summands for OR children are drawn from ``rng`` left to right;
    ``Y`` indices follow a depth-first left-to-right walk starting at 1.
    """
    if not 0 <= s < q:
        raise ValueError("secret outside Z_q")
    for attr in sorted(f.attributes()):
        if attr not in mks:
            raise MissingMasterKey(attr)
    alpha = itertools.count(1)

    def share(leaf: Var) -> int:
        return derive_share(mks[leaf.attr], leaf, prf)

    def clause(leaves: list[Var], secret: int) -> And:
        y = (secret - sum(share(v) for v in leaves)) % q
        return And(*leaves, Y(next(alpha), y))

    def g(node: Node, secret: int) -> Node:
        if isinstance(node, Var):
            return clause([node], secret)
        if isinstance(node, Or):
            return Or([g(child, secret) for child in node.children])
        if not isinstance(node, And):
            raise TypeError(f"unexpected node {node!r}")
        leaves = [c for c in node.children if isinstance(c, Var)]
        subs = [c for c in node.children if isinstance(c, Or)]
        if len(leaves) + len(subs) != len(node.children):
            raise ValueError("formula is not normalized")
        if not subs:
            return clause(leaves, secret)
        rest = (secret - sum(share(v) for v in leaves)) % q
        parts = iter(split_sum(rest, len(subs), q, rng))
        return And([g(c, next(parts)) if isinstance(c, Or) else c for c in node.children])

    modified = ModifiedFormula(g(f.root, s))
    if modified.leaf_count > 2 * f.size:
        raise SizeExceeded("transformed formula exceeds twice the original size")
    return TransformResult(modified, len(modified.y_leaves()))


def reconstruct_advanced(tr: TransformResult, mks: Mapping[str, MasterKey], attrs,
                         q: int, prf: PRF) -> int:
    held = frozenset(attrs)
    for attr in sorted(held & tr.modified.attributes()):
        if attr not in mks:
            raise MissingMasterKey(attr)

    def value_of(leaf) -> Optional[int]:
        if isinstance(leaf, Y):
            return leaf.value
        if leaf.attr in held:
            return derive_share(mks[leaf.attr], leaf, prf)
        return None

    s = recover(tr.modified.root, value_of, q)
    if s is None:
        raise NotSatisfied("attribute set does not satisfy the formula")
    return s
