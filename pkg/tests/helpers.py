"""Shared test oracles: random formulas and exhaustive enumerators."""

import itertools
import random
from collections import Counter
from fractions import Fraction

from hypothesis import strategies as st

from mkabe.crypto import CountingRandom, ScriptedRandom, TablePrf
from mkabe.formula import Var, parse
from mkabe.sss_advanced import MasterKey, transform
from mkabe.sss_standard import share_standard

WORKED = "(A & B) | (B & C) | (C & D)"
ATTRS6 = "ABCDEF"


def random_formula_text(rng: random.Random, max_leaves=20, attrs=ATTRS6, leaves=None):
    n = leaves if leaves is not None else rng.randint(1, max_leaves)

    def build(k):
        if k == 1:
            return rng.choice(attrs)
        parts = rng.randint(2, min(k, 4))
        cuts = sorted(rng.sample(range(1, k), parts - 1))
        sizes = [b - a for a, b in zip([0] + cuts, cuts + [k])]
        op = rng.choice(" & | ".split())
        return "(" + f" {op} ".join(build(s) for s in sizes) + ")"

    return build(n)


def random_formula(rng, max_leaves=20, attrs=ATTRS6, leaves=None):
    return parse(random_formula_text(rng, max_leaves, attrs, leaves))


def formula_texts(max_leaves=20, attrs=ATTRS6):
    leaf = st.sampled_from(list(attrs))
    tree = st.recursive(
        leaf,
        lambda kids: st.tuples(st.sampled_from(["&", "|"]), st.lists(kids, min_size=2, max_size=3))
        .map(lambda t: "(" + f" {t[0]} ".join(t[1]) + ")"),
        max_leaves=max_leaves,
    )
    return tree.filter(lambda text: sum(c.isalpha() for c in text) <= max_leaves)


def subsets(attrs):
    attrs = sorted(attrs)
    for r in range(len(attrs) + 1):
        yield from (frozenset(c) for c in itertools.combinations(attrs, r))


def total_variation(a: Counter, b: Counter) -> Fraction:
    na, nb = sum(a.values()), sum(b.values())
    keys = set(a) | set(b)
    return sum(abs(Fraction(a[k], na) - Fraction(b[k], nb)) for k in keys) / 2


class _Zeros:
    def getrandbits(self, k):
        return 0


def _count_draws(run):
    # Zeros are never rejected, so draws == number of sampled values.
    rng = CountingRandom(_Zeros())
    run(rng)
    return rng.draws


def standard_views(text, unauthorized, q=5):
    """Secret -> distribution of ``unauthorized``'s shares over all dealer coins."""
    f = parse(text)
    k = _count_draws(lambda rng: share_standard(0, f, q, rng))
    views = {}
    for s in range(q):
        counter = Counter()
        for values in itertools.product(range(q), repeat=k):
            rng = ScriptedRandom(values)
            sharing = share_standard(s, f, q, rng)
            assert rng.consumed == k
            counter[tuple(sh for sh in sharing.shares if sh.attr in unauthorized)] += 1
        views[s] = counter
    return views


def advanced_views(text, unauthorized, q=5):
    """Secret -> distribution of (unauthorized shares, all y) over every
    random-function entry queried and every dealer draw."""
    f = parse(text)
    mks = {a: MasterKey(a, a.encode()) for a in f.attributes()}

    def run(s, rng):
        prf = TablePrf(q, rng)
        return prf, transform(s, f, mks, q, rng, prf)

    k = _count_draws(lambda rng: run(0, rng))
    own = [leaf for leaf in f.leaves() if leaf.attr in unauthorized]
    views = {}
    for s in range(q):
        counter = Counter()
        for values in itertools.product(range(q), repeat=k):
            rng = ScriptedRandom(values)
            prf, tr = run(s, rng)
            shares = tuple(prf(mks[v.attr].key, v.address) for v in own)
            assert rng.consumed == k
            counter[(shares, tuple(y.value for y in tr.modified.y_leaves()))] += 1
        views[s] = counter
    return views, k
