"""Security games with pluggable adversaries and advantage estimation.

Four games are provided: Selective-Id for the sharing scheme,
attribute-based Selective-Set for the encryption scheme, and the m-PRF and
m-DDH distinguishing games their security reduces to.  Each trial gets two
independent generators derived from ``(seed, game, trial)``: one for the
challenger (coins, keys, dealer randomness) and one handed to the
adversary, so trials can be replayed or run in any order.
"""

from __future__ import annotations

import hashlib
import math
import random
from dataclasses import dataclass
from functools import partial
from typing import Callable, Mapping, Optional, Sequence

from .abe import Ciphertext, PublicParams, recover_secret, seal
from .crypto import (PRF, TEST, GroupParams, HashPrf, OverridePrf, RandomFunctionTable,
                     TablePrf, ZeroPrf, random_below)
from .errors import ProtocolViolation
from .formula import Formula, evaluate, parse
from .sss_advanced import MasterKey, TransformResult, reconstruct_advanced, transform

Z_99 = 2.58

PRF_FAMILIES: dict[str, Callable] = {
    "hash": lambda q, rng: HashPrf(q),
    "zero": lambda q, rng: ZeroPrf(q),
    "table": lambda q, rng: TablePrf(q, rng),
}


@dataclass
class GameResult:
    game: str
    trials: int
    successes: int
    seed: bytes = b""

    @property
    def advantage(self) -> float:
        return abs(self.successes / self.trials - 0.5)

    @property
    def halfwidth(self) -> float:
        """99% normal-approximation half width of the success rate."""
        return Z_99 * math.sqrt(0.25 / self.trials)

    def to_json(self) -> dict:
        return {"game": self.game, "trials": self.trials, "successes": self.successes,
                "advantage": self.advantage, "halfwidth": self.halfwidth,
                "seed": self.seed.hex()}


def trial_rng(seed: bytes, game: str, index: int, role: str) -> random.Random:
    material = b"|".join([seed, game.encode(), index.to_bytes(8, "big"), role.encode()])
    return random.Random(hashlib.sha256(material).digest())


def _run(game: str, trial: Callable, trials: int, seed: bytes) -> GameResult:
    if trials < 1:
        raise ValueError("trials must be at least 1")
    successes = 0
    for i in range(trials):
        successes += bool(trial(trial_rng(seed, game, i, "challenger"),
                                trial_rng(seed, game, i, "adversary")))
    return GameResult(game, trials, successes, seed)


def maximal_unauthorized(f: Formula) -> frozenset[str]:
    """Greedy (sorted order) maximal attribute set that fails ``f``."""
    held: set[str] = set()
    for attr in sorted(f.attributes()):
        if not evaluate(f, held | {attr}):
            held.add(attr)
    return frozenset(held)


# -- adversaries -----------------------------------------------------------

class Adversary:
    """Selective-model adversary; the harness calls the phases in order.

    ``begin`` hands over the per-trial randomness, ``receive_keys`` the
    corrupted keys of Phase 1 and ``guess`` the challenge of Phase 2.
    """

    def __init__(self, policy: str | Formula = "(A & B) | (B & C) | (C & D)",
                 corrupt: Optional[Sequence[str]] = None):
        self.formula = parse(policy) if isinstance(policy, str) else policy
        self.corrupt = (frozenset(corrupt) if corrupt is not None
                        else maximal_unauthorized(self.formula))
        self.rng: random.Random = random.Random(0)
        self.keys: dict = {}

    def begin(self, rng: random.Random) -> None:
        self.rng = rng
        self.keys = {}

    def choose_formula(self) -> Formula:
        return self.formula

    def choose_corrupt_set(self, formula: Formula) -> frozenset[str]:
        return self.corrupt

    def receive_keys(self, keys: Mapping) -> None:
        self.keys = dict(keys)

    def choose_secrets(self, q: int) -> tuple[int, int]:
        s0 = random_below(q, self.rng)
        s1 = (s0 + 1 + random_below(q - 1, self.rng)) % q
        return s0, s1

    def guess(self, challenge) -> int:
        raise NotImplementedError


class CoinFlipAdversary(Adversary):
    def guess(self, challenge) -> int:
        return self.rng.getrandbits(1)


class _SecretMatcher(Adversary):
    """Recovers a candidate secret and guesses which submitted secret it is."""

    def choose_secrets(self, q: int) -> tuple[int, int]:
        self.secrets = super().choose_secrets(q)
        return self.secrets

    def candidate(self, challenge) -> int:
        raise NotImplementedError

    def guess(self, challenge) -> int:
        s = self.candidate(challenge)
        if s == self.secrets[1]:
            return 1
        if s == self.secrets[0]:
            return 0
        return self.rng.getrandbits(1)


class ShareReconstructionAdversary(_SecretMatcher):
    """Selective-Id: reconstructs with held master keys, guessing the rest."""

    def candidate(self, challenge: "SelectiveIdChallenge") -> int:
        attrs = challenge.result.modified.attributes()
        mks = dict(self.keys)
        for attr in sorted(attrs - mks.keys()):
            mks[attr] = MasterKey(attr, challenge.group.random_key(self.rng))
        return reconstruct_advanced(challenge.result, mks, attrs, challenge.group.q, challenge.prf)


class DecryptionAdversary(_SecretMatcher):
    """Selective-Set: derives master keys from held secret keys, guessing the rest."""

    def candidate(self, challenge: "SelectiveSetChallenge") -> int:
        attrs = challenge.ciphertext.policy.attributes()
        sks = dict(self.keys)
        for attr in sorted(attrs - sks.keys()):
            sks[attr] = challenge.pp.group.random_scalar(self.rng)
        return recover_secret(challenge.ciphertext, sks, attrs, challenge.prf)


@dataclass(frozen=True)
class SelectiveIdChallenge:
    result: TransformResult
    group: GroupParams
    prf: PRF


@dataclass(frozen=True)
class SelectiveSetChallenge:
    ciphertext: Ciphertext
    pp: PublicParams
    prf: PRF


@dataclass
class SelectiveIdConfig:
    group: GroupParams = TEST
    family: str = "hash"
    universe: tuple[str, ...] = ()
    # Honest trustees' shares come from independent random functions.
    oracle_mode: bool = False
    leak_all_keys: bool = False


@dataclass
class SelectiveSetConfig:
    group: GroupParams = TEST
    family: str = "hash"
    universe: tuple[str, ...] = ()
    # None: the real scheme; "dh"/"random": honest communities use m-DDH
    # tuples (g^a, g^b, g^ab or g^z) as (ephemeral, public key, master key).
    ddh: Optional[str] = None
    leak_all_keys: bool = False
    integrity: bool = False


def _declare(adv: Adversary, extra: Sequence[str]) -> tuple[Formula, list[str], frozenset[str]]:
    f = adv.choose_formula()
    universe = sorted(f.attributes() | set(extra))
    gamma = frozenset(adv.choose_corrupt_set(f))
    if not gamma <= set(universe):
        raise ProtocolViolation(f"corrupt set names unknown trustees {sorted(gamma - set(universe))}")
    if evaluate(f, gamma):
        raise ProtocolViolation(f"corrupt set {sorted(gamma)} satisfies the formula")
    return f, universe, gamma


def _secrets(adv: Adversary, q: int) -> tuple[int, int]:
    s0, s1 = adv.choose_secrets(q)
    if not (0 <= s0 < q and 0 <= s1 < q):
        raise ProtocolViolation("submitted secrets must lie in Z_q")
    return s0, s1


def selective_id_trial(adv: Adversary, config: SelectiveIdConfig, rng: random.Random,
                       adv_rng: random.Random, force_b: Optional[int] = None) -> bool:
    group = config.group
    adv.begin(adv_rng)
    f, universe, gamma = _declare(adv, config.universe)
    prf = PRF_FAMILIES[config.family](group.q, rng)
    mks = {p: MasterKey(p, group.random_key(rng)) for p in universe}
    dealer_prf = prf
    if config.oracle_mode:
        oracles = {}
        for p in universe:
            if p not in gamma:
                mks[p] = MasterKey(p, b"\x00oracle:" + p.encode())
                oracles[mks[p].key] = RandomFunctionTable(group.q, rng)
        dealer_prf = OverridePrf(prf, oracles)
    shown = mks if config.leak_all_keys else {p: mks[p] for p in sorted(gamma)}
    adv.receive_keys(shown)
    secrets = _secrets(adv, group.q)
    b = rng.getrandbits(1)
    if force_b is not None:
        b = force_b
    tr = transform(secrets[b], f, mks, group.q, rng, dealer_prf)
    return adv.guess(SelectiveIdChallenge(tr, group, prf)) == b


def selective_set_trial(adv: Adversary, config: SelectiveSetConfig, rng: random.Random,
                        adv_rng: random.Random, force_b: Optional[int] = None) -> bool:
    group = config.group
    if config.ddh not in (None, "dh", "random"):
        raise ValueError(f"unknown ddh mode {config.ddh!r}")
    if config.ddh and config.leak_all_keys:
        raise ValueError("leak_all_keys is meaningless with DDH substitution")
    adv.begin(adv_rng)
    f, universe, gamma = _declare(adv, config.universe)
    prf = PRF_FAMILIES[config.family](group.q, rng)
    sks = {p: group.random_scalar(rng) for p in universe}
    pks = {p: group.gexp(sk) for p, sk in sks.items()}
    if config.ddh:
        honest = [p for p in universe if p not in gamma]
        tuples = ddh_tuples(group, len(honest), config.ddh == "dh", rng)
        eph = tuples[0][0] if tuples else group.random_element(rng)
        mk_values = {p: group.exp(eph, sks[p]) for p in gamma}
        for p, (_, pk, mk) in zip(honest, tuples):
            pks[p], mk_values[p] = pk, mk
    else:
        e = group.random_scalar(rng)
        eph = group.gexp(e)
        mk_values = {p: group.exp(pks[p], e) for p in universe}
    shown = sks if config.leak_all_keys else {p: sks[p] for p in sorted(gamma)}
    adv.receive_keys(shown)
    secrets = _secrets(adv, group.q)
    b = rng.getrandbits(1)
    if force_b is not None:
        b = force_b
    m = group.random_scalar(rng)
    mks = {p: MasterKey(p, group.element_bytes(mk_values[p])) for p in f.attributes()}
    ct = seal(m, secrets[b], eph, mks, f, group, rng, prf, config.integrity)
    return adv.guess(SelectiveSetChallenge(ct, PublicParams(group, pks), prf)) == b


def run_selective_id(adv: Adversary, config: SelectiveIdConfig = None, trials: int = 1000,
                     seed: bytes = b"") -> GameResult:
    config = config or SelectiveIdConfig()
    return _run("selective-id", partial(selective_id_trial, adv, config), trials, seed)


def run_selective_set(adv: Adversary, config: SelectiveSetConfig = None, trials: int = 1000,
                      seed: bytes = b"") -> GameResult:
    config = config or SelectiveSetConfig()
    return _run("selective-set", partial(selective_set_trial, adv, config), trials, seed)


# -- m-PRF -----------------------------------------------------------------

Distinguisher = Callable[..., int]


class CoinFlipDistinguisher:
    def __call__(self, challenge, group: GroupParams, rng: random.Random) -> int:
        return rng.getrandbits(1)


class ZeroDetector:
    """Says "PRF" when two probe points of the first oracle are both 0."""

    def __call__(self, oracles, group: GroupParams, rng: random.Random) -> int:
        return int(oracles[0](0) == 0 and oracles[0](1) == 0)


def m_prf_trial(distinguisher: Distinguisher, m: int, group: GroupParams, family: str,
                rng: random.Random, adv_rng: random.Random) -> bool:
    b = rng.getrandbits(1)
    if b:
        prf = PRF_FAMILIES[family](group.q, rng)
        oracles = [partial(prf, group.random_key(rng)) for _ in range(m)]
    else:
        oracles = [RandomFunctionTable(group.q, rng) for _ in range(m)]
    return distinguisher(oracles, group, adv_rng) == b


def run_m_prf(distinguisher: Distinguisher, m: int = 1, trials: int = 1000, seed: bytes = b"",
              group: GroupParams = TEST, family: str = "hash") -> GameResult:
    """Coin 1 gives ``m`` keyed members of ``family``, coin 0 ``m`` random functions."""
    if m < 1:
        raise ValueError("m must be at least 1")
    return _run("m-prf", partial(m_prf_trial, distinguisher, m, group, family), trials, seed)


# -- m-DDH -----------------------------------------------------------------

def ddh_tuples(group: GroupParams, m: int, real: bool, rng) -> list[tuple[int, int, int]]:
    """``m`` tuples ``(g^a, g^b_i, g^(a*b_i))`` sharing ``a``, or with ``g^z_i`` third."""
    a = group.random_scalar(rng)
    out = []
    for _ in range(m):
        b = group.random_scalar(rng)
        third = a * b if real else group.random_scalar(rng)
        out.append((group.gexp(a), group.gexp(b), group.gexp(third)))
    return out


class DlogDistinguisher:
    """Brute-forces ``a`` from ``g^a`` and checks every third component."""

    def __call__(self, tuples, group: GroupParams, rng: random.Random) -> int:
        ga = tuples[0][0]
        a = next(x for x in range(group.q) if group.gexp(x) == ga)
        return int(all(c == group.exp(gb, a) for _, gb, c in tuples))


def m_ddh_trial(distinguisher: Distinguisher, m: int, group: GroupParams,
                rng: random.Random, adv_rng: random.Random) -> bool:
    b = rng.getrandbits(1)
    return distinguisher(ddh_tuples(group, m, bool(b), rng), group, adv_rng) == b


def run_m_ddh(distinguisher: Distinguisher, m: int = 1, group: GroupParams = TEST,
              trials: int = 1000, seed: bytes = b"") -> GameResult:
    if m < 1:
        raise ValueError("m must be at least 1")
    return _run("m-ddh", partial(m_ddh_trial, distinguisher, m, group), trials, seed)
