"""Schnorr-group arithmetic, injected randomness and the keyed PRF family.

Scalars and group elements are plain ``int`` values; :class:`GroupParams`
owns the validation and encoding rules for them.  Randomness is always
passed in as an object with a ``getrandbits(k)`` method, so
``random.Random(seed)`` gives reproducible runs and
``secrets.SystemRandom()`` gives production draws.
"""

from __future__ import annotations

import hashlib
import random
import secrets
import threading
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Protocol

from sympy import isprime

from .errors import FormatError, GenerationFailure, InvalidParams


class RandomSource(Protocol):
    def getrandbits(self, k: int) -> int: ...


#: keyed PRF family member f_k: Z_q -> Z_q, called as ``prf(key, x)``
PRF = Callable[[bytes, int], int]


def system_rng() -> random.Random:
    return secrets.SystemRandom()


def seeded_rng(seed: bytes) -> random.Random:
    """Deterministic generator for tests, games and ``--seed`` CLI runs."""
    return random.Random(hashlib.sha256(b"mkabe-rng" + seed).digest())


def random_below(bound: int, rng: RandomSource) -> int:
    """Uniform integer in ``[0, bound)`` by rejection sampling."""
    if bound < 1:
        raise ValueError("bound must be positive")
    if bound == 1:
        return 0
    nbits = (bound - 1).bit_length()
    while True:
        v = rng.getrandbits(nbits)
        if v < bound:
            return v


class ScriptedRandom:
    """Random source replaying a fixed list of values, one per draw.

    Used to enumerate all dealer randomness exhaustively: every value must
    already lie below the bound of the draw consuming it, so rejection
    sampling accepts it on the first try.
    """

    def __init__(self, values: Iterable[int]):
        self._values = list(values)
        self.consumed = 0

    def getrandbits(self, k: int) -> int:
        if self.consumed >= len(self._values):
            raise IndexError("scripted randomness exhausted")
        v = self._values[self.consumed]
        if not 0 <= v < (1 << k):
            raise ValueError(f"scripted value {v} does not fit in {k} bits")
        self.consumed += 1
        return v


class CountingRandom:
    """Wraps a source and counts draws (for sizing an enumeration)."""

    def __init__(self, inner: RandomSource):
        self.inner = inner
        self.draws = 0

    def getrandbits(self, k: int) -> int:
        self.draws += 1
        return self.inner.getrandbits(k)


def to_hex(v: int) -> str:
    return format(v, "x")


def from_hex(text: str, path: str = "$") -> int:
    if not isinstance(text, str) or not text or text != text.lower():
        raise FormatError(path, "expected lowercase hex string")
    if len(text) > 1 and text[0] == "0":
        raise FormatError(path, "hex integer has leading zeros")
    try:
        return int(text, 16)
    except ValueError:
        raise FormatError(path, "expected lowercase hex string") from None


@dataclass(frozen=True)
class GroupParams:
    """Order-``q`` subgroup of the integers mod ``p`` generated by ``g``."""

    p: int
    q: int
    g: int

    @property
    def n(self) -> int:
        return self.q.bit_length() - 1

    @property
    def element_width(self) -> int:
        return (self.p.bit_length() + 7) // 8

    def validate(self, strict: bool = False) -> "GroupParams":
        p, q, g = self.p, self.q, self.g
        if p < 3 or not isprime(p):
            raise InvalidParams(f"p={p} is not an odd prime")
        if q < 2 or not isprime(q):
            raise InvalidParams(f"q={q} is not prime")
        if (p - 1) % q:
            raise InvalidParams("q does not divide p - 1")
        if not 1 < g < p:
            raise InvalidParams("g must satisfy 1 < g < p")
        if pow(g, q, p) != 1:
            raise InvalidParams("g does not lie in the order-q subgroup")
        if strict and not (1 << self.n) < q < (1 << (self.n + 1)):
            raise InvalidParams("q outside (2^n, 2^(n+1))")
        return self

    def exp(self, base: int, e: int) -> int:
        return pow(base, e % self.q, self.p)

    def gexp(self, e: int) -> int:
        return pow(self.g, e % self.q, self.p)

    def contains(self, v: int) -> bool:
        return isinstance(v, int) and 0 < v < self.p and pow(v, self.q, self.p) == 1

    def is_scalar(self, v: int) -> bool:
        return isinstance(v, int) and not isinstance(v, bool) and 0 <= v < self.q

    def random_scalar(self, rng: RandomSource) -> int:
        return random_below(self.q, rng)

    def random_element(self, rng: RandomSource) -> int:
        return self.gexp(self.random_scalar(rng))

    def element_bytes(self, v: int) -> bytes:
        """Fixed-width big-endian encoding; this is also the PRF key form."""
        return v.to_bytes(self.element_width, "big")

    def random_key(self, rng: RandomSource) -> bytes:
        return self.element_bytes(self.random_element(rng))

    def to_json(self) -> dict:
        return {"p": to_hex(self.p), "q": to_hex(self.q), "g": to_hex(self.g)}

    @classmethod
    def from_json(cls, obj, path: str = "$") -> "GroupParams":
        if not isinstance(obj, dict) or set(obj) != {"p", "q", "g"}:
            raise FormatError(path, "expected object with keys p, q, g")
        group = cls(*(from_hex(obj[k], f"{path}.{k}") for k in ("p", "q", "g")))
        try:
            return group.validate()
        except InvalidParams as exc:
            raise FormatError(path, str(exc)) from None


TINY = GroupParams(p=11, q=5, g=3)
TEST = GroupParams(p=2039, q=1019, g=4)


def generate_params(n: int, seed: bytes, max_attempts: int = 2000) -> GroupParams:
    """Deterministic Schnorr group with ``2^n < q < 2^(n+1)`` and ``p = kq + 1``."""
    if n < 4:
        raise ValueError("security parameter n must be at least 4")
    rng = seeded_rng(b"params" + n.to_bytes(4, "big") + seed)
    for _ in range(max_attempts):
        q = (1 << n) | rng.getrandbits(n) | 1
        if not isprime(q):
            continue
        # p roughly twice the size of q or more leaves room for k.
        for k in range(2, 2 * max(64, 4 * n), 2):
            p = k * q + 1
            if not isprime(p):
                continue
            for h in range(2, min(p - 1, 1000)):
                g = pow(h, k, p)
                if g != 1:
                    return GroupParams(p, q, g).validate(strict=True)
    raise GenerationFailure(f"no group found for n={n} after {max_attempts} attempts")


_PRF_DOMAIN = b"mkabe-prf-v1"


class HashPrf:
    """Counter-mode SHA-256 PRF ``f_k: Z_q -> Z_q``.

    Blocks ``SHA256(domain || len(k) || k || enc(x) || ctr)`` are concatenated
    to the byte width of ``q``, masked to its bit length and rejected until
    the value falls below ``q``, so output is exactly uniform for a random
    oracle.
    """

    def __init__(self, q: int):
        self.q = q
        self._nbits = (q - 1).bit_length()
        self._width = (q.bit_length() + 7) // 8

    def __call__(self, key: bytes, x: int) -> int:
        if not 0 <= x < self.q:
            raise ValueError(f"PRF input {x} outside Z_q")
        prefix = (_PRF_DOMAIN + len(key).to_bytes(2, "big") + key
                  + x.to_bytes(self._width, "big"))
        mask = (1 << self._nbits) - 1
        ctr = 0
        while True:
            buf = b""
            while len(buf) < self._width:
                buf += hashlib.sha256(prefix + ctr.to_bytes(4, "big")).digest()
                ctr += 1
            v = int.from_bytes(buf[: self._width], "big") & mask
            if v < self.q:
                return v


class ZeroPrf:
    """Degenerate stub returning 0 everywhere; only for tests and games."""

    def __init__(self, q: int):
        self.q = q

    def __call__(self, key: bytes, x: int) -> int:
        return 0


class RandomFunctionTable:
    """A uniformly random function ``Z_q -> Z_q``, sampled lazily.

    Repeated queries return the memoized answer; the lock makes concurrent
    callers observe one consistent function.
    """

    def __init__(self, q: int, rng: RandomSource):
        self.q = q
        self._rng = rng
        self._table: dict[int, int] = {}
        self._lock = threading.Lock()

    def __call__(self, x: int) -> int:
        if not 0 <= x < self.q:
            raise ValueError(f"input {x} outside Z_q")
        with self._lock:
            if x not in self._table:
                self._table[x] = random_below(self.q, self._rng)
            return self._table[x]

    def __len__(self):
        return len(self._table)

    def materialize(self) -> list[int]:
        """Query every point, returning the full table as a list."""
        return [self(x) for x in range(self.q)]


class TablePrf:
    """A keyed family of independent random functions (one table per key)."""

    def __init__(self, q: int, rng: RandomSource):
        self.q = q
        self._rng = rng
        self._tables: dict[bytes, RandomFunctionTable] = {}
        self._lock = threading.Lock()

    def table(self, key: bytes) -> RandomFunctionTable:
        with self._lock:
            if key not in self._tables:
                self._tables[key] = RandomFunctionTable(self.q, self._rng)
            return self._tables[key]

    def __call__(self, key: bytes, x: int) -> int:
        return self.table(key)(x)


class OverridePrf:
    """Routes selected keys to fixed oracles and everything else to ``base``."""

    def __init__(self, base: PRF, oracles: Optional[dict[bytes, Callable[[int], int]]] = None):
        self.base = base
        self.q = getattr(base, "q", None)
        self.oracles = dict(oracles or {})

    def __call__(self, key: bytes, x: int) -> int:
        oracle = self.oracles.get(key)
        if oracle is not None:
            return oracle(x)
        return self.base(key, x)
