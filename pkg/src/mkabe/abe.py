"""Attribute-based encryption on top of the master-key sharing scheme.

Each attribute community holds ``sk_p`` and publishes ``pk_p = g^sk_p``.
The encryptor picks a sharing secret ``s`` and an ephemeral ``e``; the
master key of community ``p`` is the Diffie-Hellman value
``g^(sk_p * e)``, computable by the encryptor as ``pk_p^e`` and by members
as ``(g^e)^sk_p``.  The message ``M`` in Z_q is masked as ``M + s``.
"""

from __future__ import annotations

import hashlib
import hmac
from dataclasses import dataclass
from typing import Mapping, Optional

from .crypto import PRF, GroupParams, HashPrf, RandomSource, from_hex, to_hex
from .errors import (DuplicateAttribute, FormatError, IntegrityFailure, MissingMasterKey,
                     UnknownAttribute)
from .formula import (DEC_RE, IDENT_RE, DEFAULT_MAX_LEAVES, Formula, ModifiedFormula,
                      canonical_json, from_obj, to_obj)
from .sss_advanced import MasterKey, TransformResult, reconstruct_advanced, transform

CIPHERTEXT_VERSION = 1


@dataclass(frozen=True)
class CommunityKeypair:
    attr: str
    sk: int
    pk: int

    def to_json(self) -> dict:
        return {"attr": self.attr, "sk": str(self.sk), "pk": to_hex(self.pk)}

    @classmethod
    def from_json(cls, obj, group: Optional[GroupParams] = None) -> "CommunityKeypair":
        if not isinstance(obj, dict) or set(obj) != {"attr", "sk", "pk"}:
            raise FormatError("$", "key file needs exactly attr, sk, pk")
        attr = obj["attr"]
        if not isinstance(attr, str) or not IDENT_RE.fullmatch(attr):
            raise FormatError("$.attr", "invalid attribute identifier")
        if not isinstance(obj["sk"], str) or not DEC_RE.fullmatch(obj["sk"]):
            raise FormatError("$.sk", "expected decimal string")
        kp = cls(attr, int(obj["sk"]), from_hex(obj["pk"], "$.pk"))
        if group is not None and (not group.is_scalar(kp.sk) or group.gexp(kp.sk) != kp.pk):
            raise FormatError("$", "keypair does not match the group")
        return kp


@dataclass(frozen=True)
class PublicParams:
    group: GroupParams
    pks: Mapping[str, int]

    def to_json(self) -> dict:
        return {"group": self.group.to_json(),
                "pks": {attr: to_hex(pk) for attr, pk in sorted(self.pks.items())}}

    @classmethod
    def from_json(cls, obj) -> "PublicParams":
        if not isinstance(obj, dict) or set(obj) != {"group", "pks"}:
            raise FormatError("$", "public params need exactly group, pks")
        group = GroupParams.from_json(obj["group"], "$.group")
        if not isinstance(obj["pks"], dict):
            raise FormatError("$.pks", "expected object")
        pks = {}
        for attr, text in obj["pks"].items():
            if not IDENT_RE.fullmatch(attr):
                raise FormatError(f"$.pks.{attr}", "invalid attribute identifier")
            pk = from_hex(text, f"$.pks.{attr}")
            if not group.contains(pk):
                raise FormatError(f"$.pks.{attr}", "public key is not a subgroup element")
            pks[attr] = pk
        return cls(group, pks)


@dataclass(frozen=True)
class Ciphertext:
    group: GroupParams
    e_prime: int
    eph: int
    policy: ModifiedFormula
    tag: Optional[bytes] = None

    @property
    def y_count(self) -> int:
        return len(self.policy.y_leaves())

    def to_json(self) -> dict:
        return {
            "v": CIPHERTEXT_VERSION,
            "group": self.group.to_json(),
            "eph": to_hex(self.eph),
            "e_prime": str(self.e_prime),
            "policy": to_obj(self.policy),
            "tag": self.tag.hex() if self.tag is not None else None,
        }

    def dumps(self) -> bytes:
        return canonical_json(self.to_json())

    @classmethod
    def from_json(cls, obj, extra_keys=()) -> "Ciphertext":
        keys = {"v", "group", "eph", "e_prime", "policy", "tag"}
        if not isinstance(obj, dict) or not keys <= set(obj) <= keys | set(extra_keys):
            raise FormatError("$", f"ciphertext needs exactly keys {sorted(keys)}")
        if obj["v"] != CIPHERTEXT_VERSION:
            raise FormatError("$.v", f"unsupported version {obj['v']!r}")
        group = GroupParams.from_json(obj["group"], "$.group")
        eph = from_hex(obj["eph"], "$.eph")
        if not group.contains(eph):
            raise FormatError("$.eph", "ephemeral value is not a subgroup element")
        e_prime = obj["e_prime"]
        if not isinstance(e_prime, str) or not DEC_RE.fullmatch(e_prime) or int(e_prime) >= group.q:
            raise FormatError("$.e_prime", "expected decimal scalar below q")
        try:
            policy = from_obj(obj["policy"], q=group.q, max_leaves=DEFAULT_MAX_LEAVES)
        except FormatError as exc:
            raise FormatError("$.policy" + exc.path[1:], exc.message) from None
        if not isinstance(policy, ModifiedFormula):
            raise FormatError("$.policy", "policy carries no public Y leaves")
        if policy.leaf_count > 2 * DEFAULT_MAX_LEAVES:
            raise FormatError("$.policy", "policy exceeds twice the formula size limit")
        tag = obj["tag"]
        if tag is not None:
            try:
                tag = bytes.fromhex(tag)
            except (TypeError, ValueError):
                raise FormatError("$.tag", "expected hex string or null") from None
            if len(tag) != 32:
                raise FormatError("$.tag", "tag must be 32 bytes")
        return cls(group, int(e_prime), eph, policy, tag)


def _scalar_bytes(group: GroupParams, v: int) -> bytes:
    return v.to_bytes((group.q.bit_length() + 7) // 8, "big")


def integrity_tag(group: GroupParams, s: int, message: int) -> bytes:
    # Keyed by s: an unkeyed hash of M would let anyone brute-force small M.
    return hashlib.sha256(b"mkabe-tag-v1" + _scalar_bytes(group, s)
                          + _scalar_bytes(group, message)).digest()


def setup(attrs, group: GroupParams, rng: RandomSource):
    """One independent keypair per community, plus the public key set."""
    attrs = list(attrs)
    seen = set()
    for attr in attrs:
        if not isinstance(attr, str) or not IDENT_RE.fullmatch(attr):
            raise ValueError(f"invalid attribute identifier {attr!r}")
        if attr in seen:
            raise DuplicateAttribute(f"attribute {attr!r} listed twice")
        seen.add(attr)
    keypairs = []
    for attr in attrs:
        sk = group.random_scalar(rng)
        keypairs.append(CommunityKeypair(attr, sk, group.gexp(sk)))
    return keypairs, PublicParams(group, {kp.attr: kp.pk for kp in keypairs})


def seal(message: int, s: int, eph: int, mks: Mapping[str, MasterKey], f: Formula,
         group: GroupParams, rng: RandomSource, prf: PRF, integrity: bool = False) -> Ciphertext:
    """Build a ciphertext from an already chosen secret and master keys."""
    tr = transform(s, f, mks, group.q, rng, prf)
    tag = integrity_tag(group, s, message) if integrity else None
    return Ciphertext(group, (message + s) % group.q, eph, tr.modified, tag)


def encrypt(message: int, pp: PublicParams, f: Formula, rng: RandomSource,
            prf: Optional[PRF] = None, integrity: bool = False) -> Ciphertext:
    group = pp.group
    if not group.is_scalar(message):
        raise ValueError("message outside Z_q")
    for attr in sorted(f.attributes()):
        if attr not in pp.pks:
            raise UnknownAttribute(attr)
    prf = prf or HashPrf(group.q)
    s = group.random_scalar(rng)
    e = group.random_scalar(rng)
    mks = {attr: MasterKey(attr, group.element_bytes(group.exp(pp.pks[attr], e)))
           for attr in sorted(f.attributes())}
    return seal(message, s, group.gexp(e), mks, f, group, rng, prf, integrity)


def master_keys(ct: Ciphertext, sks: Mapping[str, int], attrs) -> dict[str, MasterKey]:
    group = ct.group
    out = {}
    for attr in sorted(set(attrs) & ct.policy.attributes()):
        if attr not in sks:
            raise MissingMasterKey(attr)
        out[attr] = MasterKey(attr, group.element_bytes(group.exp(ct.eph, sks[attr])))
    return out


def recover_secret(ct: Ciphertext, sks: Mapping[str, int], attrs,
                   prf: Optional[PRF] = None) -> int:
    group = ct.group
    prf = prf or HashPrf(group.q)
    tr = TransformResult(ct.policy, ct.y_count)
    return reconstruct_advanced(tr, master_keys(ct, sks, attrs), attrs, group.q, prf)


def open_ciphertext(ct: Ciphertext, sks: Mapping[str, int], attrs,
                    pp: Optional[PublicParams] = None,
                    prf: Optional[PRF] = None) -> tuple[int, int]:
    """Like :func:`decrypt` but also returns the recovered sharing secret."""
    group = ct.group
    if pp is not None and pp.group != group:
        raise FormatError("$.group", "ciphertext group differs from public parameters")
    if not group.contains(ct.eph):
        raise FormatError("$.eph", "ephemeral value is not a subgroup element")
    s = recover_secret(ct, sks, attrs, prf)
    message = (ct.e_prime - s) % group.q
    if ct.tag is not None and not hmac.compare_digest(ct.tag, integrity_tag(group, s, message)):
        raise IntegrityFailure("integrity tag mismatch: wrong keys or corrupted ciphertext")
    return message, s


def decrypt(ct: Ciphertext, sks: Mapping[str, int], attrs,
            pp: Optional[PublicParams] = None, prf: Optional[PRF] = None) -> int:
    """Recover ``M``; raises NotSatisfied or, when tagged, IntegrityFailure."""
    return open_ciphertext(ct, sks, attrs, pp, prf)[0]
