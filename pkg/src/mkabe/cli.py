"""Command-line front end.

Exit codes: 0 success, 2 invalid input (usage, parse, file format, unknown
or duplicate attributes, protocol violations), 3 attributes do not satisfy
the policy, 4 integrity check failed.
"""

from __future__ import annotations

import argparse
import hashlib
import hmac
import json
import secrets
import sys
from pathlib import Path

from . import abe, games
from .crypto import TEST, TINY, GroupParams, HashPrf, generate_params, seeded_rng, system_rng
from .errors import FormatError, IntegrityFailure, MkAbeError, NotSatisfied, UnknownAttribute
from .formula import (DEC_RE, IDENT_RE, Formula, ModifiedFormula, canonical_json, from_obj,
                      inspect_rows, parse, to_obj)
from .sss_advanced import MasterKey, TransformResult, reconstruct_advanced, transform
from .sss_standard import Sharing, reconstruct_standard, share_standard

EXIT_INPUT, EXIT_NOT_SATISFIED, EXIT_INTEGRITY = 2, 3, 4

GROUP_PRESETS = {"tiny": TINY, "test": TEST}


class InputError(MkAbeError):
    pass


# -- file helpers ----------------------------------------------------------

def _read_json(path: str):
    try:
        with open(path, "rb") as fh:
            return json.loads(fh.read().decode("utf-8"))
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except (UnicodeDecodeError, ValueError) as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from None


def _write(path: str | Path, data: bytes) -> None:
    if str(path) == "-":
        sys.stdout.buffer.write(data + b"\n")
        sys.stdout.flush()
        return
    with open(path, "wb") as fh:
        fh.write(data + b"\n")


def _load(path: str, loader):
    try:
        return loader(_read_json(path))
    except FormatError as exc:
        raise InputError(f"{path}: {exc}") from None


def _seed(text: str | None) -> bytes | None:
    if text is None:
        return None
    text = text.strip().lower()
    if text.startswith("0x"):
        text = text[2:]
    if len(text) % 2:
        text = "0" + text
    try:
        return bytes.fromhex(text)
    except ValueError:
        raise InputError(f"--seed must be hex, got {text!r}") from None


def _rng(args, label: str):
    seed = _seed(args.seed)
    return system_rng() if seed is None else seeded_rng(label.encode() + b":" + seed)


def _attr_list(text: str) -> list[str]:
    attrs = [a.strip() for a in text.split(",") if a.strip()]
    for attr in attrs:
        if not IDENT_RE.fullmatch(attr):
            raise InputError(f"invalid attribute name {attr!r}")
    return attrs


def _group(args) -> GroupParams:
    if getattr(args, "params", None):
        return _load(args.params, GroupParams.from_json)
    return GROUP_PRESETS[args.group]


# -- hybrid payloads (extension: arbitrary bytes, not a Z_q message) -------

def _hybrid_key(group: GroupParams, s: int, m: int) -> bytes:
    width = (group.q.bit_length() + 7) // 8
    return hashlib.sha256(b"mkabe-hybrid-v1" + s.to_bytes(width, "big")
                          + m.to_bytes(width, "big")).digest()


def _keystream(key: bytes, n: int) -> bytes:
    out = bytearray()
    ctr = 0
    while len(out) < n:
        out += hashlib.sha256(key + b"stream" + ctr.to_bytes(8, "big")).digest()
        ctr += 1
    return bytes(out[:n])


def _xor(data: bytes, stream: bytes) -> bytes:
    return bytes(a ^ b for a, b in zip(data, stream))


# -- commands --------------------------------------------------------------

def cmd_params(args) -> int:
    seed = _seed(args.seed)
    if seed is None:
        seed = secrets.token_bytes(16)
    try:
        group = generate_params(args.n, seed)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    _write(args.out, canonical_json(group.to_json()))
    return 0


def cmd_keygen(args) -> int:
    group = _load(args.params, GroupParams.from_json)
    attrs = _attr_list(args.attrs)
    if not attrs:
        raise InputError("--attrs is empty")
    keypairs, pp = abe.setup(attrs, group, _rng(args, "keygen"))
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for kp in keypairs:
        path = out / f"{kp.attr}.key.json"
        _write(path, canonical_json(kp.to_json()))
        print(path)
    path = out / "publicparams.json"
    _write(path, canonical_json(pp.to_json()))
    print(path)
    return 0


def cmd_encrypt(args) -> int:
    pp = _load(args.pub, abe.PublicParams.from_json)
    group = pp.group
    f = parse(args.policy)
    rng = _rng(args, "encrypt")
    integrity = not args.no_integrity
    if args.hybrid:
        if args.infile is None:
            raise InputError("--hybrid needs --in FILE with the payload")
        data = Path(args.infile).read_bytes() if args.infile != "-" else sys.stdin.buffer.read()
        ct, s, m = _encrypt_session(pp, f, rng, integrity)
        key = _hybrid_key(group, s, m)
        payload = _xor(data, _keystream(key, len(data)))
        obj = ct.to_json()
        obj["payload"] = payload.hex()
        obj["payload_tag"] = hmac.new(key, b"mac" + payload, hashlib.sha256).hexdigest()
        _write(args.out, canonical_json(obj))
        return 0
    if args.message is None or not DEC_RE.fullmatch(args.message):
        raise InputError("--message must be a decimal integer (or use --hybrid)")
    message = int(args.message)
    if message >= group.q:
        raise InputError(f"--message must be below q={group.q}")
    ct = abe.encrypt(message, pp, f, rng, integrity=integrity)
    _write(args.out, ct.dumps())
    return 0


def _encrypt_session(pp, f: Formula, rng, integrity: bool):
    group = pp.group
    for attr in sorted(f.attributes()):
        if attr not in pp.pks:
            raise UnknownAttribute(attr)
    m = group.random_scalar(rng)
    s = group.random_scalar(rng)
    e = group.random_scalar(rng)
    mks = {a: MasterKey(a, group.element_bytes(group.exp(pp.pks[a], e))) for a in sorted(f.attributes())}
    ct = abe.seal(m, s, group.gexp(e), mks, f, group, rng, HashPrf(group.q), integrity)
    return ct, s, m


def _load_keys(paths, group=None) -> dict[str, int]:
    sks = {}
    for path in paths:
        kp = _load(path, lambda obj: abe.CommunityKeypair.from_json(obj, group))
        if kp.attr in sks:
            raise InputError(f"two key files for attribute {kp.attr!r}")
        sks[kp.attr] = kp.sk
    return sks


def cmd_decrypt(args) -> int:
    obj = _read_json(args.ct)
    hybrid = isinstance(obj, dict) and "payload" in obj
    try:
        ct = abe.Ciphertext.from_json(obj, extra_keys=("payload", "payload_tag"))
    except FormatError as exc:
        raise InputError(f"{args.ct}: {exc}") from None
    sks = _load_keys(args.keys, ct.group)
    attrs = _attr_list(args.attrs) if args.attrs else sorted(sks)
    missing = [a for a in attrs if a not in sks]
    if missing:
        raise InputError(f"no key file for attributes {missing}")
    m, s = abe.open_ciphertext(ct, sks, attrs)
    if not hybrid:
        print(m)
        return 0
    try:
        payload = bytes.fromhex(obj["payload"])
        tag = bytes.fromhex(obj["payload_tag"])
    except (TypeError, ValueError, KeyError):
        raise InputError(f"{args.ct}: malformed hybrid payload") from None
    key = _hybrid_key(ct.group, s, m)
    if not hmac.compare_digest(tag, hmac.new(key, b"mac" + payload, hashlib.sha256).digest()):
        raise IntegrityFailure("payload authentication failed")
    data = _xor(payload, _keystream(key, len(payload)))
    if args.out in (None, "-"):
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    else:
        Path(args.out).write_bytes(data)
    return 0


def cmd_share(args) -> int:
    group = _load(args.params, GroupParams.from_json)
    f = parse(args.policy)
    if not DEC_RE.fullmatch(args.secret) or int(args.secret) >= group.q:
        raise InputError(f"--secret must be a decimal integer below q={group.q}")
    secret = int(args.secret)
    rng = _rng(args, "share")
    if args.scheme == "standard":
        _write(args.out, share_standard(secret, f, group.q, rng).dumps())
        return 0
    out = Path(args.keys_dir)
    out.mkdir(parents=True, exist_ok=True)
    mks = {}
    for attr in sorted(f.attributes()):
        mks[attr] = MasterKey(attr, group.random_key(rng))
        path = out / f"{attr}.mk.json"
        _write(path, canonical_json({"attr": attr, "mk": mks[attr].key.hex()}))
        print(path)
    tr = transform(secret, f, mks, group.q, rng, HashPrf(group.q))
    _write(args.out, canonical_json({"scheme": "advanced", "group": group.to_json(),
                                     "policy": to_obj(tr.modified)}))
    return 0


def _load_master_key(path: str, group: GroupParams) -> MasterKey:
    def loader(obj):
        if not isinstance(obj, dict) or set(obj) != {"attr", "mk"}:
            raise FormatError("$", "master key file needs exactly attr, mk")
        if not isinstance(obj["attr"], str) or not IDENT_RE.fullmatch(obj["attr"]):
            raise FormatError("$.attr", "invalid attribute identifier")
        try:
            key = bytes.fromhex(obj["mk"])
        except (TypeError, ValueError):
            raise FormatError("$.mk", "expected hex string") from None
        if len(key) != group.element_width:
            raise FormatError("$.mk", f"master key must be {group.element_width} bytes")
        return MasterKey(obj["attr"], key)

    return _load(path, loader)


def cmd_reconstruct(args) -> int:
    obj = _read_json(args.sharing)
    scheme = obj.get("scheme") if isinstance(obj, dict) else None
    if scheme == "standard":
        sharing = _load(args.sharing, Sharing.from_json)
        if not args.attrs:
            raise InputError("--attrs is required for standard sharings")
        print(reconstruct_standard(sharing, _attr_list(args.attrs)))
        return 0
    if scheme != "advanced" or set(obj) != {"scheme", "group", "policy"}:
        raise InputError(f"{args.sharing}: unknown sharing format")
    try:
        group = GroupParams.from_json(obj["group"], "$.group")
        policy = from_obj(obj["policy"], q=group.q)
    except FormatError as exc:
        raise InputError(f"{args.sharing}: {exc}") from None
    if not isinstance(policy, ModifiedFormula):
        raise InputError(f"{args.sharing}: policy has no public Y leaves")
    mks = {}
    for path in args.keys or []:
        mk = _load_master_key(path, group)
        mks[mk.attr] = mk
    attrs = _attr_list(args.attrs) if args.attrs else sorted(mks)
    tr = TransformResult(policy, len(policy.y_leaves()))
    print(reconstruct_advanced(tr, mks, attrs, group.q, HashPrf(group.q)))
    return 0


def cmd_inspect(args) -> int:
    f = parse(args.formula)
    for attr, j, addr in inspect_rows(f):
        print(f"{attr},{j},{addr}")
    return 0


def cmd_game(args) -> int:
    seed = _seed(args.seed)
    if seed is None:
        seed = secrets.token_bytes(16)
    group = _group(args)
    name, adv_name = args.name, args.adversary
    policy = args.policy
    corrupt = _attr_list(args.corrupt) if args.corrupt is not None else None
    adversaries = {
        "selective-id": {"coinflip": games.CoinFlipAdversary,
                         "omniscient": games.ShareReconstructionAdversary,
                         "corrupt": games.ShareReconstructionAdversary},
        "selective-set": {"coinflip": games.CoinFlipAdversary,
                          "omniscient": games.DecryptionAdversary,
                          "corrupt": games.DecryptionAdversary},
        "m-prf": {"coinflip": games.CoinFlipDistinguisher, "zero-detect": games.ZeroDetector},
        "m-ddh": {"coinflip": games.CoinFlipDistinguisher, "dlog": games.DlogDistinguisher},
    }[name]
    if adv_name not in adversaries:
        raise InputError(f"game {name} supports adversaries {sorted(adversaries)}")
    cls = adversaries[adv_name]
    if name in ("selective-id", "selective-set"):
        adv = cls(policy, corrupt)
        leak = adv_name == "omniscient"
        if name == "selective-id":
            config = games.SelectiveIdConfig(group, args.family, leak_all_keys=leak)
            result = games.run_selective_id(adv, config, args.trials, seed)
        else:
            config = games.SelectiveSetConfig(group, args.family, leak_all_keys=leak)
            result = games.run_selective_set(adv, config, args.trials, seed)
    elif name == "m-prf":
        result = games.run_m_prf(cls(), args.m, args.trials, seed, group, args.family)
    else:
        result = games.run_m_ddh(cls(), args.m, group, args.trials, seed)
    _write("-", canonical_json(result.to_json()))
    return 0


# -- argument parsing ------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mkabe", description="Master-key secret sharing and attribute-based encryption")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("params", help="generate Schnorr group parameters")
    p.add_argument("--n", type=int, required=True, help="security parameter: 2^n < q < 2^(n+1)")
    p.add_argument("--seed")
    p.add_argument("--out", default="params.json")
    p.set_defaults(func=cmd_params)

    p = sub.add_parser("keygen", help="generate one keypair per attribute community")
    p.add_argument("--params", default="params.json")
    p.add_argument("--attrs", required=True, help="comma-separated attribute names")
    p.add_argument("--out-dir", default=".")
    p.add_argument("--seed")
    p.set_defaults(func=cmd_keygen)

    p = sub.add_parser("encrypt", help="encrypt a message under an access policy")
    p.add_argument("--pub", default="publicparams.json")
    p.add_argument("--policy", required=True)
    p.add_argument("--message", help="decimal message in Z_q")
    p.add_argument("--hybrid", action="store_true",
                   help="extension: encrypt an arbitrary byte payload (see --in)")
    p.add_argument("--in", dest="infile", help="payload file for --hybrid ('-' for stdin)")
    p.add_argument("--no-integrity", action="store_true", help="omit the integrity tag")
    p.add_argument("--out", default="ciphertext.json")
    p.add_argument("--seed")
    p.set_defaults(func=cmd_encrypt)

    p = sub.add_parser("decrypt", help="decrypt with community key files")
    p.add_argument("--ct", default="ciphertext.json")
    p.add_argument("--keys", nargs="+", required=True)
    p.add_argument("--attrs", help="attributes to use (default: those of the key files)")
    p.add_argument("--out", help="output file for hybrid payloads (default stdout)")
    p.set_defaults(func=cmd_decrypt)

    p = sub.add_parser("share", help="share a secret under a formula")
    p.add_argument("--params", default="params.json")
    p.add_argument("--policy", required=True)
    p.add_argument("--secret", required=True)
    p.add_argument("--scheme", choices=["advanced", "standard"], default="advanced")
    p.add_argument("--keys-dir", default=".", help="where advanced master keys are written")
    p.add_argument("--out", default="sharing.json")
    p.add_argument("--seed")
    p.set_defaults(func=cmd_share)

    p = sub.add_parser("reconstruct", help="reconstruct a shared secret")
    p.add_argument("--sharing", default="sharing.json")
    p.add_argument("--keys", nargs="*", help="master key files (advanced scheme)")
    p.add_argument("--attrs", help="comma-separated attributes held")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("inspect", help="print attr,j,addr for each leaf")
    p.add_argument("formula")
    p.set_defaults(func=cmd_inspect)

    p = sub.add_parser("game", help="run a security game and print its report")
    p.add_argument("name", choices=["selective-id", "selective-set", "m-prf", "m-ddh"])
    p.add_argument("--adversary", default="coinflip")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed")
    p.add_argument("--group", choices=sorted(GROUP_PRESETS), default="test")
    p.add_argument("--params", help="group parameter file (overrides --group)")
    p.add_argument("--policy", default="(A & B) | (B & C) | (C & D)")
    p.add_argument("--corrupt", help="comma-separated corrupt set (default: maximal unauthorized)")
    p.add_argument("--family", choices=sorted(games.PRF_FAMILIES), default="hash")
    p.add_argument("--m", type=int, default=1, help="oracle or tuple count for m-prf / m-ddh")
    p.set_defaults(func=cmd_game)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NotSatisfied as exc:
        print(f"mkabe: {exc}", file=sys.stderr)
        return EXIT_NOT_SATISFIED
    except IntegrityFailure as exc:
        print(f"mkabe: {exc}", file=sys.stderr)
        return EXIT_INTEGRITY
    except (MkAbeError, ValueError, OSError) as exc:
        print(f"mkabe: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
