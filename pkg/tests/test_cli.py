import json

import pytest

from mkabe.cli import main


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def world(tmp_path, capsys):
    params = tmp_path / "params.json"
    assert run(capsys, "params", "--n", 10, "--seed", "01", "--out", params)[0] == 0
    code, out, _ = run(capsys, "keygen", "--params", params, "--attrs", "A,B,C,D",
                       "--out-dir", tmp_path, "--seed", "02")
    assert code == 0
    assert len(out.split()) == 5
    return tmp_path


def test_params_file(tmp_path, capsys):
    out = tmp_path / "p.json"
    assert run(capsys, "params", "--n", 10, "--seed", "01", "--out", out)[0] == 0
    assert json.loads(out.read_text()) == {"p": "1025", "q": "409", "g": "10"}
    assert run(capsys, "params", "--n", 2, "--out", out)[0] == 2


def test_keygen_files(world):
    key = json.loads((world / "A.key.json").read_text())
    assert set(key) == {"attr", "sk", "pk"} and key["attr"] == "A"
    pp = json.loads((world / "publicparams.json").read_text())
    assert sorted(pp["pks"]) == ["A", "B", "C", "D"]


def test_keygen_duplicate_attribute(world, capsys):
    assert run(capsys, "keygen", "--params", world / "params.json", "--attrs", "A,A",
               "--out-dir", world / "x")[0] == 2


def test_encrypt_decrypt(world, capsys):
    ct = world / "ct.json"
    policy = "(A & B) | (B & C) | (C & D)"
    assert run(capsys, "encrypt", "--pub", world / "publicparams.json", "--policy", policy,
               "--message", 7, "--out", ct, "--seed", "03")[0] == 0
    obj = json.loads(ct.read_text())
    assert set(obj) == {"v", "group", "eph", "e_prime", "policy", "tag"}
    keys = [world / "A.key.json", world / "B.key.json", world / "C.key.json"]
    code, out, _ = run(capsys, "decrypt", "--ct", ct, "--keys", *keys[:2])
    assert (code, out.strip()) == (0, "7")
    code, _, err = run(capsys, "decrypt", "--ct", ct, "--keys", keys[0], keys[2])
    assert code == 3 and "satisfy" in err


def test_decrypt_wrong_key_integrity(world, capsys, tmp_path):
    ct = world / "ct.json"
    run(capsys, "encrypt", "--pub", world / "publicparams.json", "--policy", "A & B",
        "--message", 9, "--out", ct, "--seed", "04")
    fake = json.loads((world / "B.key.json").read_text())
    other = json.loads((world / "C.key.json").read_text())
    fake["sk"], fake["pk"] = other["sk"], other["pk"]
    path = tmp_path / "fake.json"
    path.write_text(json.dumps(fake))
    assert run(capsys, "decrypt", "--ct", ct, "--keys", world / "A.key.json", path)[0] == 4


def test_encrypt_unknown_attribute_and_bad_input(world, capsys):
    pub = world / "publicparams.json"
    assert run(capsys, "encrypt", "--pub", pub, "--policy", "A & Z", "--message", 1,
               "--out", world / "x.json")[0] == 2
    assert run(capsys, "encrypt", "--pub", pub, "--policy", "A &", "--message", 1,
               "--out", world / "x.json")[0] == 2
    assert run(capsys, "encrypt", "--pub", pub, "--policy", "A", "--message", 1033,
               "--out", world / "x.json")[0] == 2
    assert run(capsys, "decrypt", "--ct", world / "missing.json",
               "--keys", world / "A.key.json")[0] == 2


def test_malformed_ciphertext(world, capsys):
    ct = world / "bad.json"
    ct.write_text('{"v": 1}')
    code, _, err = run(capsys, "decrypt", "--ct", ct, "--keys", world / "A.key.json")
    assert code == 2 and "$" in err


def test_hybrid_round_trip(world, capsys):
    data = world / "data.bin"
    data.write_bytes(b"hello world\x00\xff" * 10)
    ct = world / "h.json"
    assert run(capsys, "encrypt", "--pub", world / "publicparams.json", "--policy", "A | B",
               "--hybrid", "--in", data, "--out", ct, "--seed", "05")[0] == 0
    out = world / "out.bin"
    assert run(capsys, "decrypt", "--ct", ct, "--keys", world / "B.key.json",
               "--out", out)[0] == 0
    assert out.read_bytes() == data.read_bytes()
    obj = json.loads(ct.read_text())
    obj["payload"] = "00" + obj["payload"][2:]
    ct.write_text(json.dumps(obj))
    assert run(capsys, "decrypt", "--ct", ct, "--keys", world / "B.key.json",
               "--out", out)[0] == 4


@pytest.mark.parametrize("scheme", ["advanced", "standard"])
def test_share_reconstruct(world, capsys, scheme):
    sharing = world / f"{scheme}.json"
    kd = world / "mk"
    assert run(capsys, "share", "--params", world / "params.json", "--policy",
               "A & (B | C)", "--secret", 5, "--scheme", scheme, "--keys-dir", kd,
               "--out", sharing, "--seed", "06")[0] == 0
    keys = [kd / "A.mk.json", kd / "C.mk.json"] if scheme == "advanced" else []
    code, out, _ = run(capsys, "reconstruct", "--sharing", sharing, "--keys", *keys,
                       "--attrs", "A,C")
    assert (code, out.strip()) == (0, "5")
    code, _, _ = run(capsys, "reconstruct", "--sharing", sharing, "--keys", *keys[1:],
                     "--attrs", "C")
    assert code == 3


def test_inspect(capsys):
    code, out, _ = run(capsys, "inspect", "(A & B) | (B & C) | (C & D)")
    assert code == 0
    assert out.splitlines() == ["A,1,0", "B,1,1", "B,2,2", "C,1,3", "C,2,4", "D,1,5"]
    assert run(capsys, "inspect", "A") == (0, "A,1,0\n", "")
    assert run(capsys, "inspect", "A & & B")[0] == 2


def test_game_output(capsys):
    code, out, _ = run(capsys, "game", "selective-id", "--adversary", "omniscient",
                       "--trials", 50, "--seed", "aa")
    assert code == 0
    report = json.loads(out)
    assert report["successes"] == 50 and report["advantage"] == 0.5
    assert run(capsys, "game", "m-ddh", "--adversary", "omniscient")[0] == 2
    assert run(capsys, "game", "selective-set", "--corrupt", "A,B", "--trials", 5)[0] == 2


def test_corrupted_e_prime_exit_4(world, capsys):
    ct = world / "ct.json"
    run(capsys, "encrypt", "--pub", world / "publicparams.json", "--policy", "A | B",
        "--message", 7, "--out", ct, "--seed", "07")
    obj = json.loads(ct.read_text())
    obj["e_prime"] = str((int(obj["e_prime"]) + 1) % 1033)
    ct.write_text(json.dumps(obj))
    assert run(capsys, "decrypt", "--ct", ct, "--keys", world / "A.key.json")[0] == 4


def test_same_seed_same_files(tmp_path, capsys):
    outs = []
    for d in ("x", "y"):
        base = tmp_path / d
        base.mkdir()
        run(capsys, "params", "--n", 10, "--seed", "01", "--out", base / "params.json")
        run(capsys, "keygen", "--params", base / "params.json", "--attrs", "A,B,C,D",
            "--out-dir", base, "--seed", "01")
        outs.append({p.name: p.read_bytes() for p in sorted(base.iterdir())})
    assert outs[0] == outs[1] and len(outs[0]) == 6
