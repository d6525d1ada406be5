import random

import pytest

from helpers import WORKED, subsets
from mkabe.crypto import TEST, TINY
from mkabe.errors import ProtocolViolation
from mkabe.formula import evaluate, parse
from mkabe.games import (CoinFlipAdversary, CoinFlipDistinguisher, DecryptionAdversary,
                         DlogDistinguisher, GameResult, SelectiveIdConfig, SelectiveSetConfig,
                         ShareReconstructionAdversary, ZeroDetector, ddh_tuples,
                         maximal_unauthorized, run_m_ddh, run_m_prf, run_selective_id,
                         run_selective_set, selective_id_trial, selective_set_trial, trial_rng)


def test_game_result_statistics():
    r = GameResult("x", 10_000, 5_200)
    assert r.advantage == pytest.approx(0.02)
    assert r.halfwidth == pytest.approx(0.0129, abs=1e-4)
    assert r.to_json()["successes"] == 5_200


def test_trial_rng_roles_independent():
    a = trial_rng(b"s", "g", 0, "challenger").random()
    assert a == trial_rng(b"s", "g", 0, "challenger").random()
    assert a != trial_rng(b"s", "g", 0, "adversary").random()
    assert a != trial_rng(b"s", "g", 1, "challenger").random()


def test_maximal_unauthorized():
    f = parse(WORKED)
    gamma = maximal_unauthorized(f)
    assert not evaluate(f, gamma)
    assert all(evaluate(f, gamma | {a}) for a in f.attributes() - gamma)


@pytest.mark.parametrize("trial, config", [
    (selective_id_trial, SelectiveIdConfig(universe=tuple("ABCD"))),
    (selective_set_trial, SelectiveSetConfig(universe=tuple("ABCD"))),
])
def test_protocol_violation_iff_corrupt_set_satisfies(trial, config):
    f = parse(WORKED)
    for gamma in subsets("ABCD"):
        adv = CoinFlipAdversary(WORKED, corrupt=gamma)
        run = lambda: trial(adv, config, random.Random(0), random.Random(1))
        if evaluate(f, gamma):
            with pytest.raises(ProtocolViolation):
                run()
        else:
            run()


def test_unknown_corrupt_trustee_rejected():
    adv = CoinFlipAdversary("A & B", corrupt=["Z"])
    with pytest.raises(ProtocolViolation):
        selective_id_trial(adv, SelectiveIdConfig(), random.Random(0), random.Random(0))


def test_challenger_coin_independent_of_forcing():
    # Forcing b after the draw keeps the challenger stream aligned: both
    # branches see identical keys, and the omniscient adversary is always right.
    adv = ShareReconstructionAdversary(WORKED)
    config = SelectiveIdConfig(leak_all_keys=True)
    for i in range(50):
        for b in (0, 1):
            assert selective_id_trial(adv, config, trial_rng(b"f", "x", i, "c"),
                                      trial_rng(b"f", "x", i, "a"), force_b=b)


def test_corrupt_keys_only_shown():
    seen = {}

    class Spy(CoinFlipAdversary):
        def receive_keys(self, keys):
            seen.update(keys)

    selective_id_trial(Spy(WORKED, corrupt="AC"), SelectiveIdConfig(), random.Random(0),
                       random.Random(0))
    assert set(seen) == {"A", "C"}


def test_selective_id_sanity():
    null = run_selective_id(CoinFlipAdversary(), trials=2000, seed=b"t")
    assert null.advantage <= 0.05
    honest = run_selective_id(ShareReconstructionAdversary(), trials=2000, seed=b"t")
    assert honest.advantage <= 0.05
    omni = run_selective_id(ShareReconstructionAdversary(),
                            SelectiveIdConfig(leak_all_keys=True), trials=200, seed=b"t")
    assert omni.successes == 200


def test_selective_id_oracle_mode():
    r = run_selective_id(ShareReconstructionAdversary(), SelectiveIdConfig(oracle_mode=True),
                         trials=2000, seed=b"o")
    assert r.advantage <= 0.05


@pytest.mark.parametrize("family", ["hash", "table"])
def test_selective_id_families(family):
    r = run_selective_id(ShareReconstructionAdversary(), SelectiveIdConfig(family=family),
                         trials=500, seed=b"f")
    assert r.advantage - r.halfwidth <= 0


def test_zero_prf_breaks_selective_id():
    # With a constant PRF the y values leak s directly.
    class YReader(ShareReconstructionAdversary):
        def candidate(self, challenge):
            return challenge.result.y_values[1]

    r = run_selective_id(YReader("A & B", corrupt=["A"]), SelectiveIdConfig(family="zero"),
                         trials=200, seed=b"z")
    assert r.successes == 200


def test_selective_set_sanity():
    null = run_selective_set(DecryptionAdversary(), trials=2000, seed=b"s")
    assert null.advantage <= 0.05
    omni = run_selective_set(DecryptionAdversary(), SelectiveSetConfig(leak_all_keys=True),
                             trials=200, seed=b"s")
    assert omni.successes == 200


@pytest.mark.parametrize("mode", ["dh", "random"])
def test_selective_set_ddh_modes(mode):
    r = run_selective_set(DecryptionAdversary(), SelectiveSetConfig(ddh=mode),
                          trials=2000, seed=b"d")
    assert r.advantage <= 0.05


def test_ddh_tuples_real_versus_random():
    rng = random.Random(3)
    dlog = {TINY.gexp(x): x for x in range(TINY.q)}
    for ga, gb, gc in ddh_tuples(TINY, 50, True, rng):
        assert gc == TINY.exp(gb, dlog[ga])
    fake = ddh_tuples(TINY, 200, False, rng)
    assert any(gc != TINY.exp(gb, dlog[ga]) for ga, gb, gc in fake)


def test_selective_set_rejects_bad_modes():
    with pytest.raises(ValueError):
        selective_set_trial(CoinFlipAdversary(), SelectiveSetConfig(ddh="x"),
                            random.Random(0), random.Random(0))
    with pytest.raises(ValueError):
        selective_set_trial(CoinFlipAdversary(), SelectiveSetConfig(ddh="dh", leak_all_keys=True),
                            random.Random(0), random.Random(0))


def test_m_prf():
    assert run_m_prf(CoinFlipDistinguisher(), m=2, trials=2000, seed=b"p").advantage <= 0.05
    assert run_m_prf(ZeroDetector(), trials=2000, seed=b"p").advantage <= 0.05
    zero = run_m_prf(ZeroDetector(), trials=500, seed=b"p", family="zero")
    assert zero.advantage >= 0.49
    with pytest.raises(ValueError):
        run_m_prf(ZeroDetector(), m=0)


def test_ddh_tuples_shape():
    rng = random.Random(0)
    tuples = ddh_tuples(TEST, 1, True, rng)
    assert len(tuples) == 1 and len(tuples[0]) == 3
    many = ddh_tuples(TEST, 4, True, rng)
    assert len({t[0] for t in many}) == 1
    for ga, gb, gab in many:
        assert all(TEST.contains(v) for v in (ga, gb, gab))


def test_m_ddh():
    assert run_m_ddh(CoinFlipDistinguisher(), m=3, trials=2000, seed=b"m").advantage <= 0.05
    r = run_m_ddh(DlogDistinguisher(), group=TINY, trials=2000, seed=b"m")
    assert r.advantage - r.halfwidth >= 0.3
    with pytest.raises(ValueError):
        run_m_ddh(DlogDistinguisher(), m=0)


def test_runs_are_reproducible():
    a = run_selective_set(CoinFlipAdversary(), trials=100, seed=b"r")
    b = run_selective_set(CoinFlipAdversary(), trials=100, seed=b"r")
    assert a == b


def test_m_prf_table_in_both_arms():
    r = run_m_prf(ZeroDetector(), trials=10_000, seed=b"tt", family="table")
    assert r.advantage <= 0.02


def test_corrupt_only_adversaries_10k():
    sid = run_selective_id(ShareReconstructionAdversary(), trials=10_000, seed=b"k")
    sset = run_selective_set(DecryptionAdversary(), trials=10_000, seed=b"k")
    assert sid.advantage <= 0.05 and sset.advantage <= 0.05
