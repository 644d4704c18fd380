"""Protocol engine: sifting, blocks, parities, hashing, full sessions."""

import math

import numpy as np
import pytest

from relqkd.adversary import EveStrategy, ResendPolicy
from relqkd.distill import (
    ProtocolConfig,
    Transcript,
    estimate_error,
    form_parity_bits,
    hash_rounds,
    majority_decode,
    replay_keys,
    run_session,
    sift,
)
from relqkd.errors import (
    InvalidParameterError,
    ResourceExhaustedError,
)
from relqkd.measurement import BobOutcome


def make_config(**overrides):
    defaults = dict(
        key_length=16, block_size=3, blocks_per_parity=4, hash_rounds=8,
        disclose_fraction=0.1, state_extent=1.0, channel_length=0.5, seed=42,
    )
    defaults.update(overrides)
    return ProtocolConfig(**defaults)


class TestSift:
    def test_all_conclusive_kept(self):
        outcomes = [BobOutcome.ZERO, BobOutcome.ONE, BobOutcome.ZERO]
        assert list(sift(outcomes)) == [0, 1, 2]

    def test_all_inconclusive_dropped(self):
        outcomes = [BobOutcome.INCONCLUSIVE] * 4
        assert sift(outcomes).size == 0

    def test_kept_fraction_matches_loss_rate(self):
        rng = np.random.default_rng(80)
        n = 10_000
        lost = rng.random(n) < 0.2
        outcomes = [BobOutcome.INCONCLUSIVE if l else BobOutcome.ZERO for l in lost]
        kept = sift(outcomes).size / n
        sigma = math.sqrt(0.8 * 0.2 / n)
        assert abs(kept - 0.8) <= 3.0 * sigma


class TestEstimateError:
    def test_noiseless(self):
        rng = np.random.default_rng(0)
        bits = np.ones(100, dtype=int)
        p_err, positions = estimate_error(bits, bits, 0.2, rng)
        assert p_err == 0.0
        assert positions.size == 20

    def test_matches_flip_rate(self):
        rng = np.random.default_rng(1)
        n = 100_000
        a = rng.integers(0, 2, n)
        flips = rng.random(n) < 0.05
        b = a ^ flips
        p_err, positions = estimate_error(a, b, 0.1, rng)
        sigma = math.sqrt(0.05 * 0.95 / positions.size)
        assert abs(p_err - 0.05) <= 3.0 * sigma

    def test_estimate_uses_only_disclosed_positions(self):
        rng = np.random.default_rng(2)
        a = np.zeros(50, dtype=int)
        b = a.copy()
        p_err, positions = estimate_error(a, b, 0.3, rng)
        b2 = a.copy()
        undisclosed = np.setdiff1d(np.arange(50), positions)
        b2[undisclosed] = 1  # corrupt only what was never disclosed
        p_err2, positions2 = estimate_error(a, b2, 0.3, np.random.default_rng(2))
        assert list(positions2) == list(positions)
        assert p_err2 == p_err == 0.0

    def test_zero_disclosure_rejected(self):
        with pytest.raises(InvalidParameterError):
            estimate_error(np.ones(100), np.ones(100), 0.001, np.random.default_rng(0))


class TestMajority:
    @pytest.mark.parametrize("block,expected", [
        ((0, 0, 0, 0, 0), 0),
        ((0, 1, 0, 1, 0), 0),
        ((1, 1, 0, 1, 1), 1),
        ((1,), 1),
    ])
    def test_votes(self, block, expected):
        assert majority_decode(block) == expected

    def test_even_block_rejected(self):
        with pytest.raises(InvalidParameterError):
            majority_decode((0, 1, 1, 0))

    @pytest.mark.parametrize("p_flip", [0.01, 0.05, 0.1])
    @pytest.mark.parametrize("k", [3, 5, 7])
    def test_block_error_matches_binomial_tail(self, p_flip, k):
        blocks = 50_000
        rng = np.random.default_rng(900 + k * 10 + int(p_flip * 100))
        flips = (rng.random((blocks, k)) < p_flip).astype(int)
        wrong = sum(majority_decode(row) for row in flips)
        expected = sum(
            math.comb(k, j) * p_flip ** j * (1.0 - p_flip) ** (k - j)
            for j in range(k // 2 + 1, k + 1)
        )
        sigma = math.sqrt(expected * (1.0 - expected) / blocks)
        assert abs(wrong / blocks - expected) <= 3.0 * sigma + 1e-9


class TestParityBits:
    def test_all_zero_blocks(self):
        assert list(form_parity_bits(np.zeros(8, dtype=int), [range(0, 4), range(4, 8)])) == [0, 0]

    def test_single_one_block(self):
        bits = np.zeros(4, dtype=int)
        bits[2] = 1
        assert list(form_parity_bits(bits, [range(0, 4)])) == [1]

    def test_against_recomputation(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            bits = rng.integers(0, 2, 24)
            groups = [range(j * 4, (j + 1) * 4) for j in range(6)]
            expected = [int(np.bitwise_xor.reduce(bits[list(g)])) for g in groups]
            assert list(form_parity_bits(bits, groups)) == expected

    def test_overlapping_groups_rejected(self):
        with pytest.raises(InvalidParameterError):
            form_parity_bits(np.zeros(6, dtype=int), [range(0, 3), range(2, 5)])

    def test_missing_blocks_exhaust(self):
        with pytest.raises(ResourceExhaustedError):
            form_parity_bits(np.zeros(4, dtype=int), [range(0, 3), range(3, 6)])


class TestHashRounds:
    def test_identical_strings_never_abort(self):
        rng = np.random.default_rng(3)
        bits = rng.integers(0, 2, 24)
        result = hash_rounds(bits, bits.copy(), 8, rng)
        assert not result.aborted
        assert result.key_a.size == 16
        assert (result.key_a == result.key_b).all()

    def test_each_round_shortens_by_one(self):
        rng = np.random.default_rng(4)
        bits = rng.integers(0, 2, 21)
        result = hash_rounds(bits, bits.copy(), 5, rng)
        lengths = [len(h.subset) for h in result.log]
        assert lengths == [21, 20, 19, 18, 17]
        assert result.key_a.size == 16

    def test_single_round_detection_is_half(self):
        rng = np.random.default_rng(6)
        n, trials = 20, 20_000
        detected = 0
        for _ in range(trials):
            a = rng.integers(0, 2, n)
            b = a.copy()
            b[rng.integers(0, n)] ^= 1
            detected += hash_rounds(a, b, 1, rng).aborted
        sigma = math.sqrt(0.25 / trials)
        assert abs(detected / trials - 0.5) <= 3.0 * sigma + 1e-5

    def test_length_mismatch_rejected(self):
        with pytest.raises(InvalidParameterError):
            hash_rounds([0, 1], [0, 1, 1], 1, np.random.default_rng(0))

    def test_too_many_rounds_rejected(self):
        with pytest.raises(InvalidParameterError):
            hash_rounds([0, 1, 1], [0, 1, 1], 3, np.random.default_rng(0))


class TestRunSession:
    def test_noiseless_session_agrees(self):
        transcript = run_session(make_config())
        assert not transcript.aborted
        assert transcript.key_a.size == 16
        assert (transcript.key_a == transcript.key_b).all()
        assert transcript.p_err_estimate == 0.0
        # Noiseless and honest: every round is conclusive.
        assert all(r.sifted for r in transcript.rounds)

    def test_same_seed_byte_identical(self):
        t1 = run_session(make_config(flip_probability=0.02, seed=77))
        t2 = run_session(make_config(flip_probability=0.02, seed=77))
        assert t1.to_text() == t2.to_text()

    def test_different_seed_differs(self):
        t1 = run_session(make_config(seed=1))
        t2 = run_session(make_config(seed=2))
        assert t1.to_text() != t2.to_text()

    def test_block_and_group_structure(self):
        transcript = run_session(make_config(seed=9))
        members = {}
        for r in transcript.rounds:
            if r.block is not None:
                assert r.sifted and not r.disclosed
                members.setdefault(r.block, []).append(r)
        # Every used block has exactly k members with identical sent bits,
        # and belongs to exactly one parity group of n blocks.
        groups = {}
        for block, rows in members.items():
            assert len(rows) == 3
            assert len({r.a_bit for r in rows}) == 1
            group_ids = {r.parity_group for r in rows}
            assert len(group_ids) == 1
            groups.setdefault(group_ids.pop(), set()).add(block)
        assert len(groups) == 16 + 8
        assert all(len(blocks) == 4 for blocks in groups.values())

    def test_disclosed_rounds_not_in_blocks(self):
        transcript = run_session(make_config(seed=10))
        for r in transcript.rounds:
            if r.disclosed:
                assert r.block is None

    def test_flip_noise_shows_in_estimate(self):
        transcript = run_session(make_config(
            key_length=8, hash_rounds=4, block_size=5, flip_probability=0.05,
            disclose_fraction=0.3, seed=1234))
        disclosed = sum(r.disclosed for r in transcript.rounds)
        sigma = math.sqrt(0.05 * 0.95 / disclosed)
        assert abs(transcript.p_err_estimate - 0.05) <= 4.0 * sigma

    def test_loss_shortens_sifted_set(self):
        transcript = run_session(make_config(loss_probability=0.3, seed=5))
        sifted = sum(r.sifted for r in transcript.rounds)
        assert 0 < sifted < len(transcript.rounds)
        assert not transcript.aborted

    def test_eavesdropper_raises_disclosed_mismatch(self):
        eve = EveStrategy(delay=0.25, channel_length=0.5)
        transcript = run_session(make_config(eve=eve, seed=21,
                                             disclose_fraction=0.25))
        # No-fire rounds resend a coin flip: mismatch rate (1 - f)/2 = 0.125.
        assert transcript.p_err_estimate > 0.05
        assert any(r.eve_outcome is not None for r in transcript.rounds)

    def test_no_resend_exhausts(self):
        eve = EveStrategy(delay=0.0, channel_length=0.5,
                          resend_policy=ResendPolicy.NO_RESEND)
        with pytest.raises(ResourceExhaustedError):
            run_session(make_config(eve=eve))

    def test_strategy_geometry_mismatch_rejected(self):
        eve = EveStrategy(delay=0.0, channel_length=0.3)
        with pytest.raises(InvalidParameterError):
            make_config(eve=eve, channel_length=0.5)

    def test_even_block_size_rejected(self):
        with pytest.raises(InvalidParameterError):
            make_config(block_size=4)


class TestTranscript:
    def test_text_round_trip(self):
        transcript = run_session(make_config(flip_probability=0.01, seed=31))
        text = transcript.to_text()
        assert text.startswith("relqkd-transcript/1\n")
        parsed = Transcript.from_text(text)
        assert parsed.to_text() == text

    def test_replay_reproduces_keys(self):
        for seed in (1, 7, 13):
            transcript = run_session(make_config(seed=seed))
            key_a, key_b = replay_keys(transcript)
            assert (key_a == transcript.key_a).all()
            assert (key_b == transcript.key_b).all()

    def test_replay_on_noisy_session(self):
        transcript = run_session(make_config(
            key_length=8, hash_rounds=4, flip_probability=0.03, seed=200))
        key_a, key_b = replay_keys(transcript)
        if transcript.aborted:
            assert key_a is None and key_b is None
        else:
            assert (key_a == transcript.key_a).all()
            assert (key_b == transcript.key_b).all()

    def test_rejects_foreign_text(self):
        with pytest.raises(InvalidParameterError):
            Transcript.from_text("not-a-transcript\n")
