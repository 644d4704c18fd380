"""Session engine: transmission, sifting, block coding, parities, hashing.

One session plays the five protocol stages end to end: seeded per-round
transmission with optional intercept-resend interference, sifting on the
receiver's conclusive outcomes, disclosure-based error estimation, majority
blocks announced after reception, parity-bit formation over disjoint block
groups, and the round-by-round hash comparison that whittles N + M parity
bits down to the final N-bit keys.  Everything is driven by one master seed
and the resulting transcript is byte-reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .adversary import EveStrategy, ResendPolicy, apply_resend
from .errors import InvalidParameterError, ResourceExhaustedError
from .measurement import (
    BobOutcome,
    EveOutcome,
    PhotonState,
    bob_outcome_distribution,
    eve_outcome_distribution,
)
from .wavepacket import Interval, make_plateau

TRANSCRIPT_SCHEMA = "relqkd-transcript/1"


@dataclass(frozen=True)
class ProtocolConfig:
    """All knobs of one key-distillation session."""

    key_length: int            # N, final key bits
    block_size: int            # k, odd
    blocks_per_parity: int     # n
    hash_rounds: int           # M
    disclose_fraction: float   # fraction of sifted rounds spent on noise estimation
    state_extent: float        # L
    channel_length: float      # L_ch < L
    seed: int
    flip_probability: float = 0.0
    loss_probability: float = 0.0
    eve: EveStrategy | None = None
    tail_mass: float = 0.0
    ramp_fraction: float = 0.0
    resolution: float | None = None

    def __post_init__(self):
        if self.key_length < 1:
            raise InvalidParameterError(f"key length must be >= 1, got {self.key_length}")
        if self.block_size < 1 or self.block_size % 2 == 0:
            raise InvalidParameterError(
                f"block size must be odd and >= 1, got {self.block_size}"
            )
        if self.blocks_per_parity < 1:
            raise InvalidParameterError(
                f"blocks per parity must be >= 1, got {self.blocks_per_parity}"
            )
        if self.hash_rounds < 1:
            raise InvalidParameterError(f"hash rounds must be >= 1, got {self.hash_rounds}")
        if not (0.0 < self.disclose_fraction < 1.0):
            raise InvalidParameterError(
                f"disclose fraction must lie in (0, 1), got {self.disclose_fraction}"
            )
        if self.state_extent <= 0.0:
            raise InvalidParameterError(
                f"state extent must be positive, got {self.state_extent}"
            )
        if not (0.0 <= self.channel_length < self.state_extent):
            raise InvalidParameterError(
                f"need 0 <= L_ch < L, got L_ch={self.channel_length}, L={self.state_extent}"
            )
        if not (0.0 <= self.flip_probability <= 1.0):
            raise InvalidParameterError("flip probability must lie in [0, 1]")
        if not (0.0 <= self.loss_probability < 1.0):
            raise InvalidParameterError("loss probability must lie in [0, 1)")
        if self.eve is not None and not math.isclose(
            self.eve.channel_length, self.channel_length, abs_tol=1e-12
        ):
            raise InvalidParameterError(
                "eavesdropper strategy and geometry disagree on the channel length"
            )


@dataclass(frozen=True)
class RoundRecord:
    index: int
    a_bit: int
    b_outcome: BobOutcome
    eve_outcome: EveOutcome | None
    sifted: bool
    disclosed: bool
    block: int | None
    parity_group: int | None


@dataclass(frozen=True)
class HashRecord:
    round_index: int       # l = 1..M
    subset: str            # char i is the subset bit at string position i
    parity_a: int
    parity_b: int
    discarded: int | None  # position removed on match; None on the aborting round


@dataclass(frozen=True)
class Transcript:
    rounds: tuple[RoundRecord, ...]
    hash_log: tuple[HashRecord, ...]
    p_err_estimate: float
    key_a: np.ndarray | None
    key_b: np.ndarray | None
    aborted: bool
    abort_reason: str | None

    def to_text(self) -> str:
        lines = [TRANSCRIPT_SCHEMA, f"rounds\t{len(self.rounds)}",
                 "round\ta_bit\tb_outcome\teve_outcome\tsifted\tdisclosed\tblock\tparity_group"]
        for r in self.rounds:
            eve = r.eve_outcome.value if r.eve_outcome is not None else "-"
            block = str(r.block) if r.block is not None else "-"
            group = str(r.parity_group) if r.parity_group is not None else "-"
            lines.append(
                f"{r.index}\t{r.a_bit}\t{r.b_outcome.value}\t{eve}\t"
                f"{int(r.sifted)}\t{int(r.disclosed)}\t{block}\t{group}"
            )
        lines.append(f"hash_log\t{len(self.hash_log)}")
        lines.append("l\tsubset\tparity_a\tparity_b\tdiscarded")
        for h in self.hash_log:
            disc = str(h.discarded) if h.discarded is not None else "-"
            lines.append(f"{h.round_index}\t{h.subset}\t{h.parity_a}\t{h.parity_b}\t{disc}")
        lines.append(f"p_err\t{format(self.p_err_estimate, '.12g')}")
        lines.append(f"key_a\t{_bits_text(self.key_a)}")
        lines.append(f"key_b\t{_bits_text(self.key_b)}")
        lines.append(f"aborted\t{int(self.aborted)}")
        lines.append(f"abort_reason\t{self.abort_reason if self.abort_reason else '-'}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Transcript":
        lines = text.splitlines()
        if not lines or lines[0] != TRANSCRIPT_SCHEMA:
            raise InvalidParameterError("not a relqkd-transcript/1 file")
        pos = 1
        tag, count = lines[pos].split("\t")
        if tag != "rounds":
            raise InvalidParameterError("missing rounds section")
        n_rounds = int(count)
        pos += 2  # skip column header
        rounds = []
        for i in range(n_rounds):
            parts = lines[pos + i].split("\t")
            rounds.append(RoundRecord(
                index=int(parts[0]),
                a_bit=int(parts[1]),
                b_outcome=BobOutcome(parts[2]),
                eve_outcome=EveOutcome(parts[3]) if parts[3] != "-" else None,
                sifted=parts[4] == "1",
                disclosed=parts[5] == "1",
                block=int(parts[6]) if parts[6] != "-" else None,
                parity_group=int(parts[7]) if parts[7] != "-" else None,
            ))
        pos += n_rounds
        tag, count = lines[pos].split("\t")
        if tag != "hash_log":
            raise InvalidParameterError("missing hash_log section")
        n_hash = int(count)
        pos += 2
        hash_log = []
        for i in range(n_hash):
            parts = lines[pos + i].split("\t")
            hash_log.append(HashRecord(
                round_index=int(parts[0]), subset=parts[1],
                parity_a=int(parts[2]), parity_b=int(parts[3]),
                discarded=int(parts[4]) if parts[4] != "-" else None,
            ))
        pos += n_hash
        tail = dict(ln.split("\t", 1) for ln in lines[pos:] if ln)
        return cls(
            rounds=tuple(rounds),
            hash_log=tuple(hash_log),
            p_err_estimate=float(tail["p_err"]),
            key_a=_bits_parse(tail["key_a"]),
            key_b=_bits_parse(tail["key_b"]),
            aborted=tail["aborted"] == "1",
            abort_reason=None if tail["abort_reason"] == "-" else tail["abort_reason"],
        )


def _bits_text(bits) -> str:
    if bits is None:
        return "-"
    return "".join("1" if int(b) else "0" for b in bits)


def _bits_parse(text: str):
    if text == "-":
        return None
    return np.array([1 if c == "1" else 0 for c in text], dtype=np.uint8)


def sift(outcomes) -> np.ndarray:
    """Indices of the rounds with a conclusive receiver outcome."""
    return np.array(
        [i for i, o in enumerate(outcomes) if o is not BobOutcome.INCONCLUSIVE],
        dtype=np.int64,
    )


def estimate_error(a_bits, b_bits, disclose_fraction: float,
                   rng: np.random.Generator) -> tuple[float, np.ndarray]:
    """Disclose a random fraction of positions and return the mismatch rate.

    Returns (p_err, disclosed_positions); the disclosed positions must be
    discarded from key material by the caller.
    """
    a_arr = np.asarray(a_bits)
    b_arr = np.asarray(b_bits)
    if a_arr.shape != b_arr.shape or a_arr.ndim != 1 or a_arr.size == 0:
        raise InvalidParameterError("need two equal-length non-empty bit sequences")
    if not (0.0 < disclose_fraction < 1.0):
        raise InvalidParameterError(
            f"disclose fraction must lie in (0, 1), got {disclose_fraction}"
        )
    count = int(round(disclose_fraction * a_arr.size))
    if count < 1:
        raise InvalidParameterError(
            f"disclosing {disclose_fraction} of {a_arr.size} rounds discloses nothing"
        )
    positions = np.sort(rng.choice(a_arr.size, size=count, replace=False))
    p_err = float(np.mean(a_arr[positions] != b_arr[positions]))
    return p_err, positions


def majority_decode(block) -> int:
    """Majority vote over an odd-size block of bits."""
    bits = np.asarray(block)
    if bits.size < 1 or bits.size % 2 == 0:
        raise InvalidParameterError(
            f"majority voting needs an odd block size, got {bits.size}"
        )
    return int(bits.sum() * 2 > bits.size)


def form_parity_bits(blockwise_bits, groups) -> np.ndarray:
    """XOR the block-wise bits of each disjoint group into one parity bit."""
    bits = np.asarray(blockwise_bits)
    seen: set[int] = set()
    size = None
    parities = np.empty(len(groups), dtype=np.uint8)
    for j, group in enumerate(groups):
        idx = list(group)
        if not idx:
            raise InvalidParameterError("parity groups must be non-empty")
        if size is None:
            size = len(idx)
        elif len(idx) != size:
            raise InvalidParameterError("parity groups must all have the same size")
        if max(idx) >= bits.size:
            raise ResourceExhaustedError(
                f"parity group {j} references block {max(idx)} "
                f"but only {bits.size} blocks exist"
            )
        if seen.intersection(idx):
            raise InvalidParameterError("parity groups must be disjoint")
        seen.update(idx)
        parities[j] = int(np.bitwise_xor.reduce(bits[idx]) & 1)
    return parities


def _bits_to_int(bits) -> int:
    v = 0
    for i, b in enumerate(bits):
        if int(b):
            v |= 1 << i
    return v


def _int_to_bit_text(v: int, length: int) -> str:
    return "".join("1" if (v >> i) & 1 else "0" for i in range(length))


def _drop_bit(v: int, pos: int) -> int:
    return ((v >> (pos + 1)) << pos) | (v & ((1 << pos) - 1))


def _random_nonzero(rng: np.random.Generator, length: int) -> int:
    # All-zero subsets reveal nothing and would break the 2^-M analysis.
    if length <= 62:
        return int(rng.integers(1, 1 << length))
    mask = (1 << length) - 1
    while True:
        v = int.from_bytes(rng.bytes((length + 7) // 8), "little") & mask
        if v:
            return v


@dataclass(frozen=True)
class HashResult:
    key_a: np.ndarray | None
    key_b: np.ndarray | None
    aborted: bool
    log: tuple[HashRecord, ...]


def hash_rounds(bits_a, bits_b, rounds: int,
                rng: np.random.Generator) -> HashResult:
    """Run the round-by-round parity-hash comparison.

    Each round draws a uniform non-zero subset of the current string,
    compares the subset parities, aborts on mismatch, and otherwise
    discards the bit at the lowest-index position selected by the subset.
    After ``rounds`` successful rounds both strings have shrunk by exactly
    ``rounds`` bits; an undetected residual mismatch survives with
    probability 2^-rounds.
    """
    a_list = [int(b) for b in bits_a]
    b_list = [int(b) for b in bits_b]
    if len(a_list) != len(b_list):
        raise InvalidParameterError("hash inputs must have equal length")
    if rounds < 1:
        raise InvalidParameterError(f"need at least one hash round, got {rounds}")
    if len(a_list) <= rounds:
        raise InvalidParameterError(
            f"{len(a_list)} parity bits cannot survive {rounds} hash rounds"
        )
    ia = _bits_to_int(a_list)
    ib = _bits_to_int(b_list)
    length = len(a_list)
    log: list[HashRecord] = []
    for l in range(1, rounds + 1):
        s = _random_nonzero(rng, length)
        pa = (ia & s).bit_count() & 1
        pb = (ib & s).bit_count() & 1
        if pa != pb:
            log.append(HashRecord(l, _int_to_bit_text(s, length), pa, pb, None))
            return HashResult(None, None, True, tuple(log))
        pos = (s & -s).bit_length() - 1
        log.append(HashRecord(l, _int_to_bit_text(s, length), pa, pb, pos))
        ia = _drop_bit(ia, pos)
        ib = _drop_bit(ib, pos)
        length -= 1
    key_a = np.array([(ia >> i) & 1 for i in range(length)], dtype=np.uint8)
    key_b = np.array([(ib >> i) & 1 for i in range(length)], dtype=np.uint8)
    return HashResult(key_a, key_b, False, tuple(log))


class _ShortOfBlocks(Exception):
    pass


def run_session(cfg: ProtocolConfig) -> Transcript:
    """Play one full session and return its transcript.

    The engine plans enough rounds to supply (N + M) * n blocks of k bits
    after sifting and disclosure (20% margin), retries once with a doubled
    margin, and raises ResourceExhaustedError if still short.  A hash
    parity mismatch is not an error: the abort is recorded in the
    transcript.
    """
    base = make_plateau(cfg.state_extent, cfg.tail_mass, cfg.ramp_fraction,
                        cfg.resolution).shifted(-cfg.state_extent)
    support = base.support
    omega_b = Interval(cfg.channel_length, cfg.channel_length + support.length)
    t_b = cfg.channel_length - support.lo
    honest = PhotonState(bit=0, profile=base)
    p_pass_honest = 1.0 - bob_outcome_distribution(honest, t_b, omega_b)[
        BobOutcome.INCONCLUSIVE]

    f_eve = 0.0
    p_pass = p_pass_honest
    if cfg.eve is not None:
        omega_e = cfg.eve.accessible_region(0.0)
        t_e = omega_e.hi
        f_eve = eve_outcome_distribution(honest, omega_e, t_e)[EveOutcome.FIRED_ZERO]
        resend = apply_resend(cfg.eve, base, bit=0)
        if resend is None:
            p_pass = 0.0
        else:
            p_pass = 1.0 - bob_outcome_distribution(
                resend, t_b, omega_b, reference=base)[BobOutcome.INCONCLUSIVE]

    p_sift = p_pass * (1.0 - cfg.loss_probability)
    if p_sift <= 1e-12:
        raise ResourceExhaustedError(
            "no round can ever pass the receiver test under this configuration"
        )

    need_blocks = (cfg.key_length + cfg.hash_rounds) * cfg.blocks_per_parity
    need_bits = need_blocks * cfg.block_size + 2 * (cfg.block_size - 1) + 8
    per_round = p_sift * (1.0 - cfg.disclose_fraction)

    seed_seq = np.random.SeedSequence(cfg.seed)
    for margin in (1.2, 2.4):
        n_rounds = int(math.ceil(need_bits / per_round * margin))
        rngs = [np.random.default_rng(c) for c in seed_seq.spawn(6)]
        try:
            return _attempt(cfg, n_rounds, rngs, f_eve, p_pass, need_blocks)
        except _ShortOfBlocks:
            continue
    raise ResourceExhaustedError(
        f"insufficient sifted bits to form {need_blocks} blocks after retrying"
    )


def _attempt(cfg: ProtocolConfig, n_rounds: int, rngs, f_eve: float,
             p_pass: float, need_blocks: int) -> Transcript:
    rng_bits, rng_eve, rng_bob, rng_noise, rng_public, rng_hash = rngs
    k = cfg.block_size
    n_per_parity = cfg.blocks_per_parity
    n_parity = cfg.key_length + cfg.hash_rounds

    a_bits = rng_bits.integers(0, 2, size=n_rounds, dtype=np.int8)

    if cfg.eve is not None:
        fired = rng_eve.random(n_rounds) < f_eve
        guesses = rng_eve.integers(0, 2, size=n_rounds, dtype=np.int8)
        sent_on = np.where(fired, a_bits, guesses)
        resending = cfg.eve.resend_policy is not ResendPolicy.NO_RESEND
    else:
        fired = None
        sent_on = a_bits
        resending = True

    conclusive = (rng_bob.random(n_rounds) < p_pass) & resending
    outcome_bits = sent_on.copy()
    # Channel noise: loss first, then polarization flips on the survivors.
    lose = rng_noise.random(n_rounds) < cfg.loss_probability
    flip = rng_noise.random(n_rounds) < cfg.flip_probability
    conclusive &= ~lose
    outcome_bits = np.where(conclusive & flip, 1 - outcome_bits, outcome_bits)

    kept = np.flatnonzero(conclusive)
    if kept.size < 2:
        raise _ShortOfBlocks

    p_err, disclosed_local = estimate_error(
        a_bits[kept], outcome_bits[kept], cfg.disclose_fraction, rng_public)
    disclosed = kept[disclosed_local]
    disclosed_mask = np.zeros(n_rounds, dtype=bool)
    disclosed_mask[disclosed] = True

    remaining = kept[~disclosed_mask[kept]]

    # Antedate coding: blocks of k identical sent bits, grouped by A after
    # reception in transmission order, then publicly shuffled before the
    # disjoint parity groups are cut.
    blocks: list[np.ndarray] = []
    for value in (0, 1):
        ids = remaining[a_bits[remaining] == value]
        for start in range(0, ids.size - k + 1, k):
            blocks.append(ids[start:start + k])
    blocks.sort(key=lambda b: int(b[0]))
    if len(blocks) < need_blocks:
        raise _ShortOfBlocks
    order = rng_public.permutation(len(blocks))[:need_blocks]

    block_of_round = {}
    group_of_round = {}
    block_vals_a = np.empty(need_blocks, dtype=np.uint8)
    block_vals_b = np.empty(need_blocks, dtype=np.uint8)
    for block_id, src in enumerate(order):
        members = blocks[src]
        group = block_id // n_per_parity
        for r in members:
            block_of_round[int(r)] = block_id
            group_of_round[int(r)] = group
        block_vals_a[block_id] = a_bits[members[0]]
        block_vals_b[block_id] = majority_decode(outcome_bits[members])

    groups = [range(j * n_per_parity, (j + 1) * n_per_parity) for j in range(n_parity)]
    bit_a = form_parity_bits(block_vals_a, groups)
    bit_b = form_parity_bits(block_vals_b, groups)

    result = hash_rounds(bit_a, bit_b, cfg.hash_rounds, rng_hash)

    records = []
    for i in range(n_rounds):
        if conclusive[i]:
            b_out = BobOutcome.ZERO if outcome_bits[i] == 0 else BobOutcome.ONE
        else:
            b_out = BobOutcome.INCONCLUSIVE
        if fired is None:
            e_out = None
        elif fired[i]:
            e_out = EveOutcome.FIRED_ZERO if a_bits[i] == 0 else EveOutcome.FIRED_ONE
        else:
            e_out = EveOutcome.NO_FIRE
        records.append(RoundRecord(
            index=i,
            a_bit=int(a_bits[i]),
            b_outcome=b_out,
            eve_outcome=e_out,
            sifted=bool(conclusive[i]),
            disclosed=bool(disclosed_mask[i]),
            block=block_of_round.get(i),
            parity_group=group_of_round.get(i),
        ))

    abort_reason = None
    if result.aborted:
        abort_reason = f"hash parity mismatch at round {result.log[-1].round_index}"
    return Transcript(
        rounds=tuple(records),
        hash_log=result.log,
        p_err_estimate=p_err,
        key_a=result.key_a,
        key_b=result.key_b,
        aborted=result.aborted,
        abort_reason=abort_reason,
    )


def replay_keys(transcript: Transcript) -> tuple[np.ndarray | None, np.ndarray | None]:
    """Recompute both keys from the recorded public structure.

    Uses only the per-round data plus the announced block and parity
    grouping and the hash log; reproduces the session's keys exactly, or
    (None, None) if the recorded session aborted.
    """
    block_members: dict[int, list[RoundRecord]] = {}
    group_of_block: dict[int, int] = {}
    for r in transcript.rounds:
        if r.block is None:
            continue
        block_members.setdefault(r.block, []).append(r)
        group_of_block[r.block] = r.parity_group

    groups: dict[int, list[int]] = {}
    for block_id, group in group_of_block.items():
        groups.setdefault(group, []).append(block_id)

    n_groups = len(groups)
    bit_a = np.zeros(n_groups, dtype=np.uint8)
    bit_b = np.zeros(n_groups, dtype=np.uint8)
    for group in range(n_groups):
        for block_id in groups[group]:
            members = block_members[block_id]
            a_vals = {m.a_bit for m in members}
            if len(a_vals) != 1:
                raise InvalidParameterError(
                    f"block {block_id} mixes sent bits; transcript is inconsistent"
                )
            bit_a[group] ^= a_vals.pop()
            b_vals = [0 if m.b_outcome is BobOutcome.ZERO else 1 for m in members]
            bit_b[group] ^= majority_decode(b_vals)

    ia = _bits_to_int(bit_a)
    ib = _bits_to_int(bit_b)
    length = n_groups
    for h in transcript.hash_log:
        s = _bits_to_int(1 if c == "1" else 0 for c in h.subset)
        pa = (ia & s).bit_count() & 1
        pb = (ib & s).bit_count() & 1
        if pa != h.parity_a or pb != h.parity_b:
            raise InvalidParameterError(
                f"hash round {h.round_index} does not replay; transcript is inconsistent"
            )
        if h.discarded is None:
            return None, None
        ia = _drop_bit(ia, h.discarded)
        ib = _drop_bit(ib, h.discarded)
        length -= 1
    key_a = np.array([(ia >> i) & 1 for i in range(length)], dtype=np.uint8)
    key_b = np.array([(ib >> i) & 1 for i in range(length)], dtype=np.uint8)
    return key_a, key_b
