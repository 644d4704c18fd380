"""Key-level security bounds and the inverse parameter solver.

Everything here is closed-form arithmetic on the protocol parameters: the
combinatorial identity counting the raw strings compatible with one parity
bit, the eavesdropper's key-guessing probability, the three mutual
informations of the final keys, and the search that inverts the security
criterion into concrete (k, n, M).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .errors import InvalidParameterError

LN2 = math.log(2.0)

REPORT_SCHEMA = "relqkd-report/1"


class ParityCount(NamedTuple):
    exact: int        # big-integer binomial sum
    cosine: float     # trigonometric closed form, float


def parity_count(n: int, k: int) -> ParityCount:
    """Number of ways one parity bit can be assembled from block-wise bits.

    Both sides of the counting identity are returned: the exact binomial
    sum (1/2) * sum_i C(n*k, i*k) and the cosine closed form
    (2^{nk}/2k) * sum_{l=1..k} cos^{nk}(l*pi/k) * cos(n*l*pi).  They agree
    exactly; the cosine side is exposed for numerical cross-checking and
    is reliable while 2^{nk} stays within float range.
    """
    if n < 1 or k < 1:
        raise InvalidParameterError(f"need n, k >= 1, got n={n}, k={k}")
    total = n * k
    exact = sum(math.comb(total, i * k) for i in range(n + 1)) // 2
    acc = 0.0
    for l in range(1, k + 1):
        c = math.cos(l * math.pi / k)
        sign = -1.0 if (n * l) % 2 else 1.0
        acc += (c ** total) * sign
    cosine = (2.0 ** total) / (2.0 * k) * acc
    return ParityCount(exact, cosine)


def _log2_int(v: int) -> float:
    """log2 of a positive integer of any size."""
    if v <= 0:
        raise InvalidParameterError("log2 argument must be positive")
    if v.bit_length() <= 900:
        return math.log2(v)
    shift = v.bit_length() - 64
    return math.log2(v >> shift) + shift


def zeta(n: int, k: int, ratio: float, eta: float) -> float:
    """Per-parity-bit advantage factor [(1 + ratio)/2]^(eta * n * k)."""
    if not (0.0 <= ratio < 1.0):
        raise InvalidParameterError(f"channel ratio must lie in [0, 1), got {ratio}")
    if not (0.0 < eta <= 1.0):
        raise InvalidParameterError(f"eta must lie in (0, 1], got {eta}")
    if n < 1 or k < 1:
        raise InvalidParameterError(f"need n, k >= 1, got n={n}, k={k}")
    return (0.5 * (1.0 + ratio)) ** (eta * n * k)


class EveKeyBound(NamedTuple):
    value: float
    valid: bool   # False when the bound exceeds 1 and is vacuous


def eve_key_probability(n_key: int, zeta_value: float) -> EveKeyBound:
    """Bound 2^-N (1 + 2*zeta)^N on the eavesdropper guessing the full key."""
    if n_key < 1:
        raise InvalidParameterError(f"key length must be >= 1, got {n_key}")
    if zeta_value < 0.0:
        raise InvalidParameterError(f"zeta must be >= 0, got {zeta_value}")
    log_value = n_key * (math.log1p(2.0 * zeta_value) - LN2)
    value = math.exp(log_value)
    return EveKeyBound(value, value <= 1.0 + 1e-12)


class InformationBounds(NamedTuple):
    i_ab: float
    i_ae: float
    i_be: float


def information_bounds(n_key: int, hash_rounds: int, zeta_value: float) -> InformationBounds:
    """Mutual-information bounds (bits) between the three parties' keys.

    I(A;B) = N + log2(1 - 2^-M); I(A;E) = N log2(1 + 2 zeta); the bound on
    I(B;E) combines the two through the information triangle inequality.
    The conservative + sign is used in the I(B;E) combination so the bound
    can never go negative.
    """
    if n_key < 1 or hash_rounds < 1:
        raise InvalidParameterError("key length and hash rounds must be >= 1")
    if zeta_value < 0.0:
        raise InvalidParameterError(f"zeta must be >= 0, got {zeta_value}")
    p_miss = 2.0 ** (-hash_rounds)
    i_ab = n_key + math.log1p(-p_miss) / LN2
    i_ae = n_key * math.log1p(2.0 * zeta_value) / LN2
    i_be = (2.0 * n_key * zeta_value + p_miss) / LN2
    return InformationBounds(i_ab, i_ae, i_be)


@dataclass(frozen=True)
class SecurityReport:
    """Flat summary of one parameter set against the security criterion."""

    n_key: int
    blocks_per_parity: int
    block_size: int
    hash_rounds: int
    ratio: float
    eta: float
    zeta: float
    pr_eve_key: float
    pr_eve_key_valid: bool
    i_ab: float
    i_ae: float
    i_be: float
    pr_key_mismatch: float
    eps1: float
    eps2: float
    identical_ok: bool
    eve_prob_ok: bool
    i_ae_ok: bool
    i_be_ok: bool
    p_err_estimate: float | None = None
    aborted: bool | None = None

    @property
    def all_ok(self) -> bool:
        return self.identical_ok and self.eve_prob_ok and self.i_ae_ok and self.i_be_ok

    def to_text(self) -> str:
        lines = [REPORT_SCHEMA]
        fields = [
            ("n_key", self.n_key),
            ("blocks_per_parity", self.blocks_per_parity),
            ("block_size", self.block_size),
            ("hash_rounds", self.hash_rounds),
            ("ratio", self.ratio),
            ("eta", self.eta),
            ("zeta", self.zeta),
            ("pr_eve_key", self.pr_eve_key),
            ("pr_eve_key_valid", self.pr_eve_key_valid),
            ("i_ab", self.i_ab),
            ("i_ae", self.i_ae),
            ("i_be", self.i_be),
            ("pr_key_mismatch", self.pr_key_mismatch),
            ("eps1", self.eps1),
            ("eps2", self.eps2),
            ("identical_ok", self.identical_ok),
            ("eve_prob_ok", self.eve_prob_ok),
            ("i_ae_ok", self.i_ae_ok),
            ("i_be_ok", self.i_be_ok),
            ("all_ok", self.all_ok),
        ]
        if self.p_err_estimate is not None:
            fields.append(("p_err_estimate", self.p_err_estimate))
        if self.aborted is not None:
            fields.append(("aborted", self.aborted))
        for key, value in fields:
            lines.append(f"{key}={_render(value)}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "SecurityReport":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or lines[0] != REPORT_SCHEMA:
            raise InvalidParameterError("not a relqkd-report/1 block")
        kv = {}
        for ln in lines[1:]:
            key, _, value = ln.partition("=")
            kv[key] = value
        def fget(key):
            return float(kv[key])
        def bget(key):
            return kv[key] == "true"
        return cls(
            n_key=int(kv["n_key"]),
            blocks_per_parity=int(kv["blocks_per_parity"]),
            block_size=int(kv["block_size"]),
            hash_rounds=int(kv["hash_rounds"]),
            ratio=fget("ratio"), eta=fget("eta"), zeta=fget("zeta"),
            pr_eve_key=fget("pr_eve_key"), pr_eve_key_valid=bget("pr_eve_key_valid"),
            i_ab=fget("i_ab"), i_ae=fget("i_ae"), i_be=fget("i_be"),
            pr_key_mismatch=fget("pr_key_mismatch"),
            eps1=fget("eps1"), eps2=fget("eps2"),
            identical_ok=bget("identical_ok"), eve_prob_ok=bget("eve_prob_ok"),
            i_ae_ok=bget("i_ae_ok"), i_be_ok=bget("i_be_ok"),
            p_err_estimate=fget("p_err_estimate") if "p_err_estimate" in kv else None,
            aborted=bget("aborted") if "aborted" in kv else None,
        )


def _render(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)


def exact_eta(n: int, k: int) -> float:
    """Hartley information of the parity set per raw bit, computed exactly."""
    return _log2_int(parity_count(n, k).exact) / (n * k)


def build_report(
    n_key: int,
    blocks_per_parity: int,
    block_size: int,
    hash_rounds: int,
    ratio: float,
    eps1: float,
    eps2: float,
    p_err_estimate: float | None = None,
    aborted: bool | None = None,
) -> SecurityReport:
    """Evaluate every security quantity for one concrete parameter set."""
    eta = exact_eta(blocks_per_parity, block_size)
    z = zeta(blocks_per_parity, block_size, ratio, eta)
    bound = eve_key_probability(n_key, z)
    info = information_bounds(n_key, hash_rounds, z)
    p_miss = 2.0 ** (-hash_rounds)
    return SecurityReport(
        n_key=n_key,
        blocks_per_parity=blocks_per_parity,
        block_size=block_size,
        hash_rounds=hash_rounds,
        ratio=ratio,
        eta=eta,
        zeta=z,
        pr_eve_key=bound.value,
        pr_eve_key_valid=bound.valid,
        i_ab=info.i_ab,
        i_ae=info.i_ae,
        i_be=info.i_be,
        pr_key_mismatch=p_miss,
        eps1=eps1,
        eps2=eps2,
        identical_ok=p_miss <= eps1,
        eve_prob_ok=bound.value <= 2.0 ** (-n_key) + eps2,
        i_ae_ok=info.i_ae <= eps2,
        i_be_ok=info.i_be <= eps2,
        p_err_estimate=p_err_estimate,
        aborted=aborted,
    )


class SolvedParameters(NamedTuple):
    block_size: int        # k, odd
    blocks_per_parity: int  # n
    hash_rounds: int       # M


def solve_parameters(
    eps1: float,
    eps2: float,
    n_key: int,
    ratio: float,
    max_total: int = 1_000_000,
) -> tuple[SolvedParameters, SecurityReport]:
    """Smallest (k, n, M) satisfying the two-part security criterion.

    M is the smallest hash-round count compatible with both criteria: the
    2^-M key-mismatch probability must undercut eps1, and its contribution
    to the I(B;E) bound must leave room under eps2 (half of eps2*ln2 is
    reserved for it, so a solution in (n, k) always exists for ratio < 1).
    The (n, k) search minimizes n*k and then k, with k restricted to odd
    values and eta evaluated exactly for each candidate.
    """
    if not (0.0 < eps1 < 1.0 and 0.0 < eps2 < 1.0):
        raise InvalidParameterError("eps1 and eps2 must lie in (0, 1)")
    if n_key < 1:
        raise InvalidParameterError(f"key length must be >= 1, got {n_key}")
    if not (0.0 <= ratio < 1.0):
        raise InvalidParameterError(
            f"channel ratio must lie in [0, 1) for a solution to exist, got {ratio}"
        )

    m1 = math.ceil(-math.log2(eps1))
    m2 = math.ceil(math.log2(2.0 / (eps2 * LN2)))
    hash_rounds = max(1, m1, m2)

    for total in range(1, max_total + 1):
        for k in range(1, total + 1, 2):
            if total % k:
                continue
            n = total // k
            if exact_eta(n, k) <= 0.0:
                # A single-block parity group has a one-element parity set.
                continue
            report = build_report(n_key, n, k, hash_rounds, ratio, eps1, eps2)
            if report.all_ok:
                return SolvedParameters(k, n, hash_rounds), report
    raise InvalidParameterError(
        f"no (n, k) with n*k <= {max_total} satisfies the criterion"
    )
