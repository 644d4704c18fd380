"""Eavesdropper strategy space: the delay tradeoff and the noise instrument.

Delaying the carrier by chi enlarges the fraction of the state the
eavesdropper can measure, at the price of shrinking the region her resent
substitute can causally occupy by the receiver's measurement time.  The
closed forms below quantify both sides and their product; the Kraus-set
machinery checks numerically that no admissible noise instrument can lift
the mass she finds in her domain above the ideal-channel value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import InvalidParameterError, RejectedInstrumentError
from .measurement import PhotonState
from .wavepacket import AmplitudeProfile, Interval

_TOL = 1e-9


class ResendPolicy(Enum):
    TRUNCATED_RENORMALIZED = "truncated"
    SHIFTED_COPY = "shifted"
    NO_RESEND = "none"


@dataclass(frozen=True)
class EveStrategy:
    """Delay, controlled channel length, and what gets forwarded."""

    delay: float
    channel_length: float
    resend_policy: ResendPolicy = ResendPolicy.TRUNCATED_RENORMALIZED

    def __post_init__(self):
        if self.delay < 0.0:
            raise InvalidParameterError(f"delay must be >= 0, got {self.delay}")
        if self.channel_length < 0.0:
            raise InvalidParameterError(
                f"channel length must be >= 0, got {self.channel_length}"
            )

    def accessible_region(self, channel_start: float = 0.0) -> Interval:
        """Interval of length channel_length + delay opened up by waiting."""
        return Interval(channel_start,
                        channel_start + self.channel_length + self.delay)


def _check_geometry(chi: float, channel_length: float, extent: float):
    if extent <= 0.0:
        raise InvalidParameterError(f"state extent must be positive, got {extent}")
    if not (0.0 <= channel_length <= extent):
        raise InvalidParameterError(
            f"channel length must lie in [0, L], got {channel_length} with L={extent}"
        )
    if not (0.0 <= chi <= extent - channel_length + _TOL):
        raise InvalidParameterError(
            f"delay must lie in [0, L - L_ch], got chi={chi}"
        )


def eve_correct_probability(chi: float, channel_length: float, extent: float) -> float:
    """Probability (1 + (L_ch + chi)/L)/2 of identifying the sent bit."""
    _check_geometry(chi, channel_length, extent)
    return 0.5 * (1.0 + (channel_length + chi) / extent)


def bob_pass_bound(chi: float, extent: float) -> float:
    """Supremum 1 - chi/L of the receiver-test pass probability at delay chi."""
    if extent <= 0.0:
        raise InvalidParameterError(f"state extent must be positive, got {extent}")
    if not (0.0 <= chi <= extent + _TOL):
        raise InvalidParameterError(f"delay must lie in [0, L], got {chi}")
    return 1.0 - min(chi, extent) / extent


def joint_success(chi: float, channel_length: float, extent: float) -> float:
    """Probability of knowing the bit and passing the delay test at once."""
    return eve_correct_probability(chi, channel_length, extent) * bob_pass_bound(chi, extent)


def optimal_delay(
    channel_length: float, extent: float, grid_points: int = 1024
) -> tuple[float, float]:
    """Best delay and its joint-success value, confirmed by a grid scan.

    The joint success is strictly decreasing in the delay, so the optimum
    sits at chi = 0 with value (1 + L_ch/L)/2; the scan over
    ``grid_points`` delays asserts no grid value exceeds it.
    """
    if not (0.0 <= channel_length < extent):
        raise InvalidParameterError(
            f"need 0 <= L_ch < L, got L_ch={channel_length}, L={extent}"
        )
    if grid_points < 2:
        raise InvalidParameterError("grid needs at least 2 points")
    pr_max = 0.5 * (1.0 + channel_length / extent)
    chis = np.linspace(0.0, extent - channel_length, grid_points)
    values = np.array([joint_success(c, channel_length, extent) for c in chis])
    if int(np.argmax(values)) != 0 or values.max() > pr_max + _TOL:
        raise InvalidParameterError(
            "grid scan contradicts the boundary optimum; geometry arguments invalid"
        )
    return 0.0, pr_max


def apply_resend(
    strategy: EveStrategy, honest_profile: AmplitudeProfile, bit: int,
    emission_time: float = 0.0,
) -> PhotonState | None:
    """Substitute carrier forwarded after the intercept, or None.

    The truncated policy re-emits the honest envelope clipped to the part
    of its support that a chi-delayed state can still causally occupy, and
    renormalizes; the shifted policy forwards an intact but lagging copy.
    """
    chi = strategy.delay
    if strategy.resend_policy is ResendPolicy.NO_RESEND:
        return None
    if strategy.resend_policy is ResendPolicy.SHIFTED_COPY or chi == 0.0:
        return PhotonState(bit=bit, profile=honest_profile,
                           emission_time=emission_time, delay=chi,
                           substituted=True)
    support = honest_profile.support
    if chi >= support.length:
        raise InvalidParameterError("delay exceeds the state extent; nothing to resend")
    reachable = Interval(support.lo + chi, support.hi)
    resent = honest_profile.restrict(reachable).normalized()
    return PhotonState(bit=bit, profile=resent, emission_time=emission_time,
                       delay=chi, substituted=True)


@dataclass(frozen=True)
class KrausSet:
    """Rank-one noise instrument on a finite-dimensional truncation.

    Operators S_k = sqrt(lam_k) |out_k><in_k| with unit vectors; the
    instrument acts as T[rho] = sum_k lam_k S_k rho S_k^+.  Admissibility
    (the trace-non-increasing condition) requires
    sum_k lam_k S_k^+ S_k <= identity, which is what makes the domain
    contraction bound a theorem.
    """

    weights: np.ndarray         # lam_k >= 0
    outputs: np.ndarray         # rows: unit vectors |out_k>
    inputs: np.ndarray          # rows: unit vectors |in_k>

    def __post_init__(self):
        lam = np.asarray(self.weights, dtype=float)
        outs = np.asarray(self.outputs, dtype=complex)
        ins = np.asarray(self.inputs, dtype=complex)
        if lam.ndim != 1 or outs.ndim != 2 or ins.ndim != 2:
            raise InvalidParameterError("Kraus set arrays have wrong ranks")
        if not (lam.size == outs.shape[0] == ins.shape[0]):
            raise InvalidParameterError("Kraus set lengths disagree")
        if outs.shape[1] != ins.shape[1]:
            raise InvalidParameterError("input/output dimensions disagree")
        if np.any(lam < 0.0):
            raise InvalidParameterError("weights must be non-negative")
        for name, rows in (("output", outs), ("input", ins)):
            norms = np.linalg.norm(rows, axis=1)
            if np.any(np.abs(norms - 1.0) > 1e-9):
                raise InvalidParameterError(f"{name} vectors must be unit norm")
        for arr in (lam, outs, ins):
            arr.setflags(write=False)
        object.__setattr__(self, "weights", lam)
        object.__setattr__(self, "outputs", outs)
        object.__setattr__(self, "inputs", ins)

    @property
    def dimension(self) -> int:
        return self.inputs.shape[1]

    def admissibility_matrix(self) -> np.ndarray:
        """sum_k lam_k S_k^+ S_k = sum_k lam_k^2 |in_k><in_k|."""
        scaled = self.weights[:, None] * self.inputs
        return scaled.conj().T @ scaled  # (d, d)

    def validate(self, tol: float = _TOL):
        m = self.admissibility_matrix()
        top = float(np.linalg.eigvalsh(m)[-1])
        if top > 1.0 + tol:
            raise RejectedInstrumentError(
                f"instrument is not trace-non-increasing: top eigenvalue {top:.6g}"
            )

    def domain_mass_after(self, psi: np.ndarray) -> float:
        """Tr{T[|psi><psi|]} restricted to the available-domain truncation."""
        amps = self.inputs.conj() @ np.asarray(psi, dtype=complex)
        return float(np.sum(self.weights ** 2 * np.abs(amps) ** 2))

    @classmethod
    def identity(cls, dimension: int) -> "KrausSet":
        """Complete dephasing set; leaves every domain mass unchanged."""
        eye = np.eye(dimension, dtype=complex)
        return cls(weights=np.ones(dimension), outputs=eye, inputs=eye)


def random_kraus_set(
    rng: np.random.Generator, dimension: int = 8, n_operators: int = 12,
    headroom: float | None = None,
) -> KrausSet:
    """Admissible random instrument: sphere-uniform vectors, scaled weights.

    ``headroom`` in (0, 1] sets the top eigenvalue of the admissibility
    matrix; by default it is drawn uniformly from [0.3, 1.0].
    """
    if dimension < 4:
        raise InvalidParameterError(f"need dimension >= 4, got {dimension}")
    def sphere(n):
        v = rng.normal(size=(n, dimension)) + 1j * rng.normal(size=(n, dimension))
        return v / np.linalg.norm(v, axis=1, keepdims=True)
    outs = sphere(n_operators)
    ins = sphere(n_operators)
    lam = rng.uniform(0.1, 1.0, size=n_operators)
    raw = KrausSet(weights=lam, outputs=outs, inputs=ins)
    top = float(np.linalg.eigvalsh(raw.admissibility_matrix())[-1])
    target = float(rng.uniform(0.3, 1.0)) if headroom is None else float(headroom)
    if not (0.0 < target <= 1.0):
        raise InvalidParameterError(f"headroom must lie in (0, 1], got {target}")
    lam = lam * math.sqrt(target / top)
    return KrausSet(weights=lam, outputs=outs, inputs=ins)


def scaled_invalid_kraus_set(rng: np.random.Generator, dimension: int = 8,
                             factor: float = 1.5) -> KrausSet:
    """Negative control: deliberately inadmissible (top eigenvalue = factor)."""
    valid = random_kraus_set(rng, dimension=dimension, headroom=1.0)
    return KrausSet(weights=valid.weights * math.sqrt(factor),
                    outputs=valid.outputs, inputs=valid.inputs)


def instrument_contraction_check(
    kraus: KrausSet, f: float,
    psi: np.ndarray | None = None,
    rng: np.random.Generator | None = None,
    tol: float = _TOL,
) -> tuple[bool, float]:
    """Verify that noise cannot raise the mass found in the available domain.

    The truncation models the eavesdropper's available region, so the state
    enters with norm-squared ``f``.  Returns (bound_holds, lhs) where lhs is
    the post-instrument domain mass; an inadmissible set raises
    RejectedInstrumentError.
    """
    if not (0.0 <= f <= 1.0):
        raise InvalidParameterError(f"available fraction must lie in [0, 1], got {f}")
    kraus.validate(tol)
    if psi is None:
        if rng is None:
            raise InvalidParameterError("provide either psi or rng")
        psi = rng.normal(size=kraus.dimension) + 1j * rng.normal(size=kraus.dimension)
    psi = np.asarray(psi, dtype=complex)
    norm = np.linalg.norm(psi)
    if norm == 0.0:
        raise InvalidParameterError("state vector must be non-zero")
    psi = psi / norm * math.sqrt(f)
    lhs = kraus.domain_mass_after(psi)
    return lhs <= f + tol, lhs
