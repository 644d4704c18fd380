"""relqkd: relativistic quantum key distribution simulator and analyzer.

A causality-constrained one-dimensional QKD model: spatially extended
orthogonal photon envelopes, the eavesdropper's delay-versus-detection
tradeoff, the classical key-distillation pipeline, and the closed-form
security bounds -- with seeded Monte Carlo validation of all of it.
"""

from .adversary import (
    EveStrategy,
    KrausSet,
    ResendPolicy,
    apply_resend,
    bob_pass_bound,
    eve_correct_probability,
    instrument_contraction_check,
    joint_success,
    optimal_delay,
    random_kraus_set,
)
from .distill import (
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
from .errors import (
    CausalityViolationError,
    InvalidParameterError,
    RejectedInstrumentError,
    RelqkdError,
    ResourceExhaustedError,
)
from .harness import (
    CampaignSpec,
    cmd_analyze,
    cmd_distill,
    cmd_simulate,
    cmd_verify,
    load_campaign,
    simulate_intercept_resend,
)
from .infotheory import (
    ClassicalChannel,
    eve_channel,
    eve_information_decomposition,
    hartley_parity_info,
    holevo_quantity,
    mutual_information,
)
from .measurement import (
    BobOutcome,
    EveOutcome,
    PhotonState,
    bob_outcome_distribution,
    eve_guess_statistics,
    eve_outcome_distribution,
    sample_bob,
    sample_eve,
)
from .security import (
    SecurityReport,
    build_report,
    eve_key_probability,
    information_bounds,
    parity_count,
    solve_parameters,
    zeta,
)
from .wavepacket import (
    AmplitudeProfile,
    Interval,
    make_plateau,
    mass_in_interval,
    overlap,
)

__version__ = "0.1.0"
