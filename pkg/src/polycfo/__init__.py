"""Blind multi-user frequency-offset estimation and symbol recovery.

Oversampling a multiuser baseband signal turns it into a virtual MIMO
mixture; blind separation, a phase-slope frequency fit, and a
decision-feedback loop then recover each user's symbols without pilots.
"""

from .baseline import PilotSet, generate_pilots, match_streams_to_pilots, pilot_cfo_estimate
from .bss import (
    CumulantSet,
    SeparationResult,
    Whitening,
    cumulant_matrices,
    estimate_mixing,
    joint_diagonalize,
    ls_equalize,
    whiten,
)
from .cfo import CfoEstimates, PhaseMatrix, derotate, fit_cfo, phase_matrix
from .errors import (
    DegenerateMixtureError,
    InvalidConfigurationError,
    NoPeakError,
    PilotGenerationError,
    SimulatorError,
    SingularEqualizerError,
    UnfittableColumnError,
    UnsupportedScaleError,
)
from .pll import PllConfig, PllTrace, ReceiverResult, pll_track, run_receiver
from .scoring import Alignment, ber, isr_db, mse_cfo, resolve_ambiguity
from .sigmodel import (
    NOISELESS,
    ChannelRealization,
    Constellation,
    PolyphaseObservations,
    SymbolFrame,
    VirtualChannel,
    bpsk,
    build_virtual_channel,
    constellation_by_name,
    draw_random_channel,
    generate_symbols,
    mpsk,
    pulse,
    qam4,
    rotate_symbols,
    synthesize_observations,
)

__version__ = "0.1.0"
