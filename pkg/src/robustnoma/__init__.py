"""Robust transmit beamforming for downlink MISO power-domain NOMA under
norm-bounded CSI uncertainty."""

from .model import (
    BeamformerSet,
    ChannelSet,
    ErrorSet,
    QosTargets,
    achievable_rate,
    canonicalize_order,
    compute_sinr,
    effective_sinr,
    qos_margins,
)
from .qt import RatioTerm, ScalingSet, qt_optimal_scalars, qt_value, transformed_sinr, update_t
from .sdp import SdpBlock, SdpProblem, SdpSolution, SdpStatus, embed_hermitian, hermitian_eig, solve_sdp
from .sdr import SdrResult, assemble_sdr, extract_rank_one, randomize, solve_power_min
from .solver import RobustSolution, SolverConfig, init_beamformers, run, solve_nonrobust
from .worstcase import (
    DualSolution,
    InnerQuadratic,
    assemble_quadratic,
    brute_force_worst_error,
    dual_value,
    recover_error,
    solve_dual,
)
from .campaign import CampaignConfig, CampaignResult, evaluate_realization, export_results, run_campaign

__version__ = "0.1.0"
