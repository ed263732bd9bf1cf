"""Binary-input classical-quantum channels: CNOT combining, duality,
entropy bounds and polarization."""
from .bounds import (
    BoundReport,
    binary_convolution,
    binary_entropy,
    binary_entropy_inverse,
    bound_report,
    classical_bounds,
    classical_plus_bounds,
    concavity_gap_exact,
    concavity_lower_fid,
    concavity_lower_sqrt,
    conjectured_lower,
    conjectured_upper,
    fidelity_window,
    fuchs_vdg_lower,
    gc,
    kappa_estimate,
    mgl_fg,
    qmgl_lower_asym,
    qmgl_lower_iid,
    qmgl_lower_iid_convenient,
)
from .channels import (
    CqChannel,
    JointCqState,
    bec_embed,
    bsc_embed,
    channel_entropy,
    joint_state,
    perfect_channel,
    pure_channel,
    random_cq_channel,
    symmetric_capacity,
    useless_channel,
)
from .combine import boxast, combined_entropies, conditional_entropy_general, minus_entropy, varoast
from .duality import check_duality_lemma, dual_channel
from .errors import *  # noqa: F401,F403
from .linalg import (
    LOG2,
    eig_hermitian,
    fidelity,
    matrix_sqrt,
    partial_trace,
    relative_entropy,
    tensor,
    von_neumann_entropy,
)
from .polar import (
    BecChannel,
    BmsChannel,
    PolarizationTrace,
    nonstationary_polarize,
    polar_step,
    polarization_stats,
    polarize_classical,
    polarize_exact,
    speed_trace,
)

__version__ = "0.1.0"
