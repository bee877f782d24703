"""Heralded single photons from parametric down-conversion twin beams.

Exact photon-number statistics, lossy PNR and bucket detection, normalized
factorial moments, and the loss-tolerant parity reconstruction applied to
both exact distributions and measured joint counts.
"""

__version__ = "0.1.0"

from .channels import (
    CLICK,
    NO_CLICK,
    DetectorKind,
    DetectorModel,
    PovmElement,
    apply_loss,
    apply_loss_joint,
    bucket_povm,
    pnr_povm,
)
from .errors import *  # noqa: F401,F403
from .estimate import (
    EstimateReport,
    JointCounts,
    bootstrap_ci,
    effective_klyshko,
    empirical_joint,
    heralded_g_from_counts,
    klyshko,
    mean_corrected_from_car,
    mean_pdc_from_car,
    parity_pipeline,
)
from .fock import (
    JointDistribution,
    PdcSource,
    PhotonDistribution,
    Regime,
    auto_cutoff,
    mean_photon,
    pdc_joint,
    pdc_weights,
)
from .herald import Arm, HeraldSpec, herald_probability, herald_source, heralded_state, preparation_probability
from .moments import (
    MgfCurve,
    MomentSet,
    car,
    factorial_moment,
    factorial_moments,
    joint_moment,
    mgf_curve,
    mgf_exact,
    mgf_series,
    parity,
)
from .montecarlo import ExperimentConfig, sample_run, sample_stream
