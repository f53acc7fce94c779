"""Construct, detect and size Simpson's-paradox reversals in categorical trial data."""

from .paradox_bn import (
    ParadoxBnSpec,
    ReversalCertificate,
    build_npt,
    case1_recovery,
    case2_recovery,
    certify_reversal,
    exact_joint,
)
from .rct_design import DesignPlan, DesignSpec, Factor, allocate, group_count, subjects_required
from .tables import (
    AssociationSummary,
    ContingencyTable,
    Outcome,
    StratifiedAssociation,
    Treatment,
    Variable,
    association,
    detect_reversal,
    from_records,
    marginalize,
    scan_confounders,
    weighted_average,
)
from .trial_sim import TrialDataset, TrialRecord, sample, to_table

__version__ = "0.1.0"
