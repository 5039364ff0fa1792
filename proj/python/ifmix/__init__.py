"""Graph mixup whose mixed samples can be inverted back to their sources."""

from ._core import (
    AuditReport,
    BetaParams,
    Dataset,
    FeatureBasis,
    Graph,
    RecoveredPair,
    ParseError,
    RecoveryError,
    beta_pdf,
    check_linear_independence,
    dataset_stats,
    feature_vocabulary,
    intrusion_audit,
    load_dataset,
    mix_labels,
    mix_pair,
    recover_pair,
    run_command,
    sample_lambda,
)

__all__ = [
    "AuditReport",
    "BetaParams",
    "Dataset",
    "FeatureBasis",
    "Graph",
    "RecoveredPair",
    "ParseError",
    "RecoveryError",
    "beta_pdf",
    "check_linear_independence",
    "dataset_stats",
    "feature_vocabulary",
    "intrusion_audit",
    "load_dataset",
    "mix_labels",
    "mix_pair",
    "recover_pair",
    "run_command",
    "sample_lambda",
]
