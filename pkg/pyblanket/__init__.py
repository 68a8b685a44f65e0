from .error import (
    BlanketErrno,
    BlanketError,
    DegenerateGroundStateWarning,
    InvariantViolation,
)
from .state import (
    MultipartiteState,
    Region,
    bell_state,
    chain_rule_check,
    conditional_ensemble,
    conditional_mutual_information,
    disjoint_union,
    ghz_state,
    maximally_mixed,
    measured_cmi,
    mutual_information,
    partial_trace,
    product_state,
    pure_state,
    random_state,
    relative_entropy,
    von_neumann_entropy,
)
from .measurement import (
    ProjectiveMeasurement,
    compose_measurements,
    random_measurement,
)
from .optimizer import OptimizerConfig, optimize_measurement, optimize_unitary
from .channels import (
    ChoiState,
    Ensemble,
    KrausChannel,
    MeasureAndPrepareChannel,
    channel_of_choi,
    choi_of_channel,
    diamond_upper_bound,
    ensemble_to_mp_channel,
    locc_arrow_distance,
    omega_factor,
    random_channel,
    reduced_channel_choi,
    theorem_rhs,
)
from .blanket import (
    BlanketReport,
    Certificate,
    StepRecord,
    alpha_q,
    greedy_blanket,
    pad_blanket,
    separable_reconstruction,
    theorem1_certificate,
)
from .experiments import (
    SpinChainConfig,
    SweepConfig,
    analytic_examples_check,
    appendix_b_check,
    figure3_sweep,
    spin_chain_channel,
)


__all__ = [
    # errors
    "BlanketErrno",
    "BlanketError",
    "DegenerateGroundStateWarning",
    "InvariantViolation",
    # states and information quantities
    "MultipartiteState",
    "Region",
    "bell_state",
    "chain_rule_check",
    "conditional_ensemble",
    "conditional_mutual_information",
    "disjoint_union",
    "ghz_state",
    "maximally_mixed",
    "measured_cmi",
    "mutual_information",
    "partial_trace",
    "product_state",
    "pure_state",
    "random_state",
    "relative_entropy",
    "von_neumann_entropy",
    # measurements
    "ProjectiveMeasurement",
    "compose_measurements",
    "random_measurement",
    # optimizer
    "OptimizerConfig",
    "optimize_measurement",
    "optimize_unitary",
    # channels
    "ChoiState",
    "Ensemble",
    "KrausChannel",
    "MeasureAndPrepareChannel",
    "channel_of_choi",
    "choi_of_channel",
    "diamond_upper_bound",
    "ensemble_to_mp_channel",
    "locc_arrow_distance",
    "omega_factor",
    "random_channel",
    "reduced_channel_choi",
    "theorem_rhs",
    # blankets
    "BlanketReport",
    "Certificate",
    "StepRecord",
    "alpha_q",
    "greedy_blanket",
    "pad_blanket",
    "separable_reconstruction",
    "theorem1_certificate",
    # experiments
    "SpinChainConfig",
    "SweepConfig",
    "analytic_examples_check",
    "appendix_b_check",
    "figure3_sweep",
    "spin_chain_channel",
]
