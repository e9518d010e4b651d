"""Differentially private goodness-of-fit testing for frequency tables.

Provides truncated discrete noise kernels with (epsilon, delta) accounting,
exact and model-misspecified likelihoods for perturbed tables, likelihood-ratio
tests with several calibration routes, power-loss / sample-cost analysis, sharp
large-deviation estimates, and a seeded Monte Carlo engine.
"""

from .divergence import (
    HypothesisPair,
    PowerLossReport,
    SampleCostReport,
    kl_gradient,
    kl_multinomial,
    large_scale_count,
    power_loss,
    predicted_power_exponent,
    proposition_bounds,
    sample_cost,
)
from .errors import (
    DegenerateDataError,
    DomainError,
    InfeasibleError,
    NumericalError,
    OptimizerError,
    PrivfitError,
    SizeError,
    ValidationError,
)
from .gof import (
    CriticalSource,
    Model,
    TestConfig,
    TestOutcome,
    calibrated_critical_value,
    chi2_cdf,
    chi2_quantile,
    edgeworth_naive_cdf,
    exact_null_cdf,
    lr_statistic_multinomial,
    lr_statistic_naive,
    lr_statistic_true,
    run_test,
)
from .kernels import (
    DPReport,
    NoiseKernel,
    PrivacyBudget,
    delta_of,
    kernel_from_json,
    kernel_log_mgf,
    kernel_to_json,
    kernel_variance,
    make_kernel,
    perturb,
    post_process_nonnegative,
    sample_noise,
    verify_dp,
)
from .likelihood import (
    FisherInfo,
    SimplexPoint,
    clamp_to_interior,
    fisher_information,
    h_factor,
    mle_naive,
    mle_true,
    multinomial_log_pmf,
    naive_log_likelihood,
    true_log_likelihood,
)
from .mc import (
    SimPlan,
    SimSummary,
    estimate_exponent,
    estimate_power,
    min_sample_size,
    simulate_null_cdf,
    simulate_statistics,
)
from .sharp_ld import (
    LatticeDistribution,
    LDEstimate,
    cumulant,
    exact_tail_oracle,
    legendre_transform,
    sharp_ld_estimate,
)
from .tables import (
    FrequencyTable,
    PerturbedTable,
    PostProcessedTable,
    read_counts_csv,
    read_values_csv,
    write_counts_csv,
    write_values_csv,
)

__version__ = "0.1.0"
