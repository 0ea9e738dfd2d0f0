"""Sparse Shor order-finding simulation with magic (SRE) analysis."""

__version__ = "0.1.0"

from shormagic.numtheory import (
    ContinuedFraction,
    OrderSpectrum,
    PeriodDecomposition,
    RecoveryResult,
    continued_fraction_expand,
    mod_pow,
    multiplicative_order,
    order_spectrum,
    recover_period,
    split_period,
)
from shormagic.simulator import (
    RunRecord,
    ShorInstance,
    SparseState,
    StepTrace,
    controlled_modmul,
    dense_reference,
    init_state,
    qft_entanglement_entropy,
    run,
    step,
)
from shormagic.magic import (
    MagicCurve,
    SupportSet,
    d_schedule,
    haar_average_m2,
    lambda_closed,
    lambda_exact,
    m2_curve_analytic,
    m2_final_asymptotes,
    m2_structured,
    sre_bruteforce,
    sre_sparse_exact,
    structured_state_sample,
)

__all__ = [name for name in dir() if not name.startswith("_")]
