"""Channel estimation from 1-bit quantized measurements with an unknown
comparator threshold: analytic performance bounds, asymptotically optimal
estimators, and a Monte-Carlo experiment harness."""

from .errors import ConfigError, NumericalError, RankDeficiencyError, SingularFimError
from .estimators import (
    EstimateResult,
    jmap_mle,
    map_ideal,
    map_quantized_known,
    mle_ideal,
    mle_quantized_joint,
    mle_quantized_known,
)
from .fisher import (
    FimBlocks,
    LowSnrLimits,
    crlb_ideal,
    crlb_quantized_known,
    crlb_quantized_unknown,
    fim_ideal,
    fim_quantized,
    loss_chi,
    loss_chi_star,
    loss_upsilon,
    low_snr_limits,
    single_tap_closed_forms,
)
from .harness import (
    Curve,
    CurvePoint,
    LossTable,
    ScenarioConfig,
    run_deterministic,
    run_hybrid,
    run_loss_curves,
)
from .hybrid import (
    PriorBound,
    PriorExpectationConfig,
    bcrlb,
    ecrlb,
    ehcrlb,
    ehcrlb_known_offset,
    ehcrlb_known_quadrature_1tap,
    ehcrlb_quadrature_1tap,
    hcrlb,
    hybrid_losses,
)
from .pilots import (
    ChannelParams,
    GaussianPrior,
    PilotDesign,
    load_pilot_symbols,
    make_pilot,
    sample_ideal,
    sample_quantized,
    save_pilot_symbols,
    signal_value,
)
from .qfunc import log_phi_n, log_q_function, phi_n, phi_zero, q_function

__version__ = "0.1.0"

__all__ = [
    "ChannelParams",
    "ConfigError",
    "Curve",
    "CurvePoint",
    "EstimateResult",
    "FimBlocks",
    "GaussianPrior",
    "LossTable",
    "LowSnrLimits",
    "NumericalError",
    "PilotDesign",
    "PriorBound",
    "PriorExpectationConfig",
    "RankDeficiencyError",
    "ScenarioConfig",
    "SingularFimError",
    "bcrlb",
    "crlb_ideal",
    "crlb_quantized_known",
    "crlb_quantized_unknown",
    "ecrlb",
    "ehcrlb",
    "ehcrlb_known_offset",
    "ehcrlb_known_quadrature_1tap",
    "ehcrlb_quadrature_1tap",
    "fim_ideal",
    "fim_quantized",
    "hcrlb",
    "hybrid_losses",
    "jmap_mle",
    "load_pilot_symbols",
    "log_phi_n",
    "log_q_function",
    "loss_chi",
    "loss_chi_star",
    "loss_upsilon",
    "low_snr_limits",
    "make_pilot",
    "map_ideal",
    "map_quantized_known",
    "mle_ideal",
    "mle_quantized_joint",
    "mle_quantized_known",
    "phi_n",
    "phi_zero",
    "q_function",
    "run_deterministic",
    "run_hybrid",
    "run_loss_curves",
    "sample_ideal",
    "sample_quantized",
    "save_pilot_symbols",
    "signal_value",
    "single_tap_closed_forms",
]
