"""Spectral analysis of the wavelet Galerkin (Ruelle transfer) operator of a low-pass filter."""

__version__ = "0.1.0"

from .exceptions import ConvergenceError, NotAnEigenvalueError, ValidationError
from .filters import (
    BUILTIN_NAMES,
    Autocorrelation,
    Filter,
    autocorrelation,
    builtin,
    evaluate,
    load_filter,
    modulus_squared,
    qmf_residual,
    save_filter,
    zeros,
)
from .transfer import (
    CircleFn,
    EigenPair,
    GridFn,
    TransitionMatrix,
    TrigPoly,
    apply_circlefn,
    apply_grid,
    apply_poly,
    eigen,
    grid_angles,
    power_growth,
    spectral_radius,
    transition_matrix,
)
from .cycles import (
    Cycle,
    PeripheralPrediction,
    classify_cycles,
    detect_m0_cycles,
    enumerate_cycles,
    match_peripheral,
    predict_peripheral,
)
from .constructors import (
    HSeries,
    InfiniteProduct,
    KernelFn,
    PeripheralBasis,
    ProductParams,
    h_family_gram,
    h_series,
    independence_matrix,
    iterated_filter,
    kernel_function,
    peripheral_basis,
    peripheral_phi,
    periodize,
    scaling_product,
)
from .banach import (
    SelfSimilarFn,
    hf_build,
    hf_build_many,
    hf_family_independence,
    indicator,
    lp_contraction_check,
    lp_norm,
    lp_sharpness_demo,
    peripheral_nonexistence_probe,
    self_similar,
    sharpness_table,
)
from .report import AnalysisOptions, SpectralReport, analyze, verify, write_report
from .estimator import RuelleSpectrum

__all__ = [
    "__version__",
    "ConvergenceError",
    "NotAnEigenvalueError",
    "ValidationError",
    "BUILTIN_NAMES",
    "Autocorrelation",
    "Filter",
    "autocorrelation",
    "builtin",
    "evaluate",
    "load_filter",
    "modulus_squared",
    "qmf_residual",
    "save_filter",
    "zeros",
    "CircleFn",
    "EigenPair",
    "GridFn",
    "TransitionMatrix",
    "TrigPoly",
    "apply_circlefn",
    "apply_grid",
    "apply_poly",
    "eigen",
    "grid_angles",
    "power_growth",
    "spectral_radius",
    "transition_matrix",
    "Cycle",
    "PeripheralPrediction",
    "classify_cycles",
    "detect_m0_cycles",
    "enumerate_cycles",
    "match_peripheral",
    "predict_peripheral",
    "HSeries",
    "InfiniteProduct",
    "KernelFn",
    "PeripheralBasis",
    "ProductParams",
    "h_family_gram",
    "h_series",
    "independence_matrix",
    "iterated_filter",
    "kernel_function",
    "peripheral_basis",
    "peripheral_phi",
    "periodize",
    "scaling_product",
    "SelfSimilarFn",
    "hf_build",
    "hf_build_many",
    "hf_family_independence",
    "indicator",
    "lp_contraction_check",
    "lp_norm",
    "lp_sharpness_demo",
    "peripheral_nonexistence_probe",
    "self_similar",
    "sharpness_table",
    "AnalysisOptions",
    "SpectralReport",
    "analyze",
    "verify",
    "write_report",
    "RuelleSpectrum",
]
