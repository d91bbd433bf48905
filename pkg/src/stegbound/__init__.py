"""Embedding-capacity bounds for correlated Gaussian covers.

Closed-form maximum embedding rates (Lambert W machinery), the optimal
message distribution, square-root-law ceilings, and Monte Carlo
verification through optimal-detector and random-coding experiments,
plus PGM image ingestion for per-image bounds.
"""

from .capacity import (
    EmbeddingBound,
    PeBound,
    factor_range,
    max_rate,
    message_params,
    payload_curve,
    pe_floor,
    srl_bound,
)
from .errors import (
    BadHeaderError,
    CodebookTooLargeError,
    DegenerateCodebookError,
    DegenerateModelError,
    DimensionMismatchError,
    EmptyImageError,
    InconsistentBudgetError,
    NotPositiveDefiniteError,
    PgmFormatError,
    StegboundError,
    TooFewSamplesError,
    TruncatedError,
    UnsupportedFormatError,
)
from .gaussian import (
    GaussianModel,
    QuantizationSpec,
    diff_entropy,
    factorize,
    kl_forward,
    kl_reverse,
    quantize,
    quantized_entropy,
    sample,
)
from .gibbs import CliqueStructure, gibbs_density, gibbs_energy
from .ingest import (
    CliqueSpec,
    GrayImage,
    ImageCapacityReport,
    estimate_cov,
    image_capacity,
    load_pgm,
    partition,
    save_pgm,
)
from .simulate import (
    H0,
    H1,
    Codebook,
    CodingReport,
    DetectionReport,
    build_codebook,
    decode,
    embed,
    lrt_decide,
    run_coding,
    run_detection,
    run_detector_comparison,
    total_variation_1d,
)
from .special import (
    EmbeddingFactor,
    embedding_factor,
    embedding_factor_reverse,
    lambert_wm1,
    sandwich_bounds,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # special
    "EmbeddingFactor",
    "embedding_factor",
    "embedding_factor_reverse",
    "lambert_wm1",
    "sandwich_bounds",
    # gaussian
    "GaussianModel",
    "QuantizationSpec",
    "factorize",
    "sample",
    "quantize",
    "kl_forward",
    "kl_reverse",
    "diff_entropy",
    "quantized_entropy",
    # gibbs
    "CliqueStructure",
    "gibbs_energy",
    "gibbs_density",
    # capacity
    "EmbeddingBound",
    "PeBound",
    "message_params",
    "max_rate",
    "srl_bound",
    "pe_floor",
    "factor_range",
    "payload_curve",
    # simulate
    "H0",
    "H1",
    "DetectionReport",
    "Codebook",
    "CodingReport",
    "lrt_decide",
    "run_detection",
    "run_detector_comparison",
    "total_variation_1d",
    "build_codebook",
    "embed",
    "decode",
    "run_coding",
    # ingest
    "GrayImage",
    "CliqueSpec",
    "ImageCapacityReport",
    "load_pgm",
    "save_pgm",
    "partition",
    "estimate_cov",
    "image_capacity",
    # errors
    "StegboundError",
    "DimensionMismatchError",
    "NotPositiveDefiniteError",
    "DegenerateModelError",
    "DegenerateCodebookError",
    "CodebookTooLargeError",
    "InconsistentBudgetError",
    "TooFewSamplesError",
    "EmptyImageError",
    "PgmFormatError",
    "UnsupportedFormatError",
    "BadHeaderError",
    "TruncatedError",
]
