"""Numerics for the spinor zeta function of genus-2 Siegel eigenforms."""

from .coeffs import (
    CoeffTable,
    SignCounts,
    build_table,
    crosscheck_hecke,
    partial_sums_segmented,
    rp_violation_scan,
    sign_counts,
)
from .detector import (
    ExtremaReport,
    KernelTest,
    WindowScan,
    find_extrema,
    j_tau,
    kernel,
    phi,
    r_s_beta,
    scan_window,
)
from .errors import (
    AccuracyError,
    DataFormatError,
    MissingPrimeError,
    SpinorZetaError,
    TableTooSmallError,
    ValidationError,
)
from .ingest import gen_sk, gen_tempered, gen_trivial, load, save
from .satake import (
    EigenformData,
    LocalFactor,
    SpinParameters,
    hecke_to_local,
    is_tempered,
    local_coeffs,
    local_lambda,
    spin_roots,
)
from .voronoi import (
    PerronConfig,
    VoronoiEvaluation,
    error_exponent_fit,
    evaluate,
    i0_leading,
    main_term,
    perron_oracle,
)

__version__ = "0.1.0"
