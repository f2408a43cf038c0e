# model_layer/constants.py
from __future__ import annotations

# Numeric invariants of the sampled model
NORMALIZATION_ATOL = 1e-12  # |sum(probs) + tail_mass - 1|
DECOMPOSITION_RTOL = 1e-12  # product form vs W^rho Z / i^(rho+1)
TIMES_RTOL = 1e-12
TIMES_ATOL = 1e-13  # float spacing of times near log(1e6) is ~2e-15

# Truncation of the bin sequence
MIN_BINS = 64
DISTRIBUTION_TRUNCATION_FACTOR = 10.0  # n_bins >= factor * x_max * n^(1/(rho+2))
POWER_TRUNCATION_FACTOR = 4.0  # n_bins >= factor * x_max * n^alpha

# Quadrature
DEFAULT_QUAD_RTOL = 1e-9
DEFAULT_QUAD_ABSTOL = 1e-13
DEFAULT_QUAD_SUBDIVISIONS = 200
MAX_QUAD_RTOL = 1e-3

# Statistics
MIN_KS_SAMPLES = 50
MIN_CHI2_COUNTS = 200
MIN_CHI2_CELL_EXPECTED = 5.0
MIN_LAPLACE_REPLICATIONS = 100
MAX_PMF_SUPPORT = 100_000  # hard cap on cells scanned by count_pmf_test

# Seed streams; each experiment owns a block of 2**32 replication streams
STREAM_BLOCK_BITS = 32
