"""Split-conformal prediction regions for Dirichlet regression on the simplex."""

from .application import RegionRecord, RunConfig, predict_regions, run_application
from .conformal import (
    BoxRegion,
    ConformalQuantile,
    SplitIndices,
    conformal_quantile,
    pit_values,
    qr_region,
    qr_score,
    split_data,
)
from .data import (
    BUDGET_ITALY_SCHEMA,
    DatasetSchema,
    budget_italy_path,
    load_dataset,
    load_model,
    load_schema,
    save_model,
    save_schema,
)
from .dirichlet import (
    MeanPrecision,
    ShapeParams,
    as_composition,
    component_moments,
    log_density,
    marginal_beta,
    sample,
    to_mean_precision,
    to_shape,
)
from .exceptions import (
    BracketError,
    ConvergenceError,
    DomainError,
    FitError,
    ParseError,
    RankError,
    SchemaError,
    SimplexConfError,
    UnsupportedDimensionError,
)
from .hdr import (
    FloorPolytope,
    LevelData,
    LevelSetGrid,
    floor_polytope,
    full_grid_region,
    grid_region,
    level_threshold,
    nll_score,
    solve_floor,
)
from .regression import (
    Coefficients,
    Dataset,
    FitConfig,
    FittedModel,
    fit_mle,
    negative_log_likelihood,
    nll_gradient,
    predict_params,
)
from .simulation import (
    HDR_FLOOR,
    HDR_GRID,
    METHODS,
    QR,
    SIMPLEX_GRID,
    EvalSummary,
    compare_hdr_vs_full,
    generate_scenario,
    run_monte_carlo,
    scenario,
)

__version__ = "0.1.0"
