"""EUR/USD cognitive trading pipeline: indicators, levels, labels, metrics,
simulation and the ``fx`` command line, backed by the C++ core."""

from ._core import (
    ConfigError,
    CoverageError,
    DegenerateSignalError,
    Error,
    ParseError,
    PreconditionError,
    ShapeError,
    TrainingDivergedError,
    UndefinedMetricError,
    ValidationError,
    PriceSeries,
    auc,
    confusion,
    directional_index,
    gradient_check,
    gross_return,
    grouper,
    indicators,
    labels,
    lift_curve,
    fibonacci_levels,
    run_cli,
    support_resistance,
    synthetic_prices,
    win_rate,
)

__all__ = [name for name in dir() if not name.startswith("_")]
