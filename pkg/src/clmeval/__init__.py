"""Cluster-label matching evaluation with adjusted internal validation measures."""

__version__ = "0.1.0"

from .adjusted import (  # noqa: E402
    MeasureConfig,
    ch_adjusted,
    db_adjusted,
    dunn_adjusted,
    ii_adjusted,
    ii_xb_adjusted,
    prepare,
    sc_adjusted,
    shifted_evaluation,
    xb_adjusted,
)
from .baseline import ch, db, di, ii, sc, xb  # noqa: E402
from .calibration import CalibrationEntry, CalibrationSet, SearchSpace, calibrate_k  # noqa: E402
from .errors import (  # noqa: E402
    CLMError,
    ClassTooSmall,
    DataError,
    DegenerateError,
    TooFewClasses,
)
from .measures import MEASURE_NAMES, evaluate, get_measure  # noqa: E402

__all__ = [
    "__version__", "MeasureConfig", "ch_adjusted", "db_adjusted", "dunn_adjusted",
    "ii_adjusted", "ii_xb_adjusted", "xb_adjusted", "sc_adjusted", "prepare",
    "shifted_evaluation", "ch", "db", "di", "ii", "sc", "xb", "CalibrationEntry",
    "CalibrationSet", "SearchSpace", "calibrate_k", "CLMError", "ClassTooSmall",
    "DataError", "DegenerateError", "TooFewClasses", "MEASURE_NAMES", "evaluate",
    "get_measure",
]
