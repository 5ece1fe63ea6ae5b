"""Name-based access to every measure, used by the CLI and the experiment harness."""

from dataclasses import asdict
from functools import partial

from . import baseline
from .adjusted import MeasureConfig, prepare

BASELINE_NAMES = ("ch", "di", "ii", "xb", "db", "sc")
ADJUSTED_NAMES = {"ch_adj": "ch_a", "di_adj": "di_a", "ii_adj": "iixb_a", "xb_adj": "iixb_a",
                  "iixb_adj": "iixb_a", "db_adj": "db_a", "sc_adj": "sc_a"}
MEASURE_NAMES = BASELINE_NAMES + tuple(ADJUSTED_NAMES)


def _baseline(name, p, X, labels):
    if name == "ii":
        return baseline.ii(X, labels, p=p)
    return baseline.BASELINES[name](X, labels)


def _adjusted(kind, config, X, labels):
    return prepare(kind, X, labels, config).score(config.k)


def get_measure(name, config=None):
    """Return ``fn(X, labels) -> float`` for a measure name (picklable)."""
    config = config or MeasureConfig()
    if name in BASELINE_NAMES:
        return partial(_baseline, name, config.p)
    if name in ADJUSTED_NAMES:
        return partial(_adjusted, ADJUSTED_NAMES[name], config)
    raise ValueError(f"unknown measure {name!r}; choose from {', '.join(MEASURE_NAMES)}")


def evaluate(name, X, labels, config=None):
    """Score plus per-pair breakdown and config echo, as a plain dict."""
    config = config or MeasureConfig()
    report = {"measure": name}
    if name in BASELINE_NAMES:
        report["score"] = get_measure(name, config)(X, labels)
        report["pairs"] = []
    elif name in ADJUSTED_NAMES:
        kind = ADJUSTED_NAMES[name]
        prep = prepare(kind, X, labels, config)
        report["score"] = prep.score(config.k)
        report["pairs"] = prep.breakdown(config.k)
        report["min_mode"] = config.resolve_min_mode(kind)
        report["clamped_pairs"] = sum(1 for row in report["pairs"] if row["clamped"])
    else:
        get_measure(name)
    report["config"] = asdict(config)
    return report
