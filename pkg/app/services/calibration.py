"""
Share-series ingestion and least-squares fitting of the replicator model.

CSV schema: header `period,share` with an optional third column `unit`
(`fraction` or `percent`, default `fraction`); `#` starts a comment line and
`# label: <text>` names the series.
"""
import os
import math
import logging
from typing import Dict, List, Optional, Set, Tuple
from concurrent.futures import ThreadPoolExecutor
import numpy as np
import pandas as pd
from pydantic import ValidationError

from ..config import DEFAULT_DT, FIT_GRID_POINTS, FIT_MIN_POINTS, FIT_PASSES, WORKER_THREADS
from ..errors import CalibrationError, DomainError, SeriesFormatError
from ..models import CalibrationResult, ReplicatorParams, SeriesPoint, ShareSeries, period_ordinal
from .replicator import share_path, step_count
from .storage import csv_text

FITTABLE = ("alpha_net", "gamma", "p0", "epsilon")

# === INGESTION ===

def load_series(path: str) -> ShareSeries:
    with open(path, "rb") as f:
        raw = f.read()
    try:
        raw_lines = raw.decode("utf-8").splitlines()
    except UnicodeDecodeError as e:
        line = raw.count(b"\n", 0, e.start) + 1
        raise SeriesFormatError(f"invalid UTF-8 byte 0x{raw[e.start]:02x}", line) from e

    label = os.path.splitext(os.path.basename(path))[0]
    data_lines = []  # 1-based file line numbers of header and rows
    for no, line in enumerate(raw_lines, start=1):
        stripped = line.strip()
        if stripped.startswith("#"):
            body = stripped.lstrip("#").strip()
            if body.lower().startswith("label:"): label = body.split(":", 1)[1].strip()
            continue
        if stripped: data_lines.append(no)
    if not data_lines: raise SeriesFormatError("file has no header")

    try:
        df = pd.read_csv(path, comment="#", dtype=str, keep_default_na=False, skip_blank_lines=True, encoding="utf-8")
    except pd.errors.ParserError as e:
        raise SeriesFormatError(f"malformed row: {e}") from e

    columns = [c.strip() for c in df.columns]
    if columns not in (["period", "share"], ["period", "share", "unit"]):
        raise SeriesFormatError(f"header must be 'period,share[,unit]', got '{','.join(columns)}'", data_lines[0])
    df.columns = columns

    points = []
    for i, row in enumerate(df.itertuples(index=False)):
        line = data_lines[i + 1]
        unit = (getattr(row, "unit", "") or "fraction").strip()
        if unit not in ("fraction", "percent"):
            raise SeriesFormatError(f"unit must be 'fraction' or 'percent', got '{unit}'", line)
        try:
            period_ordinal(row.period)
            value = float(row.share)
        except ValueError as e:
            raise SeriesFormatError(f"malformed row: {e}", line) from e
        if not math.isfinite(value): raise SeriesFormatError("share is not finite", line)
        if unit == "percent":
            if not 0.0 <= value <= 100.0: raise SeriesFormatError(f"percent share {value} outside [0, 100]", line)
            value /= 100.0
        elif not 0.0 <= value <= 1.0:
            raise SeriesFormatError(f"fraction share {value} outside [0, 1]", line)
        points.append(SeriesPoint(period=row.period.strip(), share=value))

    if len(points) < FIT_MIN_POINTS:
        raise SeriesFormatError(f"too few points: {len(points)} < {FIT_MIN_POINTS}")
    try:
        return ShareSeries(label=label, points=points)
    except ValidationError as e:
        raise SeriesFormatError(e.errors()[0]["msg"]) from e

def write_series(series: ShareSeries) -> str:
    return csv_text(["period", "share"], [(p.period, p.share) for p in series.points])

# === FITTING ===

def model_shares(series: ShareSeries, params: ReplicatorParams, dt: float = DEFAULT_DT) -> List[float]:
    """Replicator path from the first observation, sampled at each observed period."""
    offsets = series.offsets()
    n = step_count(offsets[-1], dt)
    s0 = series.points[0].share
    path = [s0] + share_path(s0, params, n, dt)
    return [path[min(round(t / dt), n)] for t in offsets]

def score(series: ShareSeries, params: ReplicatorParams, dt: float = DEFAULT_DT) -> float:
    fitted = model_shares(series, params, dt)
    return float(sum((m - o) ** 2 for m, o in zip(fitted, series.shares())))

def _check_free(free: Set[str], bounds: Dict[str, Tuple[float, float]], fixed: ReplicatorParams):
    for name in free:
        if name not in FITTABLE:
            raise DomainError(f"'{name}' cannot be fitted; choose from {', '.join(FITTABLE)}")
        if name not in bounds:
            raise DomainError(f"free parameter '{name}' has no bounds")
        lo, hi = bounds[name]
        if not lo < hi: raise DomainError(f"bounds for '{name}' must satisfy lo < hi, got ({lo}, {hi})")
        for edge in (lo, hi):
            try:
                ReplicatorParams.model_validate({**fixed.model_dump(), name: edge})
            except ValidationError as e:
                raise DomainError(f"bounds for '{name}' leave the valid range: {e.errors()[0]['msg']}") from e

def fit_replicator(series: ShareSeries, free: Set[str], bounds: Dict[str, Tuple[float, float]],
                   fixed: ReplicatorParams, dt: float = DEFAULT_DT) -> CalibrationResult:
    """
    Deterministic coordinate grid refinement: FIT_PASSES passes, each scanning
    FIT_GRID_POINTS values per free parameter (in ReplicatorParams field order)
    with the others held at the incumbent best, then halving every bracket
    around the best point. Only strict improvements replace the incumbent.
    """
    fixed = fixed.replicator_params()
    free = set(free)
    _check_free(free, bounds, fixed)
    order = [name for name in ReplicatorParams.model_fields if name in free]

    best = {name: min(max(getattr(fixed, name), bounds[name][0]), bounds[name][1]) for name in order}
    best_sse = score(series, fixed.model_copy(update=best), dt)
    brackets = {name: tuple(bounds[name]) for name in order}
    trace, failed, pass_sse = 0, 0, []

    def evaluate(candidate: Dict[str, float]) -> Optional[float]:
        value = score(series, fixed.model_copy(update=candidate), dt)
        return value if math.isfinite(value) else None

    if order:
        if not math.isfinite(best_sse): best_sse = math.inf
        with ThreadPoolExecutor(WORKER_THREADS) as pool:
            for pass_no in range(FIT_PASSES):
                for name in order:
                    lo, hi = brackets[name]
                    grid = [float(v) for v in np.linspace(lo, hi, FIT_GRID_POINTS)]
                    results = list(pool.map(evaluate, [{**best, name: v} for v in grid]))
                    trace += len(grid)
                    for v, sse in zip(grid, results):
                        if sse is None:
                            failed += 1
                            logging.warning(f"Non-finite fit at {name}={v}; skipped")
                        elif sse < best_sse:
                            best_sse, best[name] = sse, v
                pass_sse.append(best_sse)
                logging.info(f"Calibration pass {pass_no + 1}/{FIT_PASSES}: sse={best_sse:.6g} {best}")
                for name in order:
                    lo, hi = brackets[name]
                    half = (hi - lo) / 4
                    brackets[name] = (max(bounds[name][0], best[name] - half), min(bounds[name][1], best[name] + half))
        if failed == trace or not math.isfinite(best_sse):
            raise CalibrationError("every grid evaluation produced a non-finite path")

    params = fixed.model_copy(update=best)
    fitted_path = ShareSeries(
        label=f"{series.label} (fitted)",
        points=[SeriesPoint(period=p.period, share=min(max(s, 0.0), 1.0)) for p, s in zip(series.points, model_shares(series, params, dt))],
    )
    return CalibrationResult(
        fitted=best, sse=max(best_sse, 0.0), fitted_path=fitted_path,
        grid_trace=trace, pass_sse=pass_sse, failed_points=failed,
    )
