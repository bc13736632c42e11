import os
import sys
import json
import logging
from typing import Any, Iterable, List, Optional, Sequence, Union
from pydantic import BaseModel

from ..models import BifurcationDiagram, ShareSeries, SimulationRun, Trajectory

def format_number(x: Any) -> str:
    """Shortest round-trip repr (at most 17 significant digits); integral floats print without '.0'."""
    if isinstance(x, bool) or not isinstance(x, (int, float)): return str(x)
    x = float(x)
    if x.is_integer() and abs(x) < 1e16: return str(int(x))
    return repr(x)

def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(format_number(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"

def json_text(payload: Union[BaseModel, List[BaseModel], dict, list]) -> str:
    if isinstance(payload, BaseModel):
        data = payload.model_dump(mode="json")
    elif isinstance(payload, list):
        data = [p.model_dump(mode="json") if isinstance(p, BaseModel) else p for p in payload]
    else:
        data = payload
    return json.dumps(data, indent=2) + "\n"

def write_text(text: str, path: Optional[str] = None) -> Optional[str]:
    """Writes to path, or to standard output when path is None or '-'."""
    if path in (None, "-"):
        sys.stdout.write(text)
        sys.stdout.flush()
        return None
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)
    logging.info(f"Wrote {len(text)} bytes to {path}")
    return path

def plot_series_text(result: Any) -> str:
    if isinstance(result, Trajectory):
        return csv_text(["x", "y"], zip(result.times, result.shares))
    if isinstance(result, BifurcationDiagram):
        rows = [(s.value, p.share, p.stability.value) for s in result.samples for p in s.equilibria.points]
        return csv_text(["x", "y", "series"], rows)
    if isinstance(result, ShareSeries):
        return csv_text(["x", "y"], [(p.period, p.share) for p in result.points])
    if isinstance(result, SimulationRun):
        return csv_text(["x", "y"], enumerate(result.share_path))
    raise TypeError(f"cannot build a plot series from {type(result).__name__}")

def emit_plot_series(result: Any, path: str) -> str:
    """Plot-ready x,y[,series] CSV for Trajectory, BifurcationDiagram, ShareSeries or SimulationRun."""
    return write_text(plot_series_text(result), path)
