import sys
import json
import logging
import argparse
from typing import Any, Dict, List, Optional
from pydantic import ValidationError

from .config import LOG_LEVEL
from .errors import DomainError
from .models import OutputFormat, RunConfig
from .routers import baseline, calibration, dynamics, population
from .services.storage import csv_text, emit_plot_series, json_text, write_text

EXIT_OK, EXIT_VALIDATION, EXIT_RUNTIME = 0, 2, 3

COMMANDS = {}
for r in (baseline.router, dynamics.router, population.router, calibration.router):
    COMMANDS.update(r.commands)

# flag, params key, type
PARAM_FLAGS = [
    ("--p0", "p0", float), ("--alpha-mit", "alpha_mit", float), ("--alpha-net", "alpha_net", float),
    ("--gamma", "gamma", float), ("--k", "k", float), ("--epsilon", "epsilon", float),
    ("--loss", "loss", float), ("--theta", "theta", float), ("--ns", "n_s", float), ("--na", "n_a", float),
    ("--s0", "s0", float), ("--t-end", "t_end", float), ("--dt", "dt", float),
    ("--grid-n", "grid_n", int), ("--tol", "tol", float),
    ("--parameter", "parameter", str), ("--lo", "lo", float), ("--hi", "hi", float), ("--n", "n", int),
    ("--relax-t", "relax_t", float),
    ("--agents", "n_agents", int), ("--rounds", "rounds", int), ("--revision-rate", "revision_rate", float),
    ("--initial-share-alt", "initial_share_alt", float), ("--protocol", "protocol", str),
    ("--imitation-scale", "imitation_scale", float), ("--replicates", "replicates", int),
    ("--series", "series", str),
]

# === FLAG PARSING ===

def parse_shock(text: str) -> Dict[str, Any]:
    """TIME:FIELD=VALUE, e.g. 5:p0=0.35"""
    try:
        time, rest = text.split(":", 1)
        name, value = rest.split("=", 1)
        return {"time": float(time), "field": name.strip(), "value": float(value)}
    except ValueError:
        raise argparse.ArgumentTypeError(f"shock must look like TIME:FIELD=VALUE, got '{text}'")

def parse_bounds(text: str):
    """NAME=LO:HI, e.g. gamma=1.5:3"""
    try:
        name, rng = text.split("=", 1)
        lo, hi = rng.split(":", 1)
        return name.strip(), [float(lo), float(hi)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bounds must look like NAME=LO:HI, got '{text}'")

def parse_float_list(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got '{text}'")

def parse_name_list(text: str) -> List[str]:
    return [v.strip() for v in text.split(",") if v.strip()]

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS, allow_abbrev=False)
    for flag, dest, kind in PARAM_FLAGS:
        common.add_argument(flag, dest=dest, type=kind)
    common.add_argument("--fast", dest="fast", action="store_true", help="closed-form p* when applicable")
    common.add_argument("--shock", dest="shocks", type=parse_shock, action="append", help="TIME:FIELD=VALUE (repeatable)")
    common.add_argument("--bounds", dest="bounds", type=parse_bounds, action="append", help="NAME=LO:HI (repeatable)")
    common.add_argument("--free", dest="free", type=parse_name_list, help="comma-separated parameters to fit")
    common.add_argument("--share-grid", dest="share_grid", type=parse_float_list, help="initial shares for a critical-mass curve")
    common.add_argument("--config", dest="run_config", help="JSON config file; flags override it")
    common.add_argument("--format", dest="run_format", choices=[f.value for f in OutputFormat])
    common.add_argument("--output", dest="run_output", help="output path, default standard output")
    common.add_argument("--seed", dest="run_seed", type=int)
    common.add_argument("--plot", dest="run_plot", help="write a plot-ready x,y[,series] CSV here")

    parser = argparse.ArgumentParser(prog="pml", description="Payment-network migration model toolkit", allow_abbrev=False)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, command in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=command.help, allow_abbrev=False)
    return parser

def build_config(args: argparse.Namespace) -> RunConfig:
    values = vars(args).copy()
    command = values.pop("command")
    file_cfg: Dict[str, Any] = {}
    path = values.pop("run_config", None)
    if path:
        try:
            with open(path, "r", encoding="utf-8") as f: file_cfg = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise DomainError(f"config: cannot read {path}: {e}")
        if not isinstance(file_cfg, dict): raise DomainError("config: top level must be a JSON object")
        if file_cfg.get("command", command) != command:
            raise DomainError(f"command: config file says '{file_cfg['command']}' but '{command}' was requested")

    run = {k: values.pop(k) for k in ("run_format", "run_output", "run_seed", "run_plot") if k in values}
    params = dict(file_cfg.get("params") or {})
    if "bounds" in values: values["bounds"] = dict(values["bounds"])
    params.update(values)

    merged = {**file_cfg, "command": command, "params": params}
    merged.update({k[len("run_"):]: v for k, v in run.items()})
    return RunConfig.model_validate(merged)

# === EXECUTION ===

def execute(config: RunConfig) -> int:
    command = COMMANDS[config.command.value]
    request = command.schema.model_validate(config.params)
    logging.info(f"Running {command.name}")
    artifact = command.handler(request, config)
    if config.format == OutputFormat.JSON:
        text = json_text(artifact.payload)
    else:
        text = csv_text(artifact.header, artifact.rows)
    write_text(text, config.output)
    if config.plot:
        if artifact.plot is None: raise DomainError(f"plot: '{command.name}' has no plot series")
        emit_plot_series(artifact.plot, config.plot)
    return EXIT_OK

def main(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(level=LOG_LEVEL, stream=sys.stderr, format="%(levelname)s %(message)s")
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_VALIDATION
    try:
        return execute(build_config(args))
    except ValidationError as e:
        for err in e.errors():
            field = ".".join(str(p) for p in err["loc"]) or "input"
            logging.error(f"Invalid {field}: {err['msg']}")
        return EXIT_VALIDATION
    except DomainError as e:
        logging.error(f"Invalid input: {e}")
        return EXIT_VALIDATION
    except Exception as e:
        logging.error(f"Runtime error: {e}", exc_info=True)
        return EXIT_RUNTIME

if __name__ == "__main__":
    sys.exit(main())
