"""Command-line front end.

    magnus comm-scaling [--layers 3] [--grid-sizes 64,128] ...
    magnus magnus-local [--dt 0.8,0.4,0.2,0.1] ...
    magnus magnus-global [--L 4,8,16,32] ...
    magnus verify [--seed 0]

Every key can also come from ``--config FILE``, a text file of
``key = value`` lines; flags on the command line win over the file.
Exit codes: 0 all checks pass, 2 bad configuration, 3 work-budget refusal,
4 acceptance failure, 5 output not writable.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field

from ipmagnus.discretize import PotentialSpec
from ipmagnus.harness.acceptance import evaluate_rows
from ipmagnus.harness.experiments import (
    DEFAULT_H_VALUES,
    DEFAULT_LABEL_DIVISORS,
    TREE_BUDGET,
    CommScalingConfig,
    GlobalErrorConfig,
    LocalErrorConfig,
    run_comm_scaling,
    run_global_error,
    run_local_error,
)
from ipmagnus.harness.report import emit_results, slope_table, write_verification_report
from ipmagnus.harness.verify import run_verification_suite
from ipmagnus.magnus import DEFAULT_WORK_BUDGET, WorkBudgetError

__all__ = ["CliConfig", "ConfigError", "build_config", "main", "parse_args", "run"]

EXIT_OK, EXIT_CONFIG, EXIT_BUDGET, EXIT_FAIL, EXIT_IO = 0, 2, 3, 4, 5
FULL_GRID_SIZES = (256, 512, 1024, 2048)
DEFAULT_OUT_DIR = "magnus_out"
ASSUMED_FLOPS = 1e10  # single-core complex GEMM throughput, for the --full estimate


class ConfigError(ValueError):
    """Bad subcommand, key or value; the message names the offending token."""


def _floats(text):
    return tuple(float(v) for v in text.split(",") if v.strip())


def _ints(text):
    return tuple(int(v) for v in text.split(",") if v.strip())


def _bool(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _fmt(v):
    if isinstance(v, tuple):
        return ",".join(_fmt(x) for x in v)
    if isinstance(v, PotentialSpec):
        return v.label()
    if isinstance(v, float):
        return format(v, "g")
    return str(v)


# key -> (parser, default, help); defaults reproduce the reference experiments
COMMON_KEYS = {
    "seed": (int, 0, "seed for the random checks"),
    "workers": (int, 1, "worker threads for independent cells"),
    "record-timings": (_bool, False, "fill the seconds column (makes CSVs non-reproducible)"),
}
KEYS = {
    "comm-scaling": {
        "layers": (int, 3, "commutator layers (2, 3 or 4)"),
        "grid-sizes": (_ints, (64, 128), "grid sizes N"),
        "h": (_floats, DEFAULT_H_VALUES, "semiclassical parameters h"),
        "label-divisors": (_ints, DEFAULT_LABEL_DIVISORS, "labels are h/d for these d"),
        "potential": (PotentialSpec.parse, PotentialSpec.cos(), "cos, halfcos, zero or constant:<c>"),
        "bracketing": (str, "left-normed", "left-normed or all-trees"),
        "tree-budget": (int, TREE_BUDGET, "refuse runs needing more commutator trees per cell"),
        "full": (_bool, False, "use the large grid sizes 256,512,1024,2048"),
    },
    "magnus-local": {
        "orders": (_ints, (1, 2), "Magnus orders p"),
        "N": (int, 128, "grid size"),
        "dt": (_floats, (0.8, 0.4, 0.2, 0.1), "step sizes, strictly decreasing"),
        "quad-orders": (_ints, (512, 256), "Gauss-Legendre order per level for Omega_n"),
        "potential": (PotentialSpec.parse, PotentialSpec.half_cos(), "cos, halfcos, zero or constant:<c>"),
        "t-j": (float, 0.0, "start time of the step"),
        "scheme": (str, "nested", "simplex quadrature: nested or triangular"),
        "work-budget": (float, DEFAULT_WORK_BUDGET, "refuse Omega_n evaluations costing more multiply-adds"),
    },
    "magnus-global": {
        "T": (float, 1.0, "final time"),
        "L": (_ints, (4, 8, 16, 32), "numbers of steps"),
        "orders": (_ints, (1, 2), "Magnus orders p"),
        "N": (int, 64, "grid size"),
        "quad-orders": (_ints, (512, 256), "Gauss-Legendre order per level for Omega_n"),
        "potential": (PotentialSpec.parse, PotentialSpec.half_cos(), "cos, halfcos, zero or constant:<c>"),
        "scheme": (str, "nested", "simplex quadrature: nested or triangular"),
        "work-budget": (float, DEFAULT_WORK_BUDGET, "refuse Omega_n evaluations costing more multiply-adds"),
    },
    "verify": {},
}


@dataclass
class CliConfig:
    subcommand: str
    overrides: dict
    out_dir: str
    seed: int = 0
    workers: int = 1
    full: bool = False
    record_timings: bool = False
    settings: dict = field(default_factory=dict)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _keys_for(sub):
    return {**KEYS[sub], **COMMON_KEYS}


def _build_parser():
    parser = _Parser(prog="magnus", description="Interaction-picture Magnus integrator harness.")
    subs = parser.add_subparsers(dest="subcommand", metavar="SUBCOMMAND")
    for sub in KEYS:
        p = subs.add_parser(sub, help=f"run {sub}", description=f"magnus {sub}")
        p.error = parser.error
        for key, (parse, default, text) in _keys_for(sub).items():
            # SUPPRESS keeps flags that were not given out of the namespace,
            # so config-file values are only overridden by explicit flags
            extra = {"nargs": "?", "const": "true"} if parse is _bool else {}
            p.add_argument(f"--{key}", dest=key, default=argparse.SUPPRESS, metavar="VALUE",
                           help=f"{text} (default: {_fmt(default)})", **extra)
        p.add_argument("--config", dest="config", default=argparse.SUPPRESS, metavar="FILE",
                       help="file of 'key = value' lines; explicit flags override it")
        p.add_argument("--out-dir", dest="out_dir", default=argparse.SUPPRESS, metavar="DIR",
                       help=f"output directory (default: $MAGNUS_OUT or {DEFAULT_OUT_DIR})")
    return parser


def read_config_file(path):
    """``key = value`` lines; blank lines and ``#`` comments are ignored."""
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc}") from None
    for num, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{num}: expected 'key = value', got {line!r}")
        out[key.strip().replace("_", "-")] = value.strip()
    return out


def parse_args(argv) -> CliConfig:
    """Parse ``argv`` (without the program name) into a :class:`CliConfig`.

    Raises :class:`ConfigError` on an unknown subcommand, unknown key or
    unparsable value.
    """
    argv = list(argv)
    if not argv or argv[0].startswith("-") and argv[0] not in ("-h", "--help"):
        raise ConfigError(f"expected a subcommand, one of {', '.join(KEYS)}")
    if argv[0] not in KEYS and argv[0] not in ("-h", "--help"):
        raise ConfigError(f"unknown subcommand {argv[0]!r}; expected one of {', '.join(KEYS)}")
    ns = vars(_build_parser().parse_args(argv))
    sub = ns.pop("subcommand")
    keys = _keys_for(sub)
    raw = {}
    if "config" in ns:
        path = ns.pop("config")
        for key, value in read_config_file(path).items():
            if key == "out-dir":
                ns.setdefault("out_dir", value)
                continue
            if key not in keys:
                raise ConfigError(f"unknown key {key!r} in {path} for {sub}")
            raw[key] = value
    out_dir = ns.pop("out_dir", None) or os.environ.get("MAGNUS_OUT") or DEFAULT_OUT_DIR
    raw.update(ns)

    settings = {key: default for key, (_, default, _) in keys.items()}
    for key, text in raw.items():
        parse = keys[key][0]
        try:
            settings[key] = parse(text)
        except ValueError as exc:
            raise ConfigError(f"bad value {text!r} for --{key}: {exc}") from None
    if settings["workers"] < 1:
        raise ConfigError(f"--workers must be >= 1, got {settings['workers']}")
    cfg = CliConfig(
        subcommand=sub,
        overrides=raw,
        out_dir=out_dir,
        seed=settings.pop("seed"),
        workers=settings.pop("workers"),
        full=settings.pop("full", False),
        record_timings=settings.pop("record-timings"),
        settings=settings,
    )
    build_config(cfg)  # surface range errors at parse time
    return cfg


def build_config(cfg: CliConfig):
    """The harness config for ``cfg``; None for ``verify``."""
    s = cfg.settings
    try:
        if cfg.subcommand == "comm-scaling":
            grid = FULL_GRID_SIZES if cfg.full else s["grid-sizes"]
            return CommScalingConfig(
                layers=s["layers"], grid_sizes=grid, h_values=s["h"],
                label_divisors=s["label-divisors"], potential=s["potential"],
                bracketing=s["bracketing"], tree_budget=s["tree-budget"],
                workers=cfg.workers, record_timings=cfg.record_timings,
            )
        if cfg.subcommand == "magnus-local":
            return LocalErrorConfig(
                orders=s["orders"], n_points=s["N"], dt_values=s["dt"],
                quad_orders=s["quad-orders"], potential=s["potential"], t_j=s["t-j"],
                scheme=s["scheme"], work_budget=s["work-budget"],
                workers=cfg.workers, record_timings=cfg.record_timings,
            )
        if cfg.subcommand == "magnus-global":
            return GlobalErrorConfig(
                T=s["T"], L_values=s["L"], orders=s["orders"], n_points=s["N"],
                quad_orders=s["quad-orders"], potential=s["potential"], scheme=s["scheme"],
                work_budget=s["work-budget"], workers=cfg.workers, record_timings=cfg.record_timings,
            )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return None


def comm_cost_estimate(cfg: CommScalingConfig) -> float:
    """Rough floating-point operation count of a left-normed sweep."""
    k = len(cfg.label_divisors)
    products = sum(k**j for j in range(1, cfg.layers + 1))  # stacked products per tuple prefix
    eig = k**cfg.grade
    per_n = [products * 8.0 * n**3 + eig * 10.0 * n**3 for n in cfg.grid_sizes]
    return len(cfg.h_values) * sum(per_n)


def _is_degenerate(potential):
    return potential.kind in ("zero", "constant")


def run(cfg: CliConfig, out=sys.stdout) -> int:
    """Execute a parsed configuration; returns the exit code."""
    try:
        harness_cfg = build_config(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if cfg.subcommand == "verify":
        checks = run_verification_suite(cfg.seed)
        for c in checks:
            print(c.line(), file=out)
        try:
            path = write_verification_report(checks, cfg.out_dir)
        except OSError as exc:
            print(f"error: cannot write report: {exc}", file=sys.stderr)
            return EXIT_IO
        print(f"report: {path}", file=out)
        return EXIT_OK if all(c.passed for c in checks) else EXIT_FAIL

    runner = {
        "comm-scaling": run_comm_scaling,
        "magnus-local": run_local_error,
        "magnus-global": run_global_error,
    }[cfg.subcommand]
    if cfg.subcommand == "comm-scaling" and cfg.full:
        flops = comm_cost_estimate(harness_cfg)
        print(f"--full: about {flops:.2e} flops, roughly {flops / ASSUMED_FLOPS / 60:.0f} min "
              f"at {ASSUMED_FLOPS:.0e} flop/s", file=out)
    try:
        rows = runner(harness_cfg)
    except WorkBudgetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    try:
        paths = emit_results(rows, cfg.out_dir)
    except OSError as exc:
        print(f"error: cannot write results: {exc}", file=sys.stderr)
        return EXIT_IO

    print(slope_table(rows), file=out)
    checks = evaluate_rows(rows, degenerate=_is_degenerate(harness_cfg.potential))
    for c in checks:
        print(c.line(), file=out)
    for p in paths:
        print(f"wrote {p}", file=out)
    return EXIT_OK if all(c.passed for c in checks) else EXIT_FAIL


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_args(argv)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
