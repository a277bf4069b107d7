"""Experiment runner: ``ergolab <command> --config run.json --out results/``.

Commands map one-to-one onto library modules:

========== =================================================================
simulate   roth_average, scalar_multicorrelation, l2_multicorrelation_defect
certify    positivity_certificate, syndetic_return_bound
spectrum   kronecker_projector, weak_mixing_defect
joinings   empirical_joining_3, empirical_joining_6, invariance_defect,
           product_splitting_defect
aps        count_3aps, cyclic_roth_average
verify     acceptance suites (exactness, weak-mixing, certificate,
           correspondence, bootstrap, all)
========== =================================================================

A config is a JSON object::

    {"operation": "roth_average",
     "system": {"kind": "rotation", "alpha": "golden"},
     "set": [["0", "1/4"]],
     "schedule": {"dyadic": [7, 14]}}

Exit codes: 0 success, 2 config error, 3 numerical guard (horizon or cost
cap), 4 verification failure.  Failures write ``error.json`` naming the
offending field.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path

import numpy as np

from . import averages, correspondence, joinings, spectral
from . import verify as acceptance
from .errors import (
    ClassMismatchError,
    CostGuardError,
    DomainError,
    ErgolabError,
    HorizonError,
    UnsupportedError,
    VerificationError,
)
from .measure_algebra import IntervalSet, StepFunction, as_rational, observable_from_json, rational_pair
from .systems import chacon_stage, system_from_json

EXIT_OK, EXIT_CONFIG, EXIT_GUARD, EXIT_VERIFY = 0, 2, 3, 4

OPERATIONS = {
    "simulate": ("roth_average", "scalar_multicorrelation", "l2_multicorrelation_defect"),
    "certify": ("positivity_certificate", "syndetic_return_bound"),
    "spectrum": ("kronecker_projector", "weak_mixing_defect"),
    "joinings": ("empirical_joining_3", "empirical_joining_6", "invariance_defect", "product_splitting_defect"),
    "aps": ("count_3aps", "cyclic_roth_average"),
}


def tool_version() -> str:
    try:
        return version("ergolab")
    except PackageNotFoundError:
        return "0+unknown"


class ConfigError(ErgolabError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name
        self.message = message


@dataclass
class ExperimentConfig:
    operation: str
    system: dict | None = None
    set: list | dict | None = None
    observables: list = field(default_factory=list)
    schedule: list | dict | None = None
    params: dict = field(default_factory=dict)
    density_set: dict | str | None = None
    seed: int = 0
    outputs: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("<root>", "config must be a JSON object")
        known = set(cls.__dataclass_fields__)
        extra = sorted(set(data) - known)
        if extra:
            raise ConfigError(extra[0], "unknown config field")
        if "operation" not in data:
            raise ConfigError("operation", "missing")
        cfg = cls(**data)
        if not isinstance(cfg.seed, int) or isinstance(cfg.seed, bool) or not 0 <= cfg.seed < 2 ** 64:
            raise ConfigError("seed", "must be an unsigned 64-bit integer")
        if not isinstance(cfg.params, dict):
            raise ConfigError("params", "must be an object")
        if not isinstance(cfg.observables, list):
            raise ConfigError("observables", "must be a list")
        return cfg

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def loads(cls, text: str) -> "ExperimentConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError("<root>", f"invalid JSON: {exc}") from None
        return cls.from_dict(data)

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


# --------------------------------------------------------------------------
# Config field parsing
# --------------------------------------------------------------------------


def _field(name, fn, *args):
    try:
        return fn(*args)
    except ConfigError:
        raise
    except (DomainError, KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise ConfigError(name, str(exc) or type(exc).__name__) from None


def _system(cfg):
    if cfg.system is None:
        raise ConfigError("system", "missing")
    return _field("system", system_from_json, cfg.system)


def _interval_set(cfg) -> IntervalSet:
    if cfg.set is None:
        raise ConfigError("set", "missing")
    raw = cfg.set["intervals"] if isinstance(cfg.set, dict) else cfg.set
    if not isinstance(raw, list):
        raise ConfigError("set", "expected a list of [lo, hi] pairs")
    for k, item in enumerate(raw):
        if not isinstance(item, (list, tuple)) or len(item) != 2:
            raise ConfigError(f"set[{k}]", "expected [lo, hi]")
        lo, hi = (_field(f"set[{k}]", as_rational, v) for v in item)
        if lo > hi:
            raise ConfigError(f"set[{k}]", f"lo={lo} exceeds hi={hi}")
        if lo < 0 or hi > 1:
            raise ConfigError(f"set[{k}]", f"endpoints [{lo}, {hi}) outside [0, 1]")
    return IntervalSet.from_json(raw)


def _levels_observable(data: dict) -> StepFunction:
    """``{"kind": "levels", "stage": s, "terminal": n, "weights": {"level": value}}``."""
    st = chacon_stage(int(data["stage"]), terminal=int(data["terminal"]))
    f = StepFunction.constant(0)
    for level, w in sorted(data["weights"].items(), key=lambda kv: int(kv[0])):
        f = f + StepFunction.indicator(st.level_set([int(level)])) * as_rational(w)
    return f


def _observable(data, name):
    if not isinstance(data, dict):
        raise ConfigError(name, "observable must be an object")
    if data.get("kind") == "levels":
        return _field(name, _levels_observable, data)
    return _field(name, observable_from_json, data)


def _observables(cfg, count=None):
    fs = [_observable(d, f"observables[{k}]") for k, d in enumerate(cfg.observables)]
    if count is not None and len(fs) != count:
        raise ConfigError("observables", f"expected {count} observables, got {len(fs)}")
    if not fs:
        raise ConfigError("observables", "missing")
    return fs


def _schedule(cfg):
    s = cfg.schedule
    if s is None:
        return averages.DEFAULT_SCHEDULE
    if isinstance(s, dict):
        if set(s) != {"dyadic"} or len(s["dyadic"]) != 2:
            raise ConfigError("schedule", 'expected {"dyadic": [lo, hi]} or a checkpoint list')
        return _field("schedule", averages._schedule, averages.dyadic(*(int(v) for v in s["dyadic"])))
    if not isinstance(s, list):
        raise ConfigError("schedule", "expected a checkpoint list")
    return _field("schedule", averages._schedule, s)


def _param(cfg, key, conv=None, default=None):
    if key not in cfg.params:
        if default is None:
            raise ConfigError(f"params.{key}", "missing")
        return default
    v = cfg.params[key]
    return _field(f"params.{key}", conv, v) if conv else v


def _int_param(v):
    if isinstance(v, bool) or not isinstance(v, int) or v < 1:
        raise DomainError(f"expected a positive integer, got {v!r}")
    return v


def _density_set(cfg):
    if cfg.density_set is not None:
        return _field("density_set", correspondence.DensitySet.from_json, cfg.density_set)
    n = _param(cfg, "modulus", _int_param)
    dens = _param(cfg, "density", float)
    if not 0 <= dens <= 1:
        raise ConfigError("params.density", "must lie in [0, 1]")
    return correspondence.DensitySet.random(n, dens, np.random.default_rng(cfg.seed))


# --------------------------------------------------------------------------
# Writers
# --------------------------------------------------------------------------


def _value_json(v):
    if isinstance(v, Fraction):
        return rational_pair(v)
    return joinings._value_json(v)


def _write(out: Path, name: str, text: str) -> str:
    (out / name).write_text(text)
    return name


def _write_json(out: Path, name: str, data) -> str:
    return _write(out, name, json.dumps(data, indent=2, sort_keys=True) + "\n")


def _series_outputs(out, series) -> list[str]:
    summary = {"descriptor": series.descriptor, "exact": series.exact,
               "checkpoints": list(series.checkpoints),
               "values": [_value_json(v) for v in series.values]}
    if series.squares:
        summary["squares"] = [rational_pair(s) if isinstance(s, Fraction) else s for s in series.squares]
    return [_write(out, "series.csv", series.to_csv()), _write(out, "series.plot", series.to_plot_data()),
            _write_json(out, "summary.json", summary)]


# --------------------------------------------------------------------------
# Operations
# --------------------------------------------------------------------------


def _run_operation(cfg: ExperimentConfig, command: str, out: Path, workers: int, stages: list) -> list[str]:
    op = cfg.operation
    if op not in OPERATIONS[command]:
        raise ConfigError("operation", f"{command} runs one of {', '.join(OPERATIONS[command])}; got {op!r}")

    def stage(name, fn, *args, **kwargs):
        t = time.perf_counter()
        result = fn(*args, **kwargs)
        stages.append({"stage": name, "seconds": round(time.perf_counter() - t, 6)})
        return result

    if op == "roth_average":
        series = stage(op, averages.roth_average, _system(cfg), _interval_set(cfg), _schedule(cfg),
                       workers=workers)
        return _series_outputs(out, series)
    if op in ("scalar_multicorrelation", "l2_multicorrelation_defect"):
        fn = getattr(averages, op)
        series = stage(op, fn, _system(cfg), _observables(cfg), _schedule(cfg), workers=workers)
        return _series_outputs(out, series)
    if op == "positivity_certificate":
        cert = stage(op, averages.positivity_certificate, _system(cfg), _interval_set(cfg),
                     _param(cfg, "epsilon", as_rational))
        return [_write_json(out, "certificate.json", cert.to_json())]
    if op == "syndetic_return_bound":
        rb = stage(op, spectral.syndetic_return_bound, _param(cfg, "alpha", _alpha),
                   _param(cfg, "delta", as_rational), method=_param(cfg, "method", str, "continued-fraction"))
        return [_write_json(out, "return_bound.json", rb.to_json())]
    if op == "kronecker_projector":
        proj = stage(op, spectral.kronecker_projector, _system(cfg),
                     _param(cfg, "cutoff", _int_param, spectral.DEFAULT_CUTOFF),
                     _param(cfg, "tolerance", float, spectral.UNIT_TOL))
        summary = {"rank": proj.rank, "kind": proj.kind, "size": len(proj.basis),
                   "idempotence_error": proj.idempotence_error(),
                   "adjointness_error": proj.adjointness_error(),
                   "fixed_point_error": proj.fixed_point_error()}
        return [_write(out, "eigenvalues.csv", proj.eigen_csv()), _write_json(out, "projector.json", summary)]
    if op == "weak_mixing_defect":
        f, g = _observables(cfg, 2)
        series = stage(op, spectral.weak_mixing_defect, _system(cfg), f, g, _schedule(cfg))
        return _series_outputs(out, series)
    if op in ("empirical_joining_3", "empirical_joining_6"):
        n = _param(cfg, "N", _int_param)
        fs = _observables(cfg, 3 if op.endswith("3") else 6)
        est = stage(op, getattr(joinings, op), _system(cfg), *fs, n)
        return [_write_json(out, "joining.json", est.to_json())]
    if op == "invariance_defect":
        n = _param(cfg, "N", _int_param)
        pattern = _param(cfg, "pattern", str)
        fs = _observables(cfg)
        d = stage(op, _field, "params.pattern", joinings.invariance_defect, _system(cfg), fs, n, pattern)
        bound = joinings.defect_bound(fs, n)
        return [_write_json(out, "defect.json", {"pattern": pattern, "N": n, "defect": _value_json(d),
                                                 "defect_float": float(d), "bound": rational_pair(bound),
                                                 "within_bound": joinings.within_bound(d, bound)})]
    if op == "product_splitting_defect":
        n = _param(cfg, "N", _int_param)
        d = stage(op, joinings.product_splitting_defect, _system(cfg), *_observables(cfg, 3), n)
        return [_write_json(out, "defect.json", {"N": n, "defect": _value_json(d), "defect_float": float(d)})]
    # aps
    s = _density_set(cfg)
    line = stage("count_3aps", correspondence.count_3aps, s, "integer-line")
    cyc = stage("count_3aps_cyclic", correspondence.count_3aps, s, "cyclic")
    files = [_write(out, "density_set.txt", s.bits + "\n")]
    rows = ["modulus,size,count_integer_line,count_cyclic", f"{s.modulus},{s.size},{line},{cyc}"]
    summary = {"density_set": s.to_json(), "density": rational_pair(s.density),
               "count_integer_line": line, "count_cyclic": cyc}
    if op == "cyclic_roth_average":
        avg = stage(op, correspondence.cyclic_roth_average, s)
        summary["cyclic_roth_average"] = rational_pair(avg)
        summary["identity_holds"] = avg * s.modulus ** 2 == cyc + s.size
    files.append(_write(out, "counts.csv", "\n".join(rows) + "\n"))
    files.append(_write_json(out, "summary.json", summary))
    return files


def _alpha(v):
    if v == "golden":
        from .systems import golden_approximant

        return golden_approximant()
    return as_rational(v)


# --------------------------------------------------------------------------
# Entry point
# --------------------------------------------------------------------------


def _error_record(kind: str, exc: Exception, field_name: str | None = None) -> dict:
    return {"error": kind, "type": type(exc).__name__, "field": field_name, "message": str(exc)}


def _emit_error(out: Path | None, record: dict) -> None:
    text = json.dumps(record, sort_keys=True)
    print(text, file=sys.stderr)
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        (out / "error.json").write_text(text + "\n")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ergolab", description="Exact multiple-recurrence experiments.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=Path, default=None, help="output directory (default: ./ergolab-out)")
    common.add_argument("--workers", type=int, default=None,
                        help="worker processes for i-sweeps (default: $ERGOLAB_WORKERS or 1)")
    common.add_argument("--seed", type=int, default=None, help="seed for randomized inputs (u64)")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in OPERATIONS:
        p = sub.add_parser(name, parents=[common], help=", ".join(OPERATIONS[name]))
        p.add_argument("--config", type=Path, required=True, help="JSON experiment config")
    p = sub.add_parser("verify", parents=[common], help="run an acceptance suite")
    p.add_argument("suite", choices=acceptance.SUITE_NAMES)
    return parser


def verify(suite: str, out: Path | None = None, seed: int = 0) -> int:
    """Run an acceptance suite, print per-check results and return the exit status."""
    reports = acceptance.run_suite(suite, seed)
    for r in reports:
        print(r.line())
        for c in r.checks:
            print(f"  [{'ok' if c.passed else 'FAIL'}] {c.name}" + (f": {c.measured}" if c.measured else ""))
    ok = all(r.passed for r in reports)
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        _write_json(out, "verify.json", {"suite": suite, "seed": seed, "passed": ok, "version": tool_version(),
                                         "criteria": [r.to_json() for r in reports]})
    if not ok:
        failed = [f"criterion {r.number}: {c.name}" for r in reports for c in r.checks if not c.passed]
        _emit_error(out, {"error": "verification", "type": "VerificationError", "field": None,
                          "message": "; ".join(failed)})
        return EXIT_VERIFY
    return EXIT_OK


def command_for(operation: str) -> str:
    for command, ops in OPERATIONS.items():
        if operation in ops:
            return command
    raise ConfigError("operation", f"unknown operation {operation!r}")


def run(config: ExperimentConfig, out: Path, *, command: str | None = None, workers: int = 1) -> int:
    """Execute one experiment, writing its artifacts and manifest into ``out``.

    Returns the process exit status; failures also leave ``error.json`` in ``out``.
    """
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        command = command or command_for(config.operation)
        stages: list = []
        start = time.perf_counter()
        files = _run_operation(config, command, out, workers, stages)
    except ConfigError as exc:
        _emit_error(out, _error_record("config", exc, exc.field))
        return EXIT_CONFIG
    except (HorizonError, CostGuardError) as exc:
        _emit_error(out, _error_record("numerical-guard", exc))
        return EXIT_GUARD
    except VerificationError as exc:
        _emit_error(out, _error_record("verification", exc))
        return EXIT_VERIFY
    except (DomainError, ClassMismatchError, UnsupportedError) as exc:
        _emit_error(out, _error_record("config", exc))
        return EXIT_CONFIG
    manifest = {"tool": "ergolab", "version": tool_version(), "command": command,
                "config": config.to_dict(), "workers": workers, "files": files, "stages": stages,
                "wall_clock_seconds": round(time.perf_counter() - start, 6)}
    _write_json(out, "manifest.json", manifest)
    print(f"wrote {', '.join(files)} and manifest.json to {out}")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = args.out or Path("ergolab-out")
    if args.seed is not None and not 0 <= args.seed < 2 ** 64:
        _emit_error(out, {"error": "config", "type": "ConfigError", "field": "--seed",
                          "message": "seed must be an unsigned 64-bit integer"})
        return EXIT_CONFIG
    workers = args.workers if args.workers is not None else averages.default_workers()
    if workers < 1:
        _emit_error(out, {"error": "config", "type": "ConfigError", "field": "--workers",
                          "message": "worker count must be positive"})
        return EXIT_CONFIG
    if args.command == "verify":
        return verify(args.suite, out, args.seed or 0)
    try:
        try:
            cfg = ExperimentConfig.loads(args.config.read_text())
        except OSError as exc:
            raise ConfigError("--config", str(exc)) from None
    except ConfigError as exc:
        _emit_error(out, _error_record("config", exc, exc.field))
        return EXIT_CONFIG
    if args.seed is not None:
        cfg.seed = args.seed
    return run(cfg, out, command=args.command, workers=workers)


if __name__ == "__main__":
    sys.exit(main())
