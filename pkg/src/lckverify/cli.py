"""Command-line entry point: ``lckverify {verify,integrate,list-checks,selftest}``.

Exit codes: 0 when every applicable check matches its expected outcome, 1 when
some check does not, 2 on configuration or model-construction errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, field, fields

from .anchors import run_anchors
from .errors import ConfigError, LckError
from .fields import ENGINES
from .models import DEFAULT_A, DEFAULT_AMPLITUDE, MODELS, ModelDescriptor
from .quadrature import QUANTITIES, QuadratureGrid, check_integral_identities
from .report import FORMATS, integral_report, render_integrals, render_suite
from .suite import REGISTRY, run_suite

__all__ = ["RunConfig", "load_config_file", "load_tolerances", "resolve_config", "main"]

EXIT_OK, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


@dataclass
class RunConfig:
    model: str = "hopf"
    n: int = 2
    a: float = DEFAULT_A
    amplitude: float = DEFAULT_AMPLITUDE
    samples: int = 256
    seed: int = 42
    engine: str = "ad"
    fd_step: float = 1e-4
    format: str = "json"
    out: str = ""
    grid_r: int = 64
    grid_ang: int = 16
    quantity: str = "all"
    tolerances: dict = field(default_factory=dict)

    def descriptor(self):
        return ModelDescriptor(self.model, self.n, self.a, self.amplitude)

    def validate(self):
        if self.model not in MODELS:
            raise ConfigError(f"model must be one of {MODELS}")
        if self.engine not in ENGINES:
            raise ConfigError(f"engine must be one of {ENGINES}")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}")
        if self.samples < 1:
            raise ConfigError("samples must be positive")
        if self.quantity != "all" and self.quantity not in QUANTITIES:
            raise ConfigError(f"quantity must be 'all' or one of {sorted(QUANTITIES)}")
        return self


_TYPES = {f.name: f.type for f in fields(RunConfig) if f.name != "tolerances"}
_CASTS = {"int": int, "float": float, "str": str}


def _cast(key, raw):
    try:
        return _CASTS[_TYPES[key]](raw)
    except ValueError:
        raise ConfigError(f"bad value for {key}: {raw!r}") from None


def _key_values(path):
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = (p.strip() for p in line.split("=", 1))
        yield lineno, key, value


def _float_tol(path, lineno, key, value):
    try:
        tol = float(value)
    except ValueError:
        raise ConfigError(f"{path}:{lineno}: tolerance for {key} is not a number") from None
    if not tol > 0:
        raise ConfigError(f"{path}:{lineno}: tolerance for {key} must be positive")
    return tol


def load_config_file(path):
    """Parse a ``key = value`` config file; ``tol.<check id> = x`` lines set tolerance overrides."""
    out, tols = {}, {}
    for lineno, key, value in _key_values(path):
        key = key.replace("-", "_")
        if key.startswith("tol."):
            tols[key[4:]] = _float_tol(path, lineno, key, value)
        elif key in _TYPES:
            out[key] = _cast(key, value)
        else:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
    if tols:
        out["tolerances"] = tols
    return out


def load_tolerances(path):
    """``check id = tolerance`` lines."""
    return {key: _float_tol(path, lineno, key, value) for lineno, key, value in _key_values(path)}


def resolve_config(args):
    """Defaults, then the config file, then explicit flags."""
    merged = asdict(RunConfig())
    if args.config:
        file_values = load_config_file(args.config)
        merged["tolerances"].update(file_values.pop("tolerances", {}))
        merged.update(file_values)
    for key in _TYPES:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    if getattr(args, "tol_overrides", None):
        merged["tolerances"].update(load_tolerances(args.tol_overrides))
    known = {c.id for c in REGISTRY}
    unknown = sorted(set(merged["tolerances"]) - known)
    if unknown:
        raise ConfigError(f"tolerance overrides for unknown checks: {unknown}")
    return RunConfig(**merged).validate()


def _emit(text, out):
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _error(exc):
    payload = {"error": {"type": type(exc).__name__, "message": str(exc)}}
    sys.stderr.write(json.dumps(payload) + "\n")
    return EXIT_ERROR


def cmd_verify(cfg):
    report = run_suite(cfg.descriptor(), engine=cfg.engine, samples=cfg.samples, seed=cfg.seed,
                       tol_overrides=cfg.tolerances, fd_step=cfg.fd_step)
    _emit(render_suite(report, cfg.format), cfg.out)
    return EXIT_OK if report.overall_pass else EXIT_FAIL


def cmd_integrate(cfg):
    grid = QuadratureGrid(cfg.grid_r, cfg.grid_ang, cfg.a)
    quantities = None if cfg.quantity == "all" else [cfg.quantity]
    verdicts = check_integral_identities(cfg.descriptor(), grid, engine=cfg.engine, quantities=quantities)
    if not verdicts:
        raise ConfigError(f"no integral check uses {cfg.quantity!r} on model {cfg.model!r}")
    rep = integral_report(cfg.descriptor().to_dict(), grid, cfg.engine, verdicts)
    _emit(render_integrals(rep, cfg.format), cfg.out)
    return EXIT_OK if rep["overall_pass"] else EXIT_FAIL


def cmd_list_checks(_cfg=None):
    width = max(len(c.id) for c in REGISTRY)
    for c in REGISTRY:
        sys.stdout.write(f"{c.id:<{width}}  {c.paper_anchor}\n")
    return EXIT_OK


def cmd_selftest(_cfg=None):
    ok = True
    for name, dev, tol, passed in run_anchors():
        ok &= passed
        sys.stdout.write(f"{'ok  ' if passed else 'FAIL'}  {name}  (deviation {dev:.2e}, tol {tol:.0e})\n")
    return EXIT_OK if ok else EXIT_FAIL


def _add_run_flags(p, integrate=False):
    p.add_argument("--config", help="key = value config file (flags override it)")
    p.add_argument("--model", choices=MODELS)
    p.add_argument("--n", type=int, help="complex dimension")
    p.add_argument("--a", type=float, help="dilation factor of the Hopf quotient")
    p.add_argument("--amplitude", type=float, help="deformation amplitude")
    p.add_argument("--engine", choices=ENGINES)
    p.add_argument("--format", choices=FORMATS)
    p.add_argument("--out", help="write the report here instead of stdout")
    if integrate:
        p.add_argument("--grid-r", dest="grid_r", type=int)
        p.add_argument("--grid-ang", dest="grid_ang", type=int)
        p.add_argument("--quantity", choices=("all",) + tuple(QUANTITIES))
    else:
        p.add_argument("--samples", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--fd-step", dest="fd_step", type=float)
        p.add_argument("--tol-overrides", dest="tol_overrides", help="file of 'check id = tolerance' lines")


def build_parser():
    parser = argparse.ArgumentParser(prog="lckverify", description="Numerical checks of lcK identities.")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_run_flags(sub.add_parser("verify", help="run the pointwise identity suite"))
    _add_run_flags(sub.add_parser("integrate", help="run the integral checks on the fundamental domain"),
                   integrate=True)
    sub.add_parser("list-checks", help="list registry ids and their formulas")
    sub.add_parser("selftest", help="check sign and normalization conventions")
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_OK
    if args.command == "list-checks":
        return cmd_list_checks()
    if args.command == "selftest":
        return cmd_selftest()
    try:
        cfg = resolve_config(args)
        if args.command == "verify":
            return cmd_verify(cfg)
        return cmd_integrate(cfg)
    except (LckError, KeyError, ValueError, ArithmeticError) as exc:
        return _error(exc)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
