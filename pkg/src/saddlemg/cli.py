"""Command line driver.

Subcommands: ``analyze``, ``solve``, ``table <preset>``, ``curve-mu`` and
``dump-hierarchy``.  Options may also come from a ``key=value`` file passed
with ``--config``; flags given on the command line win.

Exit codes: 0 success, 2 hypothesis failure, 3 divergence.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import fields
from pathlib import Path

from .analysis import analyze, failed, mu_curve_csv
from .experiments import (
    ExperimentConfig,
    assemble_problem,
    build,
    cycle_spec,
    elasticity_symbols,
    presets,
    projector,
    rows_to_csv,
    run_table,
)
from .hierarchy import HypothesisError
from .solver import DivergenceError, solve_sin

EXIT_OK, EXIT_HYPOTHESIS, EXIT_DIVERGENCE = 0, 2, 3

_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}
_ALIASES = {"t": "t_min", "projector": "projector_c", "p_c": "projector_c", "p_a": "projector_a"}


def _convert(key: str, value: str):
    typ = str(_TYPES[key])
    if "bool" in typ:
        return value.strip().lower() in ("1", "true", "yes", "on")
    if "int" in typ:
        return int(value)
    if "float" in typ:
        if value.strip().lower() in ("", "none"):
            return None
        if "/" in value:
            num, den = value.split("/")
            return float(num) / float(den)
        return float(value)
    return value.strip() or None


def read_config(path: str | Path) -> dict:
    """Parse a flat ``key=value`` file; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = _ALIASES.get(key.replace("-", "_"), key.replace("-", "_"))
        if key not in _TYPES:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = _convert(key, value)
    return out


def _fraction(s: str) -> float:
    return _convert("omega", s)


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    d = argparse.SUPPRESS
    p.add_argument("--config", help="key=value configuration file")
    p.add_argument("--problem", choices=("elasticity-circulant", "elasticity-toeplitz"), default=d)
    p.add_argument("--rho", type=_fraction, default=d)
    p.add_argument("--t", dest="t_min", type=int, default=d, help="refinement level (sets t-min)")
    p.add_argument("--t-min", type=int, default=d)
    p.add_argument("--t-max", type=int, default=d)
    p.add_argument("--cycle", choices=("TGM", "V", "W"), default=d)
    p.add_argument("--omega-policy", choices=("adaptive", "fixed", "optimal"), default=d)
    p.add_argument("--omega", type=_fraction, default=d)
    p.add_argument("--projector-c", choices=("full", "trivial"), default=d)
    p.add_argument("--projector-a", choices=("full", "trivial"), default=d)
    p.add_argument("--eps", type=float, default=d)
    p.add_argument("--max-iter", type=int, default=d)
    p.add_argument("--output", "-o", default=d)
    p.add_argument("--no-check", dest="check", action="store_false", default=d)


def _config(args: argparse.Namespace) -> ExperimentConfig:
    kw = read_config(args.config) if getattr(args, "config", None) else {}
    for name in _TYPES:
        if hasattr(args, name):
            kw[name] = getattr(args, name)
    if "omega" in kw and kw["omega"] is not None and "omega_policy" not in kw:
        kw["omega_policy"] = "fixed"
    if "t_min" in kw and "t_max" not in kw:
        kw["t_max"] = max(kw["t_min"], ExperimentConfig.t_max)
    return ExperimentConfig(**kw)


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_analyze(args) -> int:
    cfg = _config(args)
    f_A, f_B, f_C = elasticity_symbols(cfg.rho)
    S = assemble_problem(cfg)
    omega = cfg.omega if cfg.omega_policy == "fixed" else None
    rep = analyze(f_A, f_B, f_C, projector(cfg.projector_a), projector(cfg.projector_c),
                  S.alpha, omega)
    _emit(rep.to_text(), cfg.output)
    bad = failed(rep.verdicts)
    for v in bad:
        print(f"hypothesis {v.name} failed: {v.detail}", file=sys.stderr)
    return EXIT_HYPOTHESIS if bad else EXIT_OK


def cmd_curve_mu(args) -> int:
    cfg = _config(args)
    f_A, f_B, f_C = elasticity_symbols(cfg.rho)
    S = assemble_problem(cfg)
    rep = analyze(f_A, f_B, f_C, projector(cfg.projector_a), projector(cfg.projector_c), S.alpha)
    _emit(mu_curve_csv(rep.kappa_A, rep.kappa_C, rep.gamma_A, rep.gamma_C, args.points), cfg.output)
    return EXIT_OK


def cmd_solve(args) -> int:
    cfg = _config(args)
    h = build(cfg, cfg.t_min)
    rep = solve_sin(h, cycle_spec(cfg), cfg.eps, cfg.max_iter)
    if cfg.output:
        Path(cfg.output).write_text(rep.history_csv())
    print(f"t={cfg.t_min} N={2 * h.finest.n} cycle={cfg.cycle} "
          f"iterations={rep.iterations} converged={rep.converged} "
          f"relres={rep.history[-1] if rep.history else 0.0:.3e}")
    return EXIT_OK


def cmd_table(args) -> int:
    over = {}
    for key in ("eps", "max_iter", "check"):
        if hasattr(args, key):
            over[key] = getattr(args, key)
    rows = run_table(args.preset, getattr(args, "t_min", None), getattr(args, "t_max", None), **over)
    _emit(rows_to_csv(rows), getattr(args, "output", None))
    if any(r.error == "divergence" for r in rows):
        return EXIT_DIVERGENCE
    if any(r.error.startswith("hypothesis") for r in rows):
        return EXIT_HYPOTHESIS
    return EXIT_OK


def cmd_dump_hierarchy(args) -> int:
    cfg = _config(args)
    h = build(cfg, cfg.t_min)
    text = h.dump_csv()
    if args.dump_symbols:
        for lv in h.levels:
            s = lv.symbols
            for name, f in (("f_A", s.f_A), ("f_B", s.f_B), ("f_C", s.f_C), ("f_hatC", s.f_hatC)):
                text += f"# level {lv.index} {name}\n{f.to_text()}"
    _emit(text, cfg.output)
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="saddlemg", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="two-grid bound constants and hypothesis checks")
    _add_config_flags(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("curve-mu", help="μ(ω) over the admissible interval as CSV")
    _add_config_flags(p)
    p.add_argument("--points", type=int, default=201)
    p.set_defaults(func=cmd_curve_mu)

    p = sub.add_parser("solve", help="solve one problem and report iterations")
    _add_config_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("table", help="reproduce a table preset as CSV")
    p.add_argument("preset", choices=sorted(presets()))
    p.add_argument("--t-min", type=int, default=argparse.SUPPRESS)
    p.add_argument("--t-max", type=int, default=argparse.SUPPRESS)
    p.add_argument("--eps", type=float, default=argparse.SUPPRESS)
    p.add_argument("--max-iter", type=int, default=argparse.SUPPRESS)
    p.add_argument("--no-check", dest="check", action="store_false", default=argparse.SUPPRESS)
    p.add_argument("--output", "-o", default=argparse.SUPPRESS)
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("dump-hierarchy", help="per-level parameters as CSV")
    _add_config_flags(p)
    p.add_argument("--dump-symbols", action="store_true", help="append level symbols")
    p.set_defaults(func=cmd_dump_hierarchy)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except HypothesisError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
