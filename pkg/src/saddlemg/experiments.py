"""Experiment configuration, problem assembly and table presets."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, fields, replace

from .analysis import analyze
from .hierarchy import Hierarchy, HypothesisError, build_hierarchy
from .saddle import SaddleSystem
from .solver import CycleSpec, DivergenceError, SolveReport, solve_sin
from .symbol import TrigPoly

PROBLEMS = ("elasticity-circulant", "elasticity-toeplitz")
POLICIES = ("adaptive", "fixed", "optimal")
PROJECTORS = ("full", "trivial")
SQRT2 = math.sqrt(2.0)


def elasticity_symbols(rho: float) -> tuple[TrigPoly, TrigPoly, TrigPoly]:
    """``f_A = 2 - 2cosθ``, ``f_B = 1 - e^{iθ}``, ``f_C = (2ρ/3)(2 + cosθ)``."""
    f_A = TrigPoly.cos_series(2.0, -2.0)
    f_B = TrigPoly.from_dict({0: 1.0, 1: -1.0})
    f_C = TrigPoly.cos_series(4.0 * rho / 3.0, 2.0 * rho / 3.0)
    return f_A, f_B, f_C


def projector(name: str) -> TrigPoly:
    """``full``: ``√2(1 + cosθ)``; ``trivial``: ``1``."""
    if name == "full":
        return TrigPoly.cos_series(SQRT2, SQRT2)
    if name == "trivial":
        return TrigPoly.constant(1.0)
    raise ValueError(f"unknown projector {name!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: a problem, a size range and a cycle.

    ``omega_policy`` is ``adaptive`` (per-level midpoint rule), ``fixed``
    (``omega`` on every level) or ``optimal`` (``ω_opt`` of the two-grid bound
    on the finest level, adaptive below).
    """

    problem: str = "elasticity-circulant"
    rho: float = 0.5
    t_min: int = 9
    t_max: int = 14
    cycle: str = "W"
    omega_policy: str = "adaptive"
    omega: float | None = None
    projector_c: str = "full"
    projector_a: str = "full"
    eps: float = 1e-6
    max_iter: int = 2000
    output: str | None = None
    check: bool = True

    def __post_init__(self):
        if self.problem not in PROBLEMS:
            raise ValueError(f"problem must be one of {PROBLEMS}")
        if not (4 <= self.t_min <= self.t_max <= 20):
            raise ValueError("need 4 <= t_min <= t_max <= 20")
        if not self.rho > 0:
            raise ValueError("rho must be positive")
        if self.omega_policy not in POLICIES:
            raise ValueError(f"omega_policy must be one of {POLICIES}")
        if self.omega_policy == "fixed" and self.omega is None:
            raise ValueError("fixed policy needs a value for omega")
        for p in (self.projector_c, self.projector_a):
            if p not in PROJECTORS:
                raise ValueError(f"projector must be one of {PROJECTORS}")
        CycleSpec(self.cycle)

    @property
    def circulant(self) -> bool:
        return self.problem == "elasticity-circulant"

    def size(self, t: int) -> int:
        """Block size ``n`` for refinement ``t``."""
        return 2**t if self.circulant else 2**t - 1

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]


def assemble_problem(cfg: ExperimentConfig, t: int | None = None) -> SaddleSystem:
    """Finest saddle system for ``cfg`` at refinement ``t`` (default ``t_min``)."""
    t = cfg.t_min if t is None else t
    if not 2 <= t <= 20:
        raise ValueError(f"invalid refinement level t={t}")
    f_A, f_B, f_C = elasticity_symbols(cfg.rho)
    n = cfg.size(t)
    if cfg.circulant:
        return SaddleSystem.circulant(f_A, f_B, f_C, n)
    return SaddleSystem.toeplitz(f_A, f_B, f_C, n)


def finest_omega_opt(cfg: ExperimentConfig) -> float:
    f_A, f_B, f_C = elasticity_symbols(cfg.rho)
    S = assemble_problem(cfg, cfg.t_min)
    rep = analyze(f_A, f_B, f_C, projector(cfg.projector_a), projector(cfg.projector_c), S.alpha)
    return rep.omega_opt


def cycle_spec(cfg: ExperimentConfig) -> CycleSpec:
    if cfg.omega_policy == "fixed":
        return CycleSpec(cfg.cycle, omega=float(cfg.omega))
    if cfg.omega_policy == "optimal":
        return CycleSpec(cfg.cycle, omega=(finest_omega_opt(cfg),))
    return CycleSpec(cfg.cycle)


def build(cfg: ExperimentConfig, t: int) -> Hierarchy:
    S = assemble_problem(cfg, t)
    spec = cycle_spec(cfg)
    w0 = spec.omega if spec.omega is None or isinstance(spec.omega, float) else spec.omega[0]
    return build_hierarchy(
        S, projector(cfg.projector_a), projector(cfg.projector_c),
        max_levels=2 if cfg.cycle == "TGM" else None,
        check=cfg.check, omega=w0,
    )


def run_one(cfg: ExperimentConfig, t: int) -> tuple[SolveReport, Hierarchy]:
    h = build(cfg, t)
    return solve_sin(h, cycle_spec(cfg), cfg.eps, cfg.max_iter), h


@dataclass(frozen=True)
class Row:
    column: str
    t: int
    N: int
    omega: float
    iterations: int
    converged: bool
    error: str = ""


def run_config(cfg: ExperimentConfig, column: str = "") -> list[Row]:
    rows = []
    for t in range(cfg.t_min, cfg.t_max + 1):
        N = 2 * cfg.size(t)
        try:
            rep, h = run_one(cfg, t)
            w = cycle_spec(cfg).omega_at(h.finest)
            rows.append(Row(column, t, N, w, rep.iterations, rep.converged))
        except DivergenceError as exc:
            it = exc.report.iterations if exc.report else -1
            rows.append(Row(column, t, N, math.nan, it, False, "divergence"))
        except HypothesisError as exc:
            rows.append(Row(column, t, N, math.nan, -1, False, f"hypothesis: {exc.condition}"))
    return rows


def _cfg(**kw) -> ExperimentConfig:
    return ExperimentConfig(**kw)


def presets() -> dict[str, list[tuple[str, ExperimentConfig]]]:
    """Configurations of the five published tables, keyed by preset name."""
    circ = dict(problem="elasticity-circulant", rho=0.5, t_min=9, t_max=14)
    toep = dict(problem="elasticity-toeplitz", rho=0.5, t_min=9, t_max=14)
    t1 = [(f"omega={lab}", _cfg(**circ, cycle="TGM", omega_policy="fixed", omega=w))
          for lab, w in (("1/4", 0.25), ("1/2", 0.5), ("55/96", 55 / 96), ("3/4", 0.75))]
    t2 = [("adaptive", _cfg(**circ, cycle="W")),
          ("omega=1/2", _cfg(**circ, cycle="W", omega_policy="fixed", omega=0.5))]
    t3 = []
    for proj in ("full", "trivial"):
        for lab, rho in (("1/2", 0.5), ("1/20", 0.05), ("1/200", 0.005)):
            base = dict(circ, rho=rho)
            t3.append((f"pC={proj},rho={lab}", _cfg(**base, cycle="W", projector_c=proj)))
    t4 = [("TGM omega=55/96", _cfg(**toep, cycle="TGM", omega_policy="fixed", omega=55 / 96))]
    t5 = [("W adaptive", _cfg(**toep, cycle="W")), ("V adaptive", _cfg(**toep, cycle="V"))]
    return {"table1": t1, "table2": t2, "table3": t3, "table4": t4, "table5": t5}


def run_table(preset: str, t_min: int | None = None, t_max: int | None = None,
              **overrides) -> list[Row]:
    """Run every column of a preset over its ``t`` range."""
    table = presets()
    if preset not in table:
        raise KeyError(f"unknown preset {preset!r}; choose from {sorted(table)}")
    rows = []
    for label, cfg in table[preset]:
        kw = dict(overrides)
        if t_min is not None:
            kw["t_min"] = t_min
        if t_max is not None:
            kw["t_max"] = t_max
        rows += run_config(replace(cfg, **kw), label)
    return rows


def rows_to_csv(rows: list[Row]) -> str:
    """``t,N,omega,iterations,converged,column,error`` in row order."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "N", "omega", "iterations", "converged", "column", "error"])
    for r in rows:
        w.writerow([r.t, r.N, repr(float(r.omega)), r.iterations, int(r.converged), r.column, r.error])
    return buf.getvalue()
