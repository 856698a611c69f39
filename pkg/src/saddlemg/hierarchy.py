"""Multilevel hierarchy for the transformed saddle system.

Coarse blocks follow the Galerkin recursion

    A' = P_A^H A P_A,   B' = P_C^H B (I - α D⁻¹ A) P_A,   C' = P_C^H Ĉ P_C,

so that ``P^H Â P = diag(I, -I) [A' B'^H; B' -C']``.  Circulant levels carry
only symbols; Toeplitz levels keep assembled band matrices and track the
symbols alongside for parameter selection.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field
from typing import Sequence

import scipy.sparse as sp

from .circulant import GridTransfer, circulant_transfer
from .saddle import SaddleSystem, Symbols, hatC_symbol, symbol_alpha
from .symbol import (
    TrigPoly,
    Unbounded,
    enforce_zero,
    galerkin_coarse_symbol,
    locate_zero,
    ratio_sup,
    sup_norm,
)
from .toeplitz import BandMatrix, galerkin_band, tau_transfer

log = logging.getLogger(__name__)

MIN_COARSEN = {"circulant": 8, "toeplitz": 7}
DEFAULT_COARSEST = {"circulant": 4, "toeplitz": 3}
BOUND_FROM_LEVEL = 3


class HypothesisError(RuntimeError):
    """A level violates a convergence hypothesis."""

    def __init__(self, level: int, condition: str, witness: float | None = None, detail: str = ""):
        self.level = level
        self.condition = condition
        self.witness = witness
        msg = f"level {level}: condition {condition} failed"
        if witness is not None:
            msg += f" (witness θ={witness:.6g})"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


@dataclass(eq=False)
class Level:
    """One level of the hierarchy.

    ``P_A`` and ``P_C`` are ``None`` on the coarsest level.
    """

    index: int
    system: SaddleSystem
    omega: float
    P_A: GridTransfer | None = None
    P_C: GridTransfer | None = None

    @property
    def n(self) -> int:
        return self.system.n

    @property
    def alpha(self) -> float:
        return self.system.alpha

    @property
    def symbols(self) -> Symbols | None:
        return self.system.symbols

    def degrees(self) -> tuple[int, int, int]:
        """Degrees ``(z_A, z_B, z_C)`` of the tracked symbols."""
        s = self.system.symbols
        return (s.f_A.degree, s.f_B.degree, s.f_C.degree)

    def bandwidths(self) -> tuple[int, int, int]:
        """Half bandwidths of the assembled blocks (Toeplitz path)."""
        out = []
        for M in (self.system.A, self.system.B, self.system.C):
            b = M.bandwidth if isinstance(M, BandMatrix) else (M.symbol.degree,) * 2
            out.append(max(b))
        return tuple(out)


@dataclass(eq=False)
class Hierarchy:
    levels: list[Level]
    p_A: TrigPoly
    p_C: TrigPoly
    kind: str
    bound_violations: list[str] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.levels)

    def __getitem__(self, i: int) -> Level:
        return self.levels[i]

    @property
    def finest(self) -> Level:
        return self.levels[0]

    @property
    def coarsest(self) -> Level:
        return self.levels[-1]

    @property
    def omegas(self) -> list[float]:
        return [lv.omega for lv in self.levels]

    def dump_csv(self) -> str:
        """CSV with columns ``level,n,alpha,omega,z_A,z_B,z_C``."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["level", "n", "alpha", "omega", "z_A", "z_B", "z_C"])
        for lv in self.levels:
            w.writerow([lv.index, lv.n, repr(lv.alpha), repr(lv.omega), *lv.degrees()])
        return buf.getvalue()


def alpha_level(system: SaddleSystem) -> float:
    """``‖D_A⁻¹ A‖⁻¹`` from the symbol of ``A``.

    Circulant blocks use the maximum over the Fourier grid, Toeplitz blocks
    the sampled sup norm.
    """
    f_A = system.symbols.f_A
    if f_A.is_zero:
        raise ValueError("zero symbol")
    if system.kind == "circulant":
        from .saddle import circulant_alpha

        return circulant_alpha(f_A, system.n)
    return symbol_alpha(f_A)


def omega_terms(f_A: TrigPoly, f_B: TrigPoly, f_C: TrigPoly, f_hatC: TrigPoly,
                alpha: float) -> tuple[float, float]:
    """The two quantities whose minimum is the adaptive relaxation parameter.

    ``2α - α²‖f_A‖/â₀(f_A)`` and ``â₀(f_Ĉ) / ‖f_C + |f_B|²/f_A‖``.
    """
    a0 = f_A.a0.real
    first = 2 * alpha - alpha**2 * sup_norm(f_A) / a0
    z = locate_zero(f_A)
    zeros = [z] if z is not None else []
    num = f_C * f_A + f_B.modulus_squared()
    schur = ratio_sup(num, f_A, zeros)
    if schur <= 0:
        raise ValueError("f_C + |f_B|²/f_A is not positive")
    second = f_hatC.a0.real / schur
    return first, second


def omega_level(system: SaddleSystem) -> float:
    """Midpoint of the admissible relaxation interval for this level."""
    s = system.symbols
    return min(omega_terms(s.f_A, s.f_B, s.f_C, s.f_hatC, system.alpha))


def coarse_symbols(s: Symbols, alpha: float, p_A: TrigPoly, p_C: TrigPoly,
                   theta0: float | None = None) -> tuple[TrigPoly, TrigPoly, TrigPoly]:
    """Coarse ``(f_A, f_B, f_C)``.

    When ``theta0`` (the zero of ``f_A``) is given, rounding residue at
    ``θ0`` is removed from the coarse ``f_A`` and ``f_B``.  Both vanish there
    exactly whenever the fine ones do and ``p_A(θ0 + π) = 0``; without the
    cleanup the residue grows geometrically with the level.
    """
    a0 = s.f_A.a0.real
    f_A = galerkin_coarse_symbol(p_A, s.f_A, p_A)
    f_B = galerkin_coarse_symbol(p_C, s.f_B * (1.0 - (alpha / a0) * s.f_A), p_A)
    f_C = galerkin_coarse_symbol(p_C, s.f_hatC, p_C)
    if theta0 is not None:
        f_A, f_B = enforce_zero(f_A, theta0), enforce_zero(f_B, theta0)
    return f_A, f_B, f_C


def coarsen_level(level: Level, p_A: TrigPoly, p_C: TrigPoly,
                  theta0: float | None = None) -> tuple[Level, Level]:
    """Attach transfers to ``level`` and build the next coarser one.

    Returns the updated fine level and the coarse level (with adaptive ω).
    """
    S = level.system
    if S.n < MIN_COARSEN[S.kind]:
        raise ValueError(f"level of size {S.n} is too small to coarsen")
    f_A, f_B, f_C = coarse_symbols(S.symbols, S.alpha, p_A, p_C, theta0)
    if S.kind == "circulant":
        PA, PC = circulant_transfer(p_A, S.n), circulant_transfer(p_C, S.n)
        coarse = SaddleSystem.circulant(f_A, f_B, f_C, S.n // 2)
    else:
        PA, PC = tau_transfer(p_A, S.n), tau_transfer(p_C, S.n)
        A = galerkin_band(PA, S.A, PA)
        Bs = S.B.tosparse()
        As = S.A.tosparse()
        Dinv = sp.diags(1.0 / S.diag_A)
        mid = sp.identity(S.n, format="csr") - S.alpha * (Dinv @ As)
        B = BandMatrix(PC.tosparse().conj().T @ Bs @ mid @ PA.tosparse())
        C = galerkin_band(PC, S.hatC, PC)
        alpha = symbol_alpha(f_A)
        syms = Symbols(f_A, f_B, f_C, hatC_symbol(f_A, f_B, f_C, alpha))
        coarse = SaddleSystem(A, B, C, alpha, kind="toeplitz", symbols=syms)
    fine = Level(level.index, S, level.omega, PA, PC)
    return fine, Level(level.index + 1, coarse, omega_level(coarse))


def degree_bounds(z0: tuple[int, int, int], q_A: int, q_C: int) -> tuple[int, int, int]:
    """Asymptotic degree bounds for ``(z_A, z_B, z_C)``."""
    zA0, zB0, zC0 = z0
    q = max(q_A, q_C)
    return (max(zA0, 2 * q_A), max(2 * zB0, 4 * q), max(4 * zB0, 6 * q, 2 * zC0))


def check_degree_bounds(h: Hierarchy, start: int = BOUND_FROM_LEVEL) -> list[str]:
    """Return a message for every level ``>= start`` that exceeds the bounds."""
    bounds = degree_bounds(h.finest.degrees(), h.p_A.degree, h.p_C.degree)
    bad = []
    for lv in h.levels:
        z = lv.degrees()
        if lv.index < start:
            log.debug("level %d degrees %s (bounds %s, not enforced)", lv.index, z, bounds)
            continue
        for name, zi, bi in zip("ABC", z, bounds):
            if zi > bi:
                bad.append(f"level {lv.index}: z_{name}={zi} exceeds {bi}")
    return bad


def build_hierarchy(finest: SaddleSystem, p_A: TrigPoly, p_C: TrigPoly,
                    coarsest_size: int | None = None, max_levels: int | None = None,
                    check: bool = True, omega: float | None = None) -> Hierarchy:
    """Coarsen ``finest`` until the block size drops to ``coarsest_size``.

    Parameters
    ----------
    finest : SaddleSystem
        Finest-level system with tracked symbols.
    p_A, p_C : TrigPoly
        Projector symbols for the two blocks.
    coarsest_size : int, optional
        Stop once the block size is at most this (4 circulant, 3 Toeplitz).
    max_levels : int, optional
        Maximum number of levels including the finest.
    check : bool
        Run the hypothesis checks on every level and raise
        :class:`HypothesisError` on the first failure.
    omega : float, optional
        Relaxation value checked on the finest level instead of the adaptive one.
    """
    if finest.symbols is None:
        raise ValueError("finest system must carry symbols")
    kind = finest.kind
    stop = DEFAULT_COARSEST[kind] if coarsest_size is None else coarsest_size
    stop = max(stop, DEFAULT_COARSEST[kind])
    z = locate_zero(finest.symbols.f_A)
    theta0 = None if z is None else z.location
    levels = [Level(0, finest, omega_level(finest))]
    if check:
        _check_level(levels[0], p_A, p_C, omega)
    while levels[-1].n > stop and (max_levels is None or len(levels) < max_levels):
        if levels[-1].n < MIN_COARSEN[kind]:
            break
        fine, coarse = coarsen_level(levels[-1], p_A, p_C, theta0)
        levels[-1] = fine
        levels.append(coarse)
        if check:
            _check_level(coarse, p_A, p_C, None)
    h = Hierarchy(levels, p_A, p_C, kind)
    h.bound_violations = check_degree_bounds(h)
    for msg in h.bound_violations:
        log.warning("degree bound: %s", msg)
    return h


def _check_level(level: Level, p_A: TrigPoly, p_C: TrigPoly, omega: float | None) -> None:
    from .analysis import check_hypotheses

    s = level.system.symbols
    w = level.omega if omega is None else omega
    try:
        verdicts = check_hypotheses(s.f_A, s.f_B, s.f_C, p_A, p_C, level.alpha, w)
    except Unbounded as exc:
        raise HypothesisError(level.index, "ratio", exc.witness, str(exc)) from exc
    for v in verdicts:
        if not v.passed:
            raise HypothesisError(level.index, v.name, v.witness, v.detail)


def level_sizes(n0: int, kind: str, coarsest: int | None = None) -> Sequence[int]:
    stop = DEFAULT_COARSEST[kind] if coarsest is None else coarsest
    sizes = [n0]
    while sizes[-1] > stop and sizes[-1] >= MIN_COARSEN[kind]:
        sizes.append(sizes[-1] // 2 if kind == "circulant" else (sizes[-1] - 1) // 2)
    return sizes
