"""Two-grid, V- and W-cycle iterations on the transformed saddle system.

A cycle at level ℓ for ``Â_ℓ x = b``:

1. ``r = b - Â_ℓ x`` and ``r_H = [P_A^H r_1; P_C^H r_2]``;
2. the coarse problem is ``𝒜_{ℓ+1} e = [r_H1; -r_H2]``, solved through
   ``Â_{ℓ+1} y = L_{ℓ+1} [r_H1; -r_H2]`` and ``e = U_{ℓ+1} y``, where ``y`` is
   exact on the coarsest level and one (V) or two (W) cycles from zero
   otherwise;
3. ``x += [P_A e_1; P_C e_2]``;
4. one damped Jacobi step with ``ω_ℓ``.

The sign flip in step 2 comes from ``P^H Â_ℓ P = diag(I, -I) 𝒜_{ℓ+1}``.
"""

from __future__ import annotations

import io
import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse.linalg as spla

from .hierarchy import Hierarchy, Level
from .saddle import SaddleSystem, sin_samples

log = logging.getLogger(__name__)

PINV_RTOL = 1e-10
DIVERGENCE = 1e8
DENSE_CACHE = 512
DENSE_SOLVE = 512
KINDS = ("TGM", "V", "W")


class DivergenceError(RuntimeError):
    def __init__(self, message: str, report: "SolveReport | None" = None):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class CycleSpec:
    """Cycle type and smoothing.

    ``omega`` is ``None`` for the per-level adaptive values stored in the
    hierarchy, a number for the same value on every level, or a sequence of
    per-level values (levels beyond its end fall back to adaptive).
    """

    kind: str = "W"
    post_smooth: int = 1
    pre_smooth: int = 0
    omega: float | Sequence[float] | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"cycle kind must be one of {KINDS}")
        if self.post_smooth < 1:
            raise ValueError("at least one post-smoothing step is required")
        if self.pre_smooth < 0:
            raise ValueError("pre_smooth must be nonnegative")

    @property
    def gamma(self) -> int:
        return 2 if self.kind == "W" else 1

    def omega_at(self, level: Level) -> float:
        w = self.omega
        if w is None:
            return level.omega
        if np.isscalar(w):
            return float(w)
        return float(w[level.index]) if level.index < len(w) else level.omega


@dataclass
class SolveReport:
    iterations: int
    history: list[float]
    converged: bool
    x: np.ndarray = field(repr=False, default=None)

    @property
    def contraction(self) -> list[float]:
        """Ratios of consecutive relative residuals (the first against 1)."""
        prev = [1.0] + self.history[:-1]
        return [h / p if p > 0 else 0.0 for h, p in zip(self.history, prev)]

    def history_csv(self) -> str:
        buf = io.StringIO()
        buf.write("iter,relres\n")
        for k, r in enumerate(self.history, 1):
            buf.write(f"{k},{r!r}\n")
        return buf.getvalue()


def _bcast(v: np.ndarray, x: np.ndarray) -> np.ndarray:
    return v.reshape((-1,) + (1,) * (x.ndim - 1))


class CoarseSolver:
    """Minimum-norm solver for ``Â x = b`` on one level.

    Circulant levels invert the 2×2 frequency blocks of ``Â`` by
    pseudo-inverse.  Toeplitz levels use a dense pseudo-inverse up to
    ``DENSE_SOLVE`` unknowns and a sparse LU factorization beyond.
    """

    def __init__(self, S: SaddleSystem):
        self.S = S
        self._dense = None
        self._lu = None
        self._blocks = None
        n = S.n
        if S.kind == "circulant":
            a0 = S.diag_A[0]
            lA = S.A.eigenvalues
            lB = S.B.eigenvalues
            damp = 1.0 - S.alpha * lA / a0
            blk = np.empty((n, 2, 2), dtype=complex)
            blk[:, 0, 0] = lA
            blk[:, 0, 1] = damp * np.conj(lB)
            blk[:, 1, 0] = -lB * damp
            blk[:, 1, 1] = S.hatC.eigenvalues
            self._blocks = np.linalg.pinv(blk, rcond=PINV_RTOL)
        elif 2 * n <= DENSE_SOLVE:
            self._dense = sla.pinv(S.hatA_dense(), rtol=PINV_RTOL)
        else:
            self._lu = spla.splu(S.hatA_sparse().tocsc())

    def solve(self, b: np.ndarray) -> np.ndarray:
        b = np.asarray(b)
        if self._dense is not None:
            return self._dense @ b
        if self._lu is not None:
            return self._lu.solve(b)
        n = self.S.n
        f1 = np.fft.fft(b[:n], axis=0)
        f2 = np.fft.fft(b[n:], axis=0)
        M = self._blocks
        y1 = _bcast(M[:, 0, 0], f1) * f1 + _bcast(M[:, 0, 1], f2) * f2
        y2 = _bcast(M[:, 1, 0], f1) * f1 + _bcast(M[:, 1, 1], f2) * f2
        x = np.concatenate([np.fft.ifft(y1, axis=0), np.fft.ifft(y2, axis=0)])
        return x.real if not np.iscomplexobj(b) and self._real_system() else x

    def _real_system(self) -> bool:
        S = self.S
        return all(np.isrealobj(op.column) for op in (S.A, S.B, S.C))


def coarsest_solve(S: SaddleSystem, b: np.ndarray) -> np.ndarray:
    """Minimum-norm solution of ``Â x = b``."""
    return CoarseSolver(S).solve(b)


class Cycler:
    """Per-solve state: coarse factorizations and dense maps for small levels.

    Nothing here is shared between solves, so one :class:`Hierarchy` can
    serve several solves at once.
    """

    def __init__(self, h: Hierarchy, spec: CycleSpec, dense_cache: int = DENSE_CACHE):
        if spec.kind == "TGM" and len(h) != 2:
            raise ValueError("a two-grid cycle needs a two-level hierarchy")
        self.h = h
        self.spec = spec
        self.omegas = [spec.omega_at(lv) for lv in h.levels]
        self._coarse = CoarseSolver(h.coarsest.system)
        self._maps: dict[int, np.ndarray] = {}
        for lv in reversed(h.levels[1:-1]):
            if 2 * lv.n <= dense_cache:
                eye = np.eye(2 * lv.n)
                self._maps[lv.index] = self._inner(lv.index, eye)

    def _inner(self, l: int, b: np.ndarray) -> np.ndarray:
        """Approximate ``Â_l^{-1} b``: exact on the coarsest level, else γ cycles from zero."""
        if l in self._maps:
            return self._maps[l] @ b
        if l == len(self.h) - 1:
            return self._coarse.solve(b)
        y = self.cycle(l, np.zeros_like(b), b)
        for _ in range(self.spec.gamma - 1):
            y = self.cycle(l, y, b)
        return y

    def cycle(self, l: int, x: np.ndarray, b: np.ndarray) -> np.ndarray:
        """One cycle on level ``l`` starting from ``x``."""
        lv = self.h.levels[l]
        S = lv.system
        w = self.omegas[l]
        for _ in range(self.spec.pre_smooth):
            x = S.jacobi_post_smooth(x, b, w)
        n = S.n
        r = b - S.apply_hatA(x)
        rH1 = lv.P_A.restrict(r[:n])
        rH2 = lv.P_C.restrict(r[n:])
        nxt = self.h.levels[l + 1].system
        rhs = nxt.apply_L(np.concatenate([rH1, -rH2]))
        e = nxt.apply_U(self._inner(l + 1, rhs))
        k = nxt.n
        x = x + np.concatenate([lv.P_A.prolong(e[:k]), lv.P_C.prolong(e[k:])])
        for _ in range(self.spec.post_smooth):
            x = S.jacobi_post_smooth(x, b, w)
        return x


def cycle(h: Hierarchy, level: int, x: np.ndarray, b: np.ndarray, spec: CycleSpec) -> np.ndarray:
    """One cycle at ``level``; builds fresh per-call state."""
    return Cycler(h, spec).cycle(level, np.asarray(x), np.asarray(b))


def solve(h: Hierarchy, b: np.ndarray, spec: CycleSpec, eps: float = 1e-6,
          max_iter: int = 2000, x0: np.ndarray | None = None) -> SolveReport:
    """Iterate cycles from ``x0`` (zero) until ``‖r‖/‖b‖ < eps``.

    Raises
    ------
    DivergenceError
        When the relative residual exceeds 1e8 or becomes non-finite.
    """
    b = np.asarray(b)
    S = h.finest.system
    x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=np.result_type(b, x0))
    nb = np.linalg.norm(b)
    history: list[float] = []
    if nb == 0:
        return SolveReport(0, history, True, np.zeros_like(b))
    cyc = Cycler(h, spec)
    rel = np.linalg.norm(b - S.apply_hatA(x)) / nb
    if rel < eps:
        return SolveReport(0, history, True, x)
    for k in range(1, max_iter + 1):
        x = cyc.cycle(0, x, b)
        rel = float(np.linalg.norm(b - S.apply_hatA(x)) / nb)
        history.append(rel)
        if not np.isfinite(rel) or rel > DIVERGENCE:
            rep = SolveReport(k, history, False, x)
            raise DivergenceError(f"relative residual {rel:.3g} at iteration {k}", rep)
        if rel < eps:
            return SolveReport(k, history, True, x)
    log.info("no convergence after %d iterations (relres %.3g)", max_iter, rel)
    return SolveReport(max_iter, history, False, x)


def solve_sin(h: Hierarchy, spec: CycleSpec, eps: float = 1e-6, max_iter: int = 2000) -> SolveReport:
    """Solve with the right-hand side built from sampled ``sin`` on ``[0, π]``."""
    S = h.finest.system
    return solve(h, S.build_rhs(sin_samples(S.n)), spec, eps, max_iter)
