"""Convergence theory for the two-grid method on the transformed system.

Everything here works on symbols: approximation constants, the smoothing
bounds, the five-branch bound ``μ(ω)`` and its minimizer, hypothesis checks
with witnesses, and limit estimates across hierarchy levels.  A dense two-grid
iteration matrix is provided for small sizes so the bound can be checked.
"""

from __future__ import annotations

import io
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .saddle import SaddleSystem, hatC_symbol
from .symbol import (
    LimitEstimate,
    SymbolZero,
    TrigPoly,
    Unbounded,
    limit_estimate,
    locate_zero,
    ratio_profile,
    ratio_sup,
    sample_grid,
    sup_norm,
)

WARN_RATIO = 1e3
CHECK_POINTS = 10_000
OMEGA_GRID = 10_000
LIMIT_LO, LIMIT_HI = 1e-8, 1e8


@dataclass(frozen=True)
class Verdict:
    name: str
    passed: bool
    witness: float | None = None
    detail: str = ""
    warning: bool = False
    value: float | None = None


@dataclass
class TheoryReport:
    """Two-grid bound ingredients for one saddle configuration."""

    kappa_A: float
    kappa_C: float
    gamma_A: float
    gamma_C: float
    hatC_a0: float
    omega_interval: tuple[float, float]
    omega_opt: float
    mu_opt: float
    verdicts: list[Verdict] = field(default_factory=list)
    limits: dict[str, float] = field(default_factory=dict)

    @property
    def gamma_tilde(self) -> float:
        return harmonic(self.gamma_A, self.gamma_C)

    @property
    def kappa_tilde(self) -> float:
        return harmonic(self.kappa_A, self.kappa_C)

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    def mu(self, omega):
        return mu_bound(omega, self.kappa_A, self.kappa_C, self.gamma_A, self.gamma_C)

    def as_items(self) -> list[tuple[str, object]]:
        items = [
            ("kappa_A", self.kappa_A), ("kappa_C", self.kappa_C),
            ("kappa_tilde", self.kappa_tilde),
            ("gamma_A", self.gamma_A), ("gamma_C", self.gamma_C),
            ("gamma_tilde", self.gamma_tilde),
            ("hatC_a0", self.hatC_a0),
            ("omega_min", self.omega_interval[0]), ("omega_max", self.omega_interval[1]),
            ("omega_opt", self.omega_opt), ("mu_opt", self.mu_opt),
        ]
        items += [(f"limit_{k}", v) for k, v in self.limits.items()]
        for v in self.verdicts:
            tag = "pass" if v.passed else "fail"
            if v.warning:
                tag += "(warn)"
            items.append((f"check_{v.name}", tag if v.witness is None else f"{tag}@{v.witness:.6g}"))
        return items

    def to_text(self) -> str:
        return "".join(f"{k}={_fmt(v)}\n" for k, v in self.as_items())


def _fmt(v) -> str:
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)


def harmonic(a: float, b: float) -> float:
    return 2 * a * b / (a + b)


def _zeros_of(f: TrigPoly) -> list[SymbolZero]:
    z = locate_zero(f)
    return [z] if z is not None else []


def kappa_bound(f: TrigPoly, p: TrigPoly, zero: SymbolZero | float | None = None) -> float:
    """``2 â₀(f) ‖|p|²(θ+π)/f‖ ‖1/(|p|²(θ) + |p|²(θ+π))‖``.

    ``zero`` defaults to the located zero of ``f`` (none if ``f > 0``).

    Raises
    ------
    Unbounded
        If the first ratio blows up at the zero or ``|p|²(θ) + |p|²(θ+π)``
        vanishes.
    """
    if zero is None:
        zeros = _zeros_of(f)
    else:
        zeros = [zero if isinstance(zero, SymbolZero) else SymbolZero(float(zero))]
    p2 = p.modulus_squared()
    first = ratio_sup(p2.shift_pi(), f, zeros, refine=True)
    s = p2 + p2.shift_pi()
    second = _sup_reciprocal(s)
    return 2 * f.a0.real * first * second


def _sup_reciprocal(s: TrigPoly) -> float:
    grid = sample_grid(2 * np.pi / CHECK_POINTS, full_period=not s.is_even)
    v = s(grid)
    if np.min(v) <= 0:
        i = int(np.argmin(v))
        raise Unbounded("|p|²(θ)+|p|²(θ+π) vanishes", float(grid[i]))
    return ratio_sup(TrigPoly.constant(1.0), s, (), refine=True)


def gamma_bounds(f_A: TrigPoly, f_B: TrigPoly, f_C: TrigPoly, f_hatC: TrigPoly,
                 alpha: float) -> tuple[float, float]:
    """Upper bounds ``(γ̂_A, γ̂_Ĉ)``.

    ``γ̂_A ≤ 1/(2α - α²‖f_A‖/â₀(f_A))`` and
    ``γ̂_Ĉ ≤ ‖f_C + |f_B|²/f_A‖/â₀(f_Ĉ)``.
    """
    a0 = f_A.a0.real
    den = 2 * alpha - alpha**2 * sup_norm(f_A) / a0
    if den <= 0:
        raise ValueError("alpha outside the admissible range")
    num = f_C * f_A + f_B.modulus_squared()
    top = ratio_sup(num, f_A, _zeros_of(f_A), refine=True)
    return 1.0 / den, top / f_hatC.a0.real


def _branches(omega, kA, kC, gA, gC):
    w = np.asarray(omega, dtype=float)
    gt, kt = harmonic(gA, gC), harmonic(kA, kC)
    arg = 1 - w * (2 - w * gt) / kt
    return np.stack([1 - w / kA, 1 - w / kC, w * gA - 1, w * gC - 1,
                     np.sqrt(np.maximum(arg, 0.0))])


def mu_bound(omega, kappa_A: float, kappa_C: float, gamma_A: float, gamma_C: float):
    """Five-branch two-grid bound ``μ(ω)``; accepts scalars or arrays."""
    out = np.max(_branches(omega, kappa_A, kappa_C, gamma_A, gamma_C), axis=0)
    return float(out) if np.ndim(out) == 0 else out


def admissible_interval(gamma_A: float, gamma_C: float) -> tuple[float, float]:
    """``(0, 2/max(γ̂_A, γ̂_Ĉ))``, outside of which ``μ(ω) ≥ 1``."""
    g = max(gamma_A, gamma_C)
    if not (g > 0 and math.isfinite(g)):
        raise ValueError("empty admissible interval")
    return (0.0, 2.0 / g)


def _candidates(kA, kC, gA, gC, lo, hi) -> list[float]:
    gt, kt = harmonic(gA, gC), harmonic(kA, kC)
    out = [lo, hi, 1.0 / gt]
    lines = [(1.0, -1 / kA), (1.0, -1 / kC), (-1.0, gA), (-1.0, gC)]
    for i in range(4):
        a1, b1 = lines[i]
        for a2, b2 in lines[i + 1:]:
            if b1 != b2:
                out.append((a2 - a1) / (b1 - b2))
        # line² = 1 - 2ω/κ̃ + ω²γ̃/κ̃
        qa = b1 * b1 - gt / kt
        qb = 2 * a1 * b1 + 2 / kt
        qc = a1 * a1 - 1
        roots = np.roots([qa, qb, qc]) if qa != 0 else ([-qc / qb] if qb != 0 else [])
        out += [float(r.real) for r in np.atleast_1d(roots) if abs(np.imag(r)) < 1e-14]
    return [w for w in out if lo <= w <= hi]


def omega_opt(kappa_A: float, kappa_C: float, gamma_A: float, gamma_C: float) -> tuple[float, float]:
    """Minimize ``μ`` over the admissible interval.

    Candidates are the sqrt-branch vertex ``1/γ̃``, all pairwise branch
    crossings, the interval ends and a uniform grid.
    """
    lo, hi = admissible_interval(gamma_A, gamma_C)
    cand = _candidates(kappa_A, kappa_C, gamma_A, gamma_C, lo, hi)
    cand = np.concatenate([np.array(cand), np.linspace(lo, hi, OMEGA_GRID)])
    mu = mu_bound(cand, kappa_A, kappa_C, gamma_A, gamma_C)
    i = int(np.argmin(mu))
    return float(cand[i]), float(mu[i])


def mu_curve_csv(kappa_A, kappa_C, gamma_A, gamma_C, points: int = 201) -> str:
    """``omega,mu,branch1..branch5`` over the admissible interval."""
    lo, hi = admissible_interval(gamma_A, gamma_C)
    w = np.linspace(lo, hi, points)
    br = _branches(w, kappa_A, kappa_C, gamma_A, gamma_C)
    mu = br.max(axis=0)
    buf = io.StringIO()
    buf.write("omega,mu,b1,b2,b3,b4,b5\n")
    for j in range(points):
        buf.write(",".join(repr(float(x)) for x in (w[j], mu[j], *br[:, j])) + "\n")
    return buf.getvalue()


# hypothesis checks ------------------------------------------------------


def _positivity(name: str, s: TrigPoly, strict: bool, tol: float = 0.0) -> Verdict:
    grid = np.linspace(0, 2 * np.pi, CHECK_POINTS, endpoint=False)
    v = np.real(s(grid))
    bad = v <= tol if strict else v < -tol
    if np.any(bad):
        i = int(np.argmax(bad))
        return Verdict(name, False, float(grid[i]), f"value {v[i]:.3g}")
    return Verdict(name, True, value=float(np.min(v)))


def _ratio_verdict(name: str, num: TrigPoly, den: TrigPoly, zeros, warn_ratio: float) -> Verdict:
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            prof = ratio_profile(num, den, zeros, step=2 * np.pi / CHECK_POINTS)
    except Unbounded as exc:
        return Verdict(name, False, exc.witness, str(exc))
    warn = prof.value > warn_ratio
    detail = f"sup {prof.value:.6g}" + (" exceeds warning threshold" if warn else "")
    return Verdict(name, True, prof.argmax if warn else None, detail, warn, prof.value)


def check_hypotheses(f_A: TrigPoly, f_B: TrigPoly, f_C: TrigPoly, p_A: TrigPoly,
                     p_C: TrigPoly, alpha: float, omega: float | None,
                     warn_ratio: float = WARN_RATIO) -> list[Verdict]:
    """Evaluate every two-grid / W-cycle hypothesis.

    Returns one :class:`Verdict` per condition; failures carry a witness
    ``θ`` where available.  Condition names:

    ``A_zero``      f_A vanishes at one point θ₀ and is positive elsewhere
    ``C_nonneg``    f_C ≥ 0
    ``B_zero``      |f_B|²(θ₀) = 0
    ``B_over_A``    |f_B|²/f_A bounded
    ``alpha``       0 < α < 2 â₀(f_A)/‖f_A‖
    ``cond1_A``     |p_A|²(θ) + |p_A|²(θ+π) > 0
    ``cond1_C``     same for p_Ĉ
    ``cond2_A``     |p_A|²(θ+π)/f_A bounded near θ₀
    ``cond2_C``     |p_Ĉ|²(θ+π)/f_Ĉ bounded
    ``cond3_omega`` 0 < ω < 2 min(2α - α²‖f_A‖/â₀, â₀(f_Ĉ)/‖f_C + |f_B|²/f_A‖)
    ``joint``       |p_A|²(θ) + |p_Ĉ|²(θ+π) > 0

    ``omega=None`` checks the midpoint of the admissible interval.
    """
    out: list[Verdict] = []
    zA = locate_zero(f_A)
    grid = np.linspace(0, 2 * np.pi, CHECK_POINTS, endpoint=False)
    vA = np.real(f_A(grid))
    scale = float(np.max(np.abs(vA))) or 1.0
    if zA is None:
        out.append(Verdict("A_zero", False, float(grid[np.argmin(vA)]), "f_A has no zero"))
        zerosA: list[SymbolZero] = []
    else:
        far = np.minimum(np.abs(grid - zA.location), 2 * np.pi - np.abs(grid - zA.location)) > 1e-3
        bad = far & (vA <= 1e-14 * scale)
        neg = vA < -1e-14 * scale
        if np.any(bad | neg):
            i = int(np.argmax(bad | neg))
            out.append(Verdict("A_zero", False, float(grid[i]), "f_A not positive away from θ₀"))
        else:
            out.append(Verdict("A_zero", True, value=zA.location))
        zerosA = [zA]
    out.append(_positivity("C_nonneg", f_C, strict=False, tol=1e-14 * max(1.0, sup_norm_any(f_C))))

    fB2 = f_B.modulus_squared()
    if zA is not None:
        b0 = abs(fB2(zA.location))
        ok = b0 <= 1e-12 * max(1.0, sup_norm_any(fB2))
        out.append(Verdict("B_zero", ok, None if ok else zA.location, f"|f_B|²(θ₀)={b0:.3g}"))
    out.append(_ratio_verdict("B_over_A", fB2, f_A, zerosA, math.inf))

    a0 = f_A.a0.real
    normA = sup_norm(f_A)
    upper = 2 * a0 / normA if normA > 0 else 0.0
    out.append(Verdict("alpha", 0 < alpha < upper, detail=f"α={alpha:.6g}, bound {upper:.6g}"))

    pA2, pC2 = p_A.modulus_squared(), p_C.modulus_squared()
    out.append(_positivity("cond1_A", pA2 + pA2.shift_pi(), strict=True))
    out.append(_positivity("cond1_C", pC2 + pC2.shift_pi(), strict=True))
    out.append(_ratio_verdict("cond2_A", pA2.shift_pi(), f_A, zerosA, warn_ratio))
    try:
        f_hatC = hatC_symbol(f_A, f_B, f_C, alpha)
        zC = locate_zero(f_hatC)
        out.append(_ratio_verdict("cond2_C", pC2.shift_pi(), f_hatC, [zC] if zC else [], warn_ratio))
        num = f_C * f_A + fB2
        t1 = 2 * alpha - alpha**2 * normA / a0
        schur = ratio_sup(num, f_A, zerosA)
        if schur <= 0:
            raise ValueError("f_C + |f_B|²/f_A is not positive")
        t2 = f_hatC.a0.real / schur
        bound = 2 * min(t1, t2)
        if omega is None:
            omega = bound / 2
        out.append(Verdict("cond3_omega", 0 < omega < bound, value=bound,
                           detail=f"ω={omega:.6g}, bound {bound:.6g}"))
    except (ValueError, Unbounded) as exc:
        out.append(Verdict("cond3_omega", False, getattr(exc, "witness", None), str(exc)))
    out.append(_positivity("joint", pA2 + pC2.shift_pi(), strict=True))
    return out


def sup_norm_any(p: TrigPoly) -> float:
    grid = np.linspace(0, 2 * np.pi, CHECK_POINTS, endpoint=False)
    return float(np.max(np.abs(p(grid))))


def failed(verdicts: list[Verdict]) -> list[Verdict]:
    return [v for v in verdicts if not v.passed]


# reports ---------------------------------------------------------------


def analyze(f_A: TrigPoly, f_B: TrigPoly, f_C: TrigPoly, p_A: TrigPoly, p_C: TrigPoly,
            alpha: float, omega: float | None = None) -> TheoryReport:
    """Constants, ``ω_opt`` and hypothesis verdicts for one configuration.

    The verdicts are evaluated at ``omega`` (default ``ω_opt``).
    """
    f_hatC = hatC_symbol(f_A, f_B, f_C, alpha)
    kA, kC = (_kappa_or_inf(f, p) for f, p in ((f_A, p_A), (f_hatC, p_C)))
    try:
        gA, gC = gamma_bounds(f_A, f_B, f_C, f_hatC, alpha)
    except (Unbounded, ValueError):
        gA = gC = math.inf
    if all(math.isfinite(v) for v in (kA, kC, gA, gC)):
        w, mu = omega_opt(kA, kC, gA, gC)
        interval = admissible_interval(gA, gC)
    else:
        # no two-grid bound; the verdicts say which hypothesis broke
        w, mu, interval = math.nan, 1.0, (0.0, 0.0)
    w_check = w if omega is None else omega
    verdicts = check_hypotheses(f_A, f_B, f_C, p_A, p_C, alpha,
                                None if math.isnan(w_check) else w_check)
    limits = {}
    zA = locate_zero(f_A)
    if zA is not None:
        limits["B2_over_A"] = limit_estimate(f_B.modulus_squared(), f_A, zA.location).value
        limits["pA_over_A"] = limit_estimate(p_A.modulus_squared().shift_pi(), f_A, zA.location).value
        limits["one_over_hatC"] = limit_estimate(TrigPoly.constant(1.0), f_hatC, zA.location).value
    return TheoryReport(kA, kC, gA, gC, f_hatC.a0.real, interval, w, mu, verdicts, limits)


def _kappa_or_inf(f: TrigPoly, p: TrigPoly) -> float:
    try:
        return kappa_bound(f, p)
    except Unbounded:
        return math.inf


@dataclass(frozen=True)
class LevelRatio:
    level: int
    name: str
    estimate: LimitEstimate
    bounded: bool
    nonzero: bool

    @property
    def ok(self) -> bool:
        return self.bounded and (self.nonzero or self.name == "pA_over_A")


def _level_ratio(level, name, num, den, theta0) -> LevelRatio:
    est = limit_estimate(num, den, theta0)
    tail = est.samples[:, -5:]
    finite = np.all(np.isfinite(tail))
    bounded = finite and not est.diverging and est.stabilized and est.value < LIMIT_HI
    nonzero = bounded and est.value > LIMIT_LO
    return LevelRatio(level, name, est, bounded, nonzero)


def level_independency_check(h) -> list[LevelRatio]:
    """Limits at θ₀ of ``f_A{ℓ}/f_A{ℓ+1}``, ``f_Ĉ{ℓ}/f_Ĉ{ℓ+1}`` and ``|p_A|²(θ+π)/f_A{ℓ}``.

    A ratio is bounded when the dyadic tail stabilizes within 1% and stays
    below 1e8, and nonzero when its limit exceeds 1e-8.
    """
    out = []
    levels = h.levels
    theta0 = 0.0
    z = locate_zero(levels[0].symbols.f_A)
    if z is not None:
        theta0 = z.location
    pA = h.p_A.modulus_squared().shift_pi()
    for lv, nxt in zip(levels[:-1], levels[1:]):
        s, t = lv.symbols, nxt.symbols
        out.append(_level_ratio(lv.index, "A", s.f_A, t.f_A, theta0))
        out.append(_level_ratio(lv.index, "hatC", s.f_hatC, t.f_hatC, theta0))
        out.append(_level_ratio(lv.index, "pA_over_A", pA, s.f_A, theta0))
    return out


# dense two-grid operator ------------------------------------------------


def tgm_matrix(system: SaddleSystem, P_A, P_C, omega: float) -> np.ndarray:
    """Dense ``(I - ωD⁻¹Â)(I - P (P^H Â P)^+ P^H Â)`` for small systems."""
    H = system.hatA_dense()
    n = system.n
    P = np.zeros((2 * n, P_A.k + P_C.k), dtype=np.result_type(P_A.todense(), P_C.todense()))
    P[:n, : P_A.k] = P_A.todense()
    P[n:, P_A.k :] = P_C.todense()
    Hc = P.conj().T @ H @ P
    cgc = np.eye(2 * n) - P @ np.linalg.pinv(Hc, rcond=1e-10) @ P.conj().T @ H
    S = np.eye(2 * n) - omega * (1.0 / system.diag_hatA())[:, None] * H
    return S @ cgc


def kernel_basis(M: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis of the numerical null space of ``M``."""
    u, s, vh = np.linalg.svd(M)
    rank = int(np.sum(s > tol * s[0])) if s.size else 0
    return vh[rank:].conj().T


def quotient_spectral_radius(T: np.ndarray, kernel: np.ndarray) -> float:
    """Spectral radius of ``T`` on the quotient by an invariant subspace.

    ``kernel`` spans a subspace ``N`` with ``T N ⊆ N``; the induced map is
    ``W^H T W`` for an orthonormal basis ``W`` of ``N^⊥``.
    """
    if kernel.size == 0:
        return float(np.max(np.abs(np.linalg.eigvals(T))))
    q, _ = np.linalg.qr(np.hstack([kernel, np.eye(T.shape[0])]))
    W = q[:, kernel.shape[1]:]
    return float(np.max(np.abs(np.linalg.eigvals(W.conj().T @ T @ W))))


def tgm_spectral_radius(system: SaddleSystem, P_A, P_C, omega: float) -> float:
    """Two-grid spectral radius modulo the kernel of ``Â``."""
    T = tgm_matrix(system, P_A, P_C, omega)
    return quotient_spectral_radius(T, kernel_basis(system.hatA_dense()))
