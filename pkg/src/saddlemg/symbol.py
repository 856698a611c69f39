"""Trigonometric polynomials used as generating symbols of structured blocks.

A symbol ``f(θ) = Σ_j a_j e^{ijθ}`` with ``|j| <= z`` is stored as a dense
coefficient vector over ``[-z, z]``.  Degrees stay small through the whole
multigrid hierarchy, so dense storage is both exact and cheap.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

__all__ = [
    "TrigPoly",
    "SymbolZero",
    "Unbounded",
    "psi_coarsen",
    "galerkin_coarse_symbol",
    "enforce_zero",
    "sample_grid",
    "sup_norm",
    "ratio_sup",
    "ratio_profile",
    "RatioProfile",
    "limit_estimate",
    "zero_order",
    "locate_zero",
]

PRUNE_TOL = 1e-14
REAL_TOL = 1e-13
DEFAULT_STEP = 1.0 / 100

# dyadic approach to a singular point: θ0 ± π 2^-k
DYADIC_K = np.arange(8, 21)
TAIL = 5
TAIL_RTOL = 0.01
BLOWUP = 1e8


class Unbounded(ValueError):
    """A symbol ratio has no finite supremum (non-removable singularity)."""

    def __init__(self, message: str, witness: float | None = None):
        super().__init__(message)
        self.witness = witness


def _as_coeff_array(coeffs) -> np.ndarray:
    c = np.atleast_1d(np.asarray(coeffs, dtype=complex))
    if c.ndim != 1 or c.size % 2 == 0:
        raise ValueError("coefficient vector must be 1-D with odd length 2z+1")
    return c


def _prune(c: np.ndarray) -> np.ndarray:
    scale = np.max(np.abs(c)) if c.size else 0.0
    if scale == 0.0:
        return np.zeros(1, dtype=complex)
    c = np.where(np.abs(c) < PRUNE_TOL * scale, 0.0, c)
    nz = np.flatnonzero(c)
    z = (c.size - 1) // 2
    deg = int(max(abs(nz[0] - z), abs(nz[-1] - z)))
    return c[z - deg : z + deg + 1].copy()


class TrigPoly:
    """Immutable trigonometric polynomial ``Σ_{|j|<=z} a_j e^{ijθ}``.

    Parameters
    ----------
    coeffs : array_like
        Coefficients ordered from index ``-z`` to ``z`` (odd length).

    Coefficients smaller than ``1e-14 * max|a_j|`` are dropped so the stored
    degree is tight after arithmetic.
    """

    __slots__ = ("_c",)

    def __init__(self, coeffs):
        c = _prune(_as_coeff_array(coeffs))
        c.flags.writeable = False
        self._c = c

    # -- constructors -------------------------------------------------------
    @classmethod
    def from_dict(cls, coeffs: Mapping[int, complex]) -> "TrigPoly":
        if not coeffs:
            return cls.zero()
        z = max(abs(int(j)) for j in coeffs)
        c = np.zeros(2 * z + 1, dtype=complex)
        for j, a in coeffs.items():
            c[int(j) + z] += a
        return cls(c)

    @classmethod
    def constant(cls, value: complex) -> "TrigPoly":
        return cls([value])

    @classmethod
    def zero(cls) -> "TrigPoly":
        return cls([0.0])

    @classmethod
    def cos_series(cls, *a: float) -> "TrigPoly":
        """``a[0] + a[1] cos θ + a[2] cos 2θ + ...``"""
        d = {0: a[0]}
        for k, ak in enumerate(a[1:], start=1):
            d[k] = d.get(k, 0) + ak / 2
            d[-k] = d.get(-k, 0) + ak / 2
        return cls.from_dict(d)

    # -- data access --------------------------------------------------------
    @property
    def coeffs(self) -> np.ndarray:
        return self._c

    @property
    def degree(self) -> int:
        return (self._c.size - 1) // 2

    @property
    def indices(self) -> np.ndarray:
        z = self.degree
        return np.arange(-z, z + 1)

    def coefficient(self, j: int) -> complex:
        z = self.degree
        return complex(self._c[j + z]) if abs(j) <= z else 0j

    @property
    def a0(self) -> complex:
        return self.coefficient(0)

    def as_dict(self) -> dict[int, complex]:
        return {int(j): complex(a) for j, a in zip(self.indices, self._c) if a != 0}

    @property
    def is_zero(self) -> bool:
        return not np.any(self._c)

    @property
    def real_symmetric(self) -> bool:
        """True when ``a_{-j} = conj(a_j)``, i.e. the symbol is real valued."""
        tol = REAL_TOL * max(float(np.sum(np.abs(self._c))), 1e-300)
        return bool(np.all(np.abs(self._c[::-1] - self._c.conj()) <= tol))

    @property
    def is_even(self) -> bool:
        """Real valued and even in θ (real, symmetric coefficients)."""
        tol = REAL_TOL * max(float(np.sum(np.abs(self._c))), 1e-300)
        return self.real_symmetric and bool(np.all(np.abs(self._c.imag) <= tol))

    # -- evaluation ---------------------------------------------------------
    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        vals = np.exp(1j * np.multiply.outer(theta, self.indices)) @ self._c
        if self.real_symmetric:
            return vals.real
        return vals

    # -- algebra ------------------------------------------------------------
    def _padded(self, z: int) -> np.ndarray:
        out = np.zeros(2 * z + 1, dtype=complex)
        d = self.degree
        out[z - d : z + d + 1] = self._c
        return out

    def __add__(self, other) -> "TrigPoly":
        if not isinstance(other, TrigPoly):
            other = TrigPoly.constant(other)
        z = max(self.degree, other.degree)
        return TrigPoly(self._padded(z) + other._padded(z))

    __radd__ = __add__

    def __neg__(self) -> "TrigPoly":
        return TrigPoly(-self._c)

    def __sub__(self, other) -> "TrigPoly":
        if not isinstance(other, TrigPoly):
            other = TrigPoly.constant(other)
        return self + (-other)

    def __rsub__(self, other) -> "TrigPoly":
        return (-self) + other

    def __mul__(self, other) -> "TrigPoly":
        if isinstance(other, TrigPoly):
            return TrigPoly(np.convolve(self._c, other._c))
        return TrigPoly(self._c * complex(other))

    __rmul__ = __mul__

    def __truediv__(self, scalar) -> "TrigPoly":
        return TrigPoly(self._c / complex(scalar))

    def conj(self) -> "TrigPoly":
        """Pointwise complex conjugate ``θ -> conj(f(θ))``."""
        return TrigPoly(self._c[::-1].conj())

    def modulus_squared(self) -> "TrigPoly":
        return self.conj() * self

    def shift_pi(self) -> "TrigPoly":
        """The symbol ``θ -> f(θ + π)``."""
        return TrigPoly(self._c * (-1.0) ** self.indices)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TrigPoly):
            return NotImplemented
        return self.degree == other.degree and np.array_equal(self._c, other._c)

    def __hash__(self):
        return hash(self._c.tobytes())

    def allclose(self, other: "TrigPoly", atol: float = 1e-13) -> bool:
        z = max(self.degree, other.degree)
        return bool(np.all(np.abs(self._padded(z) - other._padded(z)) <= atol))

    def __repr__(self) -> str:
        terms = ", ".join(f"{j}: {a:.6g}" for j, a in self.as_dict().items())
        return f"TrigPoly({{{terms}}})"

    # -- text serialization -------------------------------------------------
    def to_text(self) -> str:
        """One line per coefficient: ``j re im``."""
        return "".join(
            f"{j} {a.real:.17g} {a.imag:.17g}\n" for j, a in zip(self.indices, self._c)
        )

    @classmethod
    def from_text(cls, text: str) -> "TrigPoly":
        d: dict[int, complex] = {}
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            j, re, im = line.split()
            d[int(j)] = complex(float(re), float(im))
        return cls.from_dict(d)


@dataclass(frozen=True)
class SymbolZero:
    """A zero of a nonnegative symbol, with its (even) order."""

    location: float = 0.0
    order: int = 2

    def is_grid_point(self, n: int) -> bool:
        k = self.location * n / (2 * np.pi)
        return abs(k - round(k)) < 1e-12


def psi_coarsen(g: TrigPoly) -> TrigPoly:
    """``ψ(g)(θ) = [g(θ/2) + g(θ/2 + π)] / 2``: keep even coefficients, halve indices."""
    return TrigPoly(g.coeffs[g.indices % 2 == 0])


def enforce_zero(f: TrigPoly, theta0: float = 0.0, tol: float = 1e-11) -> TrigPoly:
    """Remove a rounding-level value ``f(θ0)`` so that ``θ0`` is an exact zero.

    The residual is spread over the coefficients in proportion to their
    moduli.  Values larger than ``tol * Σ|a_j|`` are left alone.
    """
    a = f.coeffs
    s = float(np.sum(np.abs(a)))
    phase = np.exp(1j * f.indices * theta0)
    v = complex(np.sum(a * phase))
    if v == 0 or s == 0 or abs(v) > tol * s:
        return f
    c = a - v * np.abs(a) / s * np.conj(phase)
    if f.real_symmetric and theta0 == 0.0:
        c = c.real
    return TrigPoly(c)


def galerkin_coarse_symbol(p1: TrigPoly, f: TrigPoly, p2: TrigPoly) -> TrigPoly:
    """Symbol of ``(C_n(p1) K^T)^H C_n(f) C_n(p2) K^T``, namely ``ψ(conj(p1) f p2)``."""
    return psi_coarsen(p1.conj() * f * p2)


def sample_grid(step: float = DEFAULT_STEP, full_period: bool = False) -> np.ndarray:
    """Uniform samples of ``[0, π]`` (or ``[0, 2π)``) with spacing at most ``step``.

    Both ``0`` and ``π`` are always sample points.
    """
    m = int(math.ceil(np.pi / step - 1e-12))
    if full_period:
        return np.linspace(0.0, 2 * np.pi, 2 * m + 1)[:-1]
    return np.linspace(0.0, np.pi, m + 1)


def sup_norm(p: TrigPoly, step: float = DEFAULT_STEP) -> float:
    """Sampled ``max |p(θ)|``.

    Even symbols are sampled on ``[0, π]``, others on ``[0, 2π)``.  The result
    is exact when the maximum sits at a sample point (0 and π always are) and a
    lower estimate otherwise.
    """
    if not p.real_symmetric:
        raise ValueError("sup_norm expects a real-valued symbol")
    grid = sample_grid(step, full_period=not p.is_even)
    return float(np.max(np.abs(p(grid))))


def _ratio_values(num: TrigPoly, den: TrigPoly, theta: np.ndarray) -> np.ndarray:
    n = num(theta)
    d = den(theta)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = n / d
    if np.iscomplexobj(r):
        r = np.abs(r)
    return r


TAYLOR_ORDER = 40
SNAP_TOL = 1e-12


def _taylor(p: TrigPoly, theta0: float) -> np.ndarray:
    """Taylor coefficients of ``p`` about ``θ0``; rounding-level ones set to zero."""
    j = p.indices.astype(float)
    a = p.coeffs * np.exp(1j * j * theta0)
    m = np.arange(TAYLOR_ORDER + 1)
    fact = np.cumprod(np.r_[1.0, m[1:]])
    powers = (1j * j)[None, :] ** m[:, None]
    c = powers @ a / fact
    scale = np.abs(powers) @ np.abs(a) / fact
    c[np.abs(c) <= SNAP_TOL * np.maximum(scale, 1e-300)] = 0.0
    return c


def _eval_near(p: TrigPoly, theta0: float, h: np.ndarray) -> np.ndarray:
    """``p(θ0 + h)`` for small ``h``, free of cancellation near a zero of ``p``."""
    c = _taylor(p, theta0)
    vals = np.polynomial.polynomial.polyval(h, c)
    return vals.real if p.real_symmetric else vals


def _near_ratio(num: TrigPoly, den: TrigPoly, theta0: float, h: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        r = _eval_near(num, theta0, h) / _eval_near(den, theta0, h)
    return np.abs(r) if np.iscomplexobj(r) else r


def _as_zero(z) -> SymbolZero:
    return z if isinstance(z, SymbolZero) else SymbolZero(float(z))


def _periodic_distance(theta: np.ndarray, theta0: float) -> np.ndarray:
    d = np.mod(theta - theta0, 2 * np.pi)
    return np.minimum(d, 2 * np.pi - d)


@dataclass(frozen=True)
class LimitEstimate:
    """Estimate of ``limsup_{θ->θ0} num/den``.

    ``samples`` holds the ratio at ``θ0 + π 2^-k`` (row 0) and ``θ0 - π 2^-k``
    (row 1), ``k = 8..20``.  ``value`` is the limit read off the leading Taylor
    terms of ``num`` and ``den`` at ``θ0`` when both expansions are
    informative, otherwise the max of the stabilized dyadic tail.
    """

    theta0: float
    samples: np.ndarray
    value: float
    stabilized: bool
    diverging: bool


def _leading(c: np.ndarray) -> int | None:
    nz = np.flatnonzero(c)
    return int(nz[0]) if nz.size else None


def limit_estimate(num: TrigPoly, den: TrigPoly, theta0: float = 0.0,
                   scale: float = 1.0) -> LimitEstimate:
    """Estimate ``limsup_{θ->θ0} num(θ)/den(θ)``.

    The dyadic tail (last five samples) counts as stable when it varies by
    less than 1%, or is negligible relative to ``scale``.  A tail that is not
    stable and either grows monotonically or exceeds ``1e8 * scale`` is flagged
    as diverging, as is a numerator vanishing to lower order than the
    denominator.
    """
    h = np.pi * 2.0 ** (-DYADIC_K.astype(float))
    samples = np.vstack([
        _near_ratio(num, den, theta0, h),
        _near_ratio(num, den, theta0, -h),
    ])
    tails = samples[:, -TAIL:]
    stabilized = True
    diverging = not np.all(np.isfinite(samples))
    for tail, seq in zip(tails, samples):
        if not np.all(np.isfinite(tail)):
            stabilized = False
            continue
        top = np.max(np.abs(tail))
        spread = np.max(tail) - np.min(tail)
        ok = spread <= TAIL_RTOL * top or top <= 1e-8 * max(scale, 1e-300)
        if not ok:
            stabilized = False
            if np.all(np.diff(np.abs(seq[-TAIL:])) > 0) or top > BLOWUP * max(scale, 1e-300):
                diverging = True

    cn, cd = _taylor(num, theta0), _taylor(den, theta0)
    mn, md = _leading(cn), _leading(cd)
    if md is None:
        value = math.inf if mn is not None else math.nan
        diverging = diverging or mn is not None
    elif mn is None or mn > md:
        value = 0.0
    elif mn == md:
        r = cn[mn] / cd[md]
        real = num.real_symmetric and den.real_symmetric
        value = float(np.real(r)) if real else float(abs(r))
    else:
        value = math.inf
        diverging = True
    if math.isnan(value):
        value = float(np.nanmax(tails)) if np.any(np.isfinite(tails)) else math.inf
    return LimitEstimate(theta0, samples, value, stabilized, diverging)


@dataclass(frozen=True)
class RatioProfile:
    value: float
    argmax: float
    limits: tuple[LimitEstimate, ...]
    median: float


def ratio_profile(num: TrigPoly, den: TrigPoly, zeros: Iterable = (),
                  step: float = DEFAULT_STEP, refine: bool = False) -> RatioProfile:
    """Sampled supremum of ``num/den`` together with the near-zero limit data.

    With ``refine`` the best grid sample is polished by a bounded scalar
    search over the two neighbouring grid cells.
    """
    zeros = [_as_zero(z) for z in zeros]
    even = num.is_even and den.is_even and all(z.location == 0.0 for z in zeros)
    grid = sample_grid(step, full_period=not even)
    delta = np.pi * 2.0 ** (-float(DYADIC_K[0]))
    mask = np.ones(grid.size, dtype=bool)
    for z in zeros:
        mask &= _periodic_distance(grid, z.location) >= delta
    theta = grid[mask]
    vals = _ratio_values(num, den, theta)
    if not np.all(np.isfinite(vals)):
        bad = theta[~np.isfinite(vals)][0]
        raise Unbounded(f"ratio is singular at θ={bad:.6g}, not a declared zero", bad)
    median = float(np.median(np.abs(vals))) if vals.size else 1.0
    best = int(np.argmax(vals)) if vals.size else 0
    value = float(vals[best]) if vals.size else -math.inf
    argmax = float(theta[best]) if vals.size else 0.0
    if refine and vals.size:
        argmax, value = _refine_max(num, den, argmax, value, grid[1] - grid[0], zeros)
    limits = []
    for z in zeros:
        est = limit_estimate(num, den, z.location, scale=max(median, abs(value)))
        limits.append(est)
        if est.diverging:
            raise Unbounded(
                f"ratio grows without bound approaching θ0={z.location:.6g}",
                z.location,
            )
        if not est.stabilized:
            warnings.warn(
                f"limit at θ0={z.location:.6g} did not stabilize; using sampled max",
                RuntimeWarning,
                stacklevel=2,
            )
        finite = est.samples[np.isfinite(est.samples)]
        local = max(est.value, float(np.max(finite)) if finite.size else -math.inf)
        if local > value:
            value = local
            argmax = z.location
    return RatioProfile(value, argmax, tuple(limits), median)


def _refine_max(num, den, theta, value, h, zeros):
    from scipy.optimize import minimize_scalar

    delta = np.pi * 2.0 ** (-float(DYADIC_K[0]))

    def neg(t):
        if any(_periodic_distance(np.array([t]), z.location)[0] < delta for z in zeros):
            return -value
        r = _ratio_values(num, den, np.array([t]))[0]
        return -r if np.isfinite(r) else -value

    res = minimize_scalar(neg, bounds=(theta - h, theta + h), method="bounded",
                          options={"xatol": 1e-12})
    if -res.fun > value:
        return float(res.x), float(-res.fun)
    return theta, value


def ratio_sup(num: TrigPoly, den: TrigPoly, zeros: Iterable = (),
              step: float = DEFAULT_STEP, refine: bool = False) -> float:
    """Supremum of ``num/den`` where ``den`` may vanish at the given zeros.

    Grid samples within ``π 2^-8`` of a zero are replaced by the dyadic
    approach ``θ0 ± π 2^-k``, ``k = 8..20``.

    Raises
    ------
    Unbounded
        If the ratio blows up near a zero, or ``den`` vanishes elsewhere.
    """
    return ratio_profile(num, den, zeros, step, refine).value


def zero_order(f: TrigPoly, theta0: float = 0.0) -> float:
    """Order of the zero of ``|f|`` at ``θ0``, from the log-log slope of dyadic samples."""
    k = np.arange(6, 14)
    h = np.pi * 2.0 ** (-k.astype(float))
    v = np.abs(f(theta0 + h)) + np.abs(f(theta0 - h))
    slope = np.polyfit(np.log(h), np.log(v), 1)[0]
    return float(slope)


def locate_zero(f: TrigPoly, samples: int = 10_000) -> SymbolZero | None:
    """Find the zero of a nonnegative symbol, or ``None`` if it has none."""
    grid = np.linspace(0.0, 2 * np.pi, samples, endpoint=False)
    vals = np.abs(f(grid))
    top = float(np.max(vals)) if vals.size else 0.0
    i = int(np.argmin(vals))
    theta0 = float(grid[i])
    if vals[i] > 1e-12 * max(top, 1e-300):
        from scipy.optimize import minimize_scalar

        h = 2 * np.pi / samples
        res = minimize_scalar(lambda t: abs(f(t)), bounds=(theta0 - h, theta0 + h),
                              method="bounded", options={"xatol": 1e-14})
        theta0 = float(np.mod(res.x, 2 * np.pi))
        if abs(f(theta0)) > 1e-12 * max(top, 1e-300):
            return None
    order = zero_order(f, theta0)
    return SymbolZero(theta0, int(round(order)))

