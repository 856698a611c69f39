"""Block saddle-point systems and their L·𝒜·U transformation.

For ``𝒜 = [A  B^H; B  -C]`` and ``D = diag(A)`` the transformed operator is
``Â = L 𝒜 U`` with ``L = [I 0; αBD⁻¹ -I]`` and ``U = [I -αD⁻¹B^H; 0 I]``.
Its diagonal blocks are ``A`` and ``Ĉ = C + B(2αD⁻¹ - α²D⁻¹AD⁻¹)B^H``, both
positive definite for admissible ``α``, so plain damped Jacobi smooths it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .circulant import CirculantOp
from .symbol import TrigPoly
from .toeplitz import BandMatrix, ToeplitzOp


def hatC_symbol(f_A: TrigPoly, f_B: TrigPoly, f_C: TrigPoly, alpha: float) -> TrigPoly:
    """Symbol of ``Ĉ``: ``f_C + α|f_B|²/â₀ (2 - α f_A/â₀)`` with ``â₀ = â₀(f_A)``."""
    a0 = f_A.a0.real
    if a0 == 0:
        raise ValueError("f_A has zero mean coefficient")
    g = (2.0 - (alpha / a0) * f_A) * (alpha / a0)
    return f_C + f_B.modulus_squared() * g


def circulant_alpha(f_A: TrigPoly, n: int) -> float:
    """``â₀(f_A) / max_j f_A(θ_j)`` over the ``n``-point Fourier grid."""
    top = float(np.max(np.abs(f_A(2 * np.pi * np.arange(n) / n))))
    if top == 0:
        raise ValueError("zero symbol")
    return f_A.a0.real / top


def symbol_alpha(f_A: TrigPoly) -> float:
    """``â₀(f_A) / ‖f_A‖_∞`` with the sampled sup norm."""
    from .symbol import sup_norm

    top = sup_norm(f_A)
    if top == 0:
        raise ValueError("zero symbol")
    return f_A.a0.real / top


def sin_samples(n: int) -> np.ndarray:
    """``sin`` at ``2n`` equispaced points of ``[0, π]``, endpoints included."""
    return np.sin(np.linspace(0.0, np.pi, 2 * n))


@dataclass(frozen=True)
class Symbols:
    f_A: TrigPoly
    f_B: TrigPoly
    f_C: TrigPoly
    f_hatC: TrigPoly


@dataclass(eq=False)
class SaddleSystem:
    """``[A B^H; B -C]`` together with its transformed operator ``Â``.

    Build with :meth:`circulant` or :meth:`from_blocks`.  Instances are not
    modified after construction.

    Attributes
    ----------
    A, B, C : operator
        Blocks exposing ``matvec``, ``rmatvec``, ``diagonal`` and ``tosparse``.
    hatC : operator
        The transformed (2,2) block.
    alpha : float
        Transformation parameter.
    diag_A, diag_hatC : ndarray
        Diagonals used by ``D⁻¹`` and the Jacobi smoother.
    symbols : Symbols or None
        Generating functions when tracked.
    kind : str
        ``"circulant"`` or ``"toeplitz"``.
    """

    A: object
    B: object
    C: object
    alpha: float
    kind: str = "toeplitz"
    symbols: Symbols | None = None
    hatC: object = None
    diag_A: np.ndarray = field(default=None, repr=False)
    diag_hatC: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        n = self.A.n
        if self.B.n != n or self.C.n != n:
            raise ValueError("blocks must share the same size")
        if self.alpha < 0:
            raise ValueError("alpha must be nonnegative")
        self.n = n
        if self.diag_A is None:
            self.diag_A = np.asarray(self.A.diagonal()).real.astype(float)
        if np.any(self.diag_A == 0):
            raise ValueError("A has a zero diagonal entry")
        self._dinv = 1.0 / self.diag_A
        if self.hatC is None:
            self.hatC = self._assemble_hatC()
        if self.diag_hatC is None:
            self.diag_hatC = np.asarray(self.hatC.diagonal()).real.astype(float)

    # construction -------------------------------------------------------

    @classmethod
    def circulant(cls, f_A: TrigPoly, f_B: TrigPoly, f_C: TrigPoly, n: int,
                  alpha: float | None = None) -> "SaddleSystem":
        """Circulant blocks ``C_n(f_A)``, ``C_n(f_B)``, ``C_n(f_C)``.

        ``alpha`` defaults to ``â₀(f_A)/max_j f_A(θ_j)``.
        """
        if alpha is None:
            alpha = circulant_alpha(f_A, n)
        f_hatC = hatC_symbol(f_A, f_B, f_C, alpha)
        return cls(
            CirculantOp(f_A, n), CirculantOp(f_B, n), CirculantOp(f_C, n), alpha,
            kind="circulant",
            symbols=Symbols(f_A, f_B, f_C, f_hatC),
            hatC=CirculantOp(f_hatC, n),
            diag_A=np.full(n, f_A.a0.real),
            diag_hatC=np.full(n, f_hatC.a0.real),
        )

    @classmethod
    def toeplitz(cls, f_A: TrigPoly, f_B: TrigPoly, f_C: TrigPoly, n: int,
                 alpha: float | None = None) -> "SaddleSystem":
        """Toeplitz blocks ``T_n(f_A)``, ``T_n(f_B)``, ``T_n(f_C)``.

        ``alpha`` defaults to ``â₀(f_A)/‖f_A‖_∞``.
        """
        if alpha is None:
            alpha = symbol_alpha(f_A)
        f_hatC = hatC_symbol(f_A, f_B, f_C, alpha)
        return cls(ToeplitzOp(f_A, n), ToeplitzOp(f_B, n), ToeplitzOp(f_C, n), alpha,
                   kind="toeplitz", symbols=Symbols(f_A, f_B, f_C, f_hatC))

    @classmethod
    def from_blocks(cls, A, B, C, alpha: float, symbols: Symbols | None = None,
                    kind: str = "toeplitz") -> "SaddleSystem":
        return cls(A, B, C, alpha, kind=kind, symbols=symbols)

    def _assemble_hatC(self) -> BandMatrix:
        A = self.A.tosparse()
        B = self.B.tosparse()
        C = self.C.tosparse()
        Dinv = sp.diags(self._dinv)
        mid = 2 * self.alpha * Dinv - self.alpha**2 * (Dinv @ A @ Dinv)
        return BandMatrix(C + B @ mid @ B.conj().T)

    # application --------------------------------------------------------

    def _split(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        x = np.asarray(x)
        if x.shape[0] != 2 * self.n:
            raise ValueError(f"vector has length {x.shape[0]}, system size is {2 * self.n}")
        return x[: self.n], x[self.n :]

    def _d(self, x: np.ndarray) -> np.ndarray:
        return self._dinv.reshape((-1,) + (1,) * (x.ndim - 1)) * x

    def apply_saddle(self, x: np.ndarray) -> np.ndarray:
        """``𝒜 x``."""
        x1, x2 = self._split(x)
        return np.concatenate([self.A.matvec(x1) + self.B.rmatvec(x2),
                               self.B.matvec(x1) - self.C.matvec(x2)])

    def apply_L(self, x: np.ndarray) -> np.ndarray:
        x1, x2 = self._split(x)
        return np.concatenate([x1, self.alpha * self.B.matvec(self._d(x1)) - x2])

    def apply_U(self, x: np.ndarray) -> np.ndarray:
        x1, x2 = self._split(x)
        return np.concatenate([x1 - self.alpha * self._d(self.B.rmatvec(x2)), x2])

    def apply_hatA(self, x: np.ndarray) -> np.ndarray:
        """``Â x = L(𝒜(U x))`` with five block products."""
        x1, x2 = self._split(x)
        bh = self.B.rmatvec(x2)
        u1 = x1 - self.alpha * self._d(bh)
        v1 = self.A.matvec(u1) + bh
        v2 = self.B.matvec(u1) - self.C.matvec(x2)
        return np.concatenate([v1, self.alpha * self.B.matvec(self._d(v1)) - v2])

    def apply_hatA_blocks(self, x: np.ndarray) -> np.ndarray:
        """``Â x`` from the expanded blocks ``[A, (I-αAD⁻¹)B^H; -B(I-αD⁻¹A), Ĉ]``."""
        x1, x2 = self._split(x)
        a = self.alpha
        bh = self.B.rmatvec(x2)
        top = self.A.matvec(x1) + bh - a * self.A.matvec(self._d(bh))
        bot = -self.B.matvec(x1 - a * self._d(self.A.matvec(x1))) + self.hatC.matvec(x2)
        return np.concatenate([top, bot])

    __matmul__ = apply_hatA

    def diag_hatA(self) -> np.ndarray:
        return np.concatenate([self.diag_A, self.diag_hatC])

    def jacobi_post_smooth(self, x: np.ndarray, b: np.ndarray, omega: float) -> np.ndarray:
        """One damped Jacobi step ``x + ω D_Â⁻¹ (b - Â x)``."""
        d = self.diag_hatA()
        if np.any(d == 0):
            raise ZeroDivisionError("Â has a zero diagonal entry")
        r = b - self.apply_hatA(x)
        return x + omega * (1.0 / d).reshape((-1,) + (1,) * (r.ndim - 1)) * r

    def residual(self, x: np.ndarray, b: np.ndarray) -> np.ndarray:
        return b - self.apply_hatA(x)

    def build_rhs(self, x_true: np.ndarray | None = None) -> np.ndarray:
        """``b = Â x_true``; the default ``x_true`` is :func:`sin_samples`."""
        if x_true is None:
            x_true = sin_samples(self.n)
        return self.apply_hatA(x_true)

    # assembled forms ----------------------------------------------------

    def saddle_sparse(self) -> sp.csr_matrix:
        A, B, C = (m.tosparse() for m in (self.A, self.B, self.C))
        return sp.bmat([[A, B.conj().T], [B, -C]], format="csr")

    def hatA_sparse(self) -> sp.csr_matrix:
        """Assembled ``Â`` from its expanded blocks."""
        A, B = self.A.tosparse(), self.B.tosparse()
        Dinv = sp.diags(self._dinv)
        I = sp.identity(self.n, format="csr")
        a = self.alpha
        return sp.bmat([
            [A, (I - a * A @ Dinv) @ B.conj().T],
            [-B @ (I - a * Dinv @ A), self.hatC.tosparse()],
        ], format="csr")

    def hatA_dense(self) -> np.ndarray:
        return self.hatA_sparse().toarray()

    def L_dense(self) -> np.ndarray:
        return self.apply_L(np.eye(2 * self.n))

    def U_dense(self) -> np.ndarray:
        return self.apply_U(np.eye(2 * self.n))

    @property
    def size(self) -> int:
        return 2 * self.n
