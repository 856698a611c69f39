"""Circulant operators and symbol-based grid transfers.

``C_n(f)`` has entry ``(i, k) = Σ_{j ≡ i-k (mod n)} a_j`` and is applied with
one forward and one inverse FFT.  All operators act along axis 0, so a 2-D
array is treated as a batch of column vectors.
"""

from __future__ import annotations

import warnings

import numpy as np
import scipy.sparse as sp

from .symbol import TrigPoly

KERNEL_TOL = 1e-10


def _col(d: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Broadcast a length-n vector against ``x`` along axis 0."""
    return d.reshape((-1,) + (1,) * (x.ndim - 1))


def _check_len(x: np.ndarray, n: int) -> None:
    if x.shape[0] != n:
        raise ValueError(f"operand has length {x.shape[0]}, operator size is {n}")


def first_column(symbol: TrigPoly, n: int) -> np.ndarray:
    c = np.zeros(n, dtype=complex)
    np.add.at(c, symbol.indices % n, symbol.coeffs)
    return c


class CirculantOp:
    """The circulant matrix ``C_n(f)`` generated by a trigonometric polynomial.

    Parameters
    ----------
    symbol : TrigPoly
        Generating function ``f``.
    n : int
        Matrix order.

    Notes
    -----
    ``eigenvalues`` is the DFT of the first column, so entry ``k`` equals
    ``f(-θ_k)`` with ``θ_k = 2πk/n``; as a set these are the samples of ``f``
    on the grid.
    """

    def __init__(self, symbol: TrigPoly, n: int):
        if n < 1:
            raise ValueError("size must be positive")
        self.symbol = symbol
        self.n = int(n)
        col = first_column(symbol, self.n)
        self._real = bool(np.all(col.imag == 0))
        self.column = col.real.copy() if self._real else col
        self.eigenvalues = np.fft.fft(col)
        self.eigenvalues.flags.writeable = False
        self._half = self.eigenvalues[: self.n // 2 + 1].copy()
        self._adjoint: CirculantOp | None = None

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n, self.n)

    @property
    def dtype(self):
        return np.float64 if self._real else np.complex128

    @property
    def H(self) -> "CirculantOp":
        if self._adjoint is None:
            self._adjoint = CirculantOp(self.symbol.conj(), self.n)
        return self._adjoint

    def matvec(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x)
        _check_len(x, self.n)
        if self._real and not np.iscomplexobj(x):
            xf = np.fft.rfft(x, axis=0)
            return np.fft.irfft(_col(self._half, xf) * xf, n=self.n, axis=0)
        xf = np.fft.fft(x, axis=0)
        return np.fft.ifft(_col(self.eigenvalues, xf) * xf, axis=0)

    def rmatvec(self, x: np.ndarray) -> np.ndarray:
        """Apply the conjugate transpose ``C_n(f)^H = C_n(conj f)``."""
        return self.H.matvec(x)

    __matmul__ = matvec

    def diagonal(self) -> np.ndarray:
        return np.full(self.n, self.column[0])

    def todense(self) -> np.ndarray:
        idx = (np.arange(self.n)[:, None] - np.arange(self.n)[None, :]) % self.n
        return self.column[idx]

    def tosparse(self) -> sp.csr_matrix:
        nz = np.flatnonzero(self.column)
        rows, cols, vals = [], [], []
        base = np.arange(self.n)
        for j in nz:
            rows.append(base)
            cols.append((base - j) % self.n)
            vals.append(np.full(self.n, self.column[j]))
        if not rows:
            return sp.csr_matrix((self.n, self.n), dtype=self.dtype)
        return sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=self.shape,
        )

    def solve_pseudo(self, b: np.ndarray, kernel_tol: float = KERNEL_TOL) -> np.ndarray:
        """Minimum-norm solution, inverting only eigenvalues above ``kernel_tol * max|λ|``.

        Warns when ``b`` has a component along the discarded eigenvectors larger
        than ``1e-8 * ||b||``.
        """
        b = np.asarray(b)
        _check_len(b, self.n)
        lam = self.eigenvalues
        top = np.max(np.abs(lam))
        keep = np.abs(lam) > kernel_tol * top if top > 0 else np.zeros(self.n, bool)
        bf = np.fft.fft(b, axis=0)
        null = np.linalg.norm(bf[~keep]) / np.sqrt(self.n)
        if null > 1e-8 * np.linalg.norm(b) or top == 0:
            warnings.warn("right-hand side is not in the range of the operator",
                          RuntimeWarning, stacklevel=2)
        inv = np.zeros_like(lam)
        inv[keep] = 1.0 / lam[keep]
        x = np.fft.ifft(_col(inv, bf) * bf, axis=0)
        if self._real and not np.iscomplexobj(b):
            return x.real
        return x


class GridTransfer:
    """Prolongation ``P = M(p) K^T`` and its adjoint restriction ``P^H``.

    ``M(p)`` is a circulant or Toeplitz matrix of order ``n``; ``K`` keeps every
    second entry starting at ``offset`` (0 for the circulant cutting matrix,
    1 for the odd-size τ cutting matrix).

    Use :func:`circulant_transfer` or :func:`saddlemg.toeplitz.tau_transfer`
    to build one.
    """

    def __init__(self, op, offset: int, coarse_size: int, kind: str):
        self.op = op
        self.offset = int(offset)
        self.n = op.n
        self.k = int(coarse_size)
        self.kind = kind

    @property
    def symbol(self) -> TrigPoly:
        return self.op.symbol

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n, self.k)

    def upsample(self, e: np.ndarray) -> np.ndarray:
        z = np.zeros((self.n,) + e.shape[1:], dtype=e.dtype)
        z[self.offset : self.offset + 2 * self.k : 2] = e
        return z

    def downsample(self, r: np.ndarray) -> np.ndarray:
        return r[self.offset : self.offset + 2 * self.k : 2]

    def prolong(self, e: np.ndarray) -> np.ndarray:
        e = np.asarray(e)
        _check_len(e, self.k)
        return self.op.matvec(self.upsample(e))

    def restrict(self, r: np.ndarray) -> np.ndarray:
        r = np.asarray(r)
        _check_len(r, self.n)
        return self.downsample(self.op.rmatvec(r))

    def todense(self) -> np.ndarray:
        return self.op.todense()[:, self.offset : self.offset + 2 * self.k : 2]

    def tosparse(self) -> sp.csr_matrix:
        return sp.csr_matrix(self.op.tosparse()[:, self.offset : self.offset + 2 * self.k : 2])


def circulant_transfer(p: TrigPoly, n: int) -> GridTransfer:
    """``C_n(p) K_n^T`` with ``K_n`` keeping entries 0, 2, 4, ... (0-based)."""
    if n % 2:
        raise ValueError("circulant coarsening needs an even size")
    return GridTransfer(CirculantOp(p, n), 0, n // 2, "circulant")
