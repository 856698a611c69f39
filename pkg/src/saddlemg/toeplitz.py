"""Toeplitz operators, banded matrices and τ-style grid transfers.

Toeplitz matrices ``T_n(f)`` with entry ``(i, k) = a_{i-k}`` are applied
through a circulant embedding of power-of-two size.  Coarse blocks of the
Dirichlet hierarchy are no longer Toeplitz (Galerkin products perturb the
boundary rows), so they are stored as explicit band matrices.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .circulant import GridTransfer, _check_len, _col
from .symbol import TrigPoly


def _next_pow2(m: int) -> int:
    return 1 << max(0, (m - 1).bit_length())


class ToeplitzOp:
    """``T_n(f)`` for a trigonometric polynomial ``f``.

    Parameters
    ----------
    symbol : TrigPoly
        Generating function.
    n : int
        Matrix order.
    """

    def __init__(self, symbol: TrigPoly, n: int):
        if n < 1:
            raise ValueError("size must be positive")
        self.symbol = symbol
        self.n = int(n)
        m = _next_pow2(2 * self.n)
        self._m = m
        col = np.zeros(m, dtype=complex)
        for j, a in zip(symbol.indices, symbol.coeffs):
            if abs(j) < self.n:
                col[j % m] += a
        self._real = bool(np.all(col.imag == 0))
        embed = col.real if self._real else col
        self._eig = np.fft.fft(embed)
        self._half = self._eig[: m // 2 + 1].copy()
        self._adjoint: ToeplitzOp | None = None

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n, self.n)

    @property
    def dtype(self):
        return np.float64 if self._real else np.complex128

    @property
    def H(self) -> "ToeplitzOp":
        if self._adjoint is None:
            self._adjoint = ToeplitzOp(self.symbol.conj(), self.n)
        return self._adjoint

    def matvec(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x)
        _check_len(x, self.n)
        if self._real and not np.iscomplexobj(x):
            xf = np.fft.rfft(x, n=self._m, axis=0)
            y = np.fft.irfft(_col(self._half, xf) * xf, n=self._m, axis=0)
        else:
            xf = np.fft.fft(x, n=self._m, axis=0)
            y = np.fft.ifft(_col(self._eig, xf) * xf, axis=0)
        return y[: self.n]

    matvec_embed = matvec
    __matmul__ = matvec

    def rmatvec(self, x: np.ndarray) -> np.ndarray:
        return self.H.matvec(x)

    def diagonal(self) -> np.ndarray:
        return np.full(self.n, self.symbol.coefficient(0).real if self._real
                       else self.symbol.coefficient(0))

    def tosparse(self) -> sp.csr_matrix:
        offs, diags = [], []
        for j, a in zip(self.symbol.indices, self.symbol.coeffs):
            if abs(j) < self.n and a != 0:
                offs.append(-int(j))
                diags.append(np.full(self.n - abs(int(j)), a.real if self._real else a))
        if not offs:
            return sp.csr_matrix(self.shape, dtype=self.dtype)
        return sp.diags(diags, offs, shape=self.shape, format="csr")

    def todense(self) -> np.ndarray:
        return self.tosparse().toarray()

    def to_band(self) -> "BandMatrix":
        return BandMatrix.from_sparse(self.tosparse())


class BandMatrix:
    """Square banded matrix stored in compressed sparse row form.

    Parameters
    ----------
    matrix : scipy.sparse matrix or ndarray
        Entries; explicit zeros are dropped.
    """

    def __init__(self, matrix):
        m = sp.csr_matrix(matrix)
        if m.shape[0] != m.shape[1]:
            raise ValueError("band matrix must be square")
        m.eliminate_zeros()
        if m.nnz and np.all(np.imag(m.data) == 0):
            m = m.real.tocsr()
        self._m = m
        self.n = m.shape[0]
        self._mh = None

    @classmethod
    def from_sparse(cls, matrix) -> "BandMatrix":
        return cls(matrix)

    @classmethod
    def from_diagonals(cls, diagonals: dict[int, np.ndarray | complex], n: int) -> "BandMatrix":
        """Build from ``{offset: values}``; offset ``k > 0`` is above the main diagonal."""
        offs = sorted(diagonals)
        vals = [np.broadcast_to(np.asarray(diagonals[k]), (n - abs(k),)) for k in offs]
        return cls(sp.diags(vals, offs, shape=(n, n)))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n, self.n)

    @property
    def dtype(self):
        return self._m.dtype

    @property
    def offsets(self) -> np.ndarray:
        coo = self._m.tocoo()
        return np.unique(coo.col - coo.row)

    @property
    def bandwidth(self) -> tuple[int, int]:
        """(lower, upper) bandwidth."""
        off = self.offsets
        if off.size == 0:
            return (0, 0)
        return (int(max(0, -off.min())), int(max(0, off.max())))

    def diagonals(self) -> dict[int, np.ndarray]:
        return {int(k): self._m.diagonal(int(k)) for k in self.offsets}

    def matvec(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x)
        _check_len(x, self.n)
        return self._m @ x

    __matmul__ = matvec

    def rmatvec(self, x: np.ndarray) -> np.ndarray:
        if self._mh is None:
            self._mh = self._m.conj().T.tocsr()
        x = np.asarray(x)
        _check_len(x, self.n)
        return self._mh @ x

    @property
    def H(self) -> "BandMatrix":
        return BandMatrix(self._m.conj().T)

    def diagonal(self) -> np.ndarray:
        return self._m.diagonal()

    def tosparse(self) -> sp.csr_matrix:
        return self._m

    def todense(self) -> np.ndarray:
        return self._m.toarray()


def _tau_size(n: int) -> int:
    t = (n + 1).bit_length() - 1
    if n < 1 or (1 << t) != n + 1:
        raise ValueError(f"size {n} is not of the form 2^t - 1")
    return t


def tau_transfer(p: TrigPoly, n: int) -> GridTransfer:
    """``T_n(p) K^T`` where ``K`` keeps the odd 0-based entries 1, 3, ..., n-2."""
    t = _tau_size(n)
    if t < 2:
        raise ValueError("need n >= 3 to coarsen")
    return GridTransfer(ToeplitzOp(p, n), 1, (n - 1) // 2, "tau")


tau_prolong = tau_restrict = tau_transfer


def galerkin_band(Pl: GridTransfer, M, Pr: GridTransfer) -> BandMatrix:
    """Return ``Pl^H M Pr`` assembled as a band matrix."""
    if Pl.n != M.n or Pr.n != M.n:
        raise ValueError("transfer and matrix sizes differ")
    if Pl.k != Pr.k:
        raise ValueError("left and right coarse sizes differ")
    prod = Pl.tosparse().conj().T @ M.tosparse() @ Pr.tosparse()
    return BandMatrix(prod)
