"""Square Hankel lifting ``H(x)[j, k] = x[j + k]`` and its bookkeeping.

Indices are 0-based throughout: anti-diagonal ``i`` (``i = 0 .. 2n-2``)
holds ``x[i]`` and has ``w[i] = min(i + 1, 2n - 1 - i)`` cells.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._validation import as_complex_matrix, as_complex_vector


class FullMaskError(ValueError):
    """Every entry is observed, so quantities over unobserved entries are undefined."""


@dataclass(frozen=True)
class HankelShape:
    n: int

    @property
    def full_len(self) -> int:
        return 2 * self.n - 1

    @property
    def weights(self) -> np.ndarray:
        return antidiagonal_weights(self.n)

    def cells(self, i: int):
        """``(row, col)`` pairs on anti-diagonal ``i``."""
        if not 0 <= i < self.full_len:
            raise IndexError(f"anti-diagonal {i} out of range for n={self.n}")
        lo = max(0, i - self.n + 1)
        hi = min(i, self.n - 1)
        return [(j, i - j) for j in range(lo, hi + 1)]


@lru_cache(maxsize=64)
def _index_grid(n):
    g = np.add.outer(np.arange(n), np.arange(n))
    g.setflags(write=False)
    return g


def build_hankel(x, n=None) -> np.ndarray:
    x = as_complex_vector(x)
    if n is None:
        if len(x) % 2 == 0:
            raise ValueError(f"length {len(x)} is not of the form 2n-1")
        n = (len(x) + 1) // 2
    if len(x) != 2 * n - 1:
        raise ValueError(f"expected length {2 * n - 1} for n={n}, got {len(x)}")
    return x[_index_grid(n)]


def hankel_adjoint(M) -> np.ndarray:
    """Sum of ``M`` over each anti-diagonal (adjoint of ``build_hankel``)."""
    M = as_complex_matrix(M, "M", square=True)
    n = M.shape[0]
    idx = _index_grid(n).ravel()
    flat = M.ravel()
    L = 2 * n - 1
    return np.bincount(idx, flat.real, L) + 1j * np.bincount(idx, flat.imag, L)


def antidiagonal_weights(n: int) -> np.ndarray:
    if n < 1:
        raise ValueError("n must be >= 1")
    i = np.arange(1, 2 * n)
    return np.where(i <= n, i, 2 * n - i)


def w_min(mask, n: int) -> int:
    """Smallest anti-diagonal length over the unobserved entries."""
    if mask.n_full != 2 * n - 1:
        raise ValueError(f"mask covers {mask.n_full} entries, expected {2 * n - 1}")
    missing = mask.unobserved
    if missing.size == 0:
        raise FullMaskError("no unobserved entries")
    return int(antidiagonal_weights(n)[missing].min())


def numerical_rank(A, rtol=1e-12) -> int:
    """Count of singular values above ``max(m, n) * sigma_1 * rtol``."""
    s = np.linalg.svd(np.asarray(A), compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.count_nonzero(s > max(np.shape(A)) * s[0] * rtol))


def nuclear_norm(A) -> float:
    return float(np.linalg.svd(np.asarray(A), compute_uv=False).sum())


def inner(A, B) -> float:
    """Real inner product ``Re Tr(A^* B)``."""
    return float(np.real(np.vdot(np.asarray(A), np.asarray(B))))
