"""scikit-learn style wrappers.

Signals are rows of a complex array of length ``2N-1``; missing samples are
``NaN``, the same convention as scikit-learn's imputers.  Each row is an
independent problem, so ``fit`` only validates and records the shape.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_positive_int, check_signal_rows
from .music_ident import DEFAULT_GRID, run_music
from .recovery_solvers import (
    ANM_OPTIONS,
    SolverOptions,
    recover_anm,
    recover_hankel_nnm,
    recover_hankel_nnm_noisy,
)
from .signal_model import SampleMask, sample_entries


def _row_measurements(row):
    missing = np.isnan(row.real) | np.isnan(row.imag)
    mask = SampleMask(len(row), tuple(np.flatnonzero(~missing).tolist()))
    return sample_entries(np.where(missing, 0, row), mask)


class _CompletionBase(TransformerMixin, BaseEstimator):
    def fit(self, X, y=None):
        X, n = check_signal_rows(X)
        self.n_half_ = n
        self.n_features_in_ = X.shape[1]
        return self

    def _options(self):
        raise NotImplementedError

    def _solve(self, meas, n, opts):
        raise NotImplementedError

    def transform(self, X):
        check_is_fitted(self, "n_half_")
        X, n = check_signal_rows(X)
        if n != self.n_half_:
            raise ValueError(f"fitted for length {2 * self.n_half_ - 1}, got {X.shape[1]}")
        opts = self._options()
        out = np.empty_like(X)
        self.results_ = []
        for i, row in enumerate(X):
            res = self._solve(_row_measurements(row), n, opts)
            self.results_.append(res)
            out[i] = res.x_hat
        return out


class HankelCompletion(_CompletionBase):
    """Fill missing samples by Hankel nuclear norm minimization.

    Parameters
    ----------
    delta : float, default=0
        Noise radius.  Zero pins observed samples exactly; a positive value
        allows ``||x_M - b||_2 <= delta``.
    tol, max_iters, rho : solver settings, see ``SolverOptions``.
    """

    def __init__(self, delta=0.0, tol=1e-8, max_iters=50_000, rho=1.0):
        self.delta = delta
        self.tol = tol
        self.max_iters = max_iters
        self.rho = rho

    def _options(self):
        check_positive_int(self.max_iters, "max_iters")
        return SolverOptions(max_iters=self.max_iters, tol=self.tol, rho=self.rho)

    def _solve(self, meas, n, opts):
        if self.delta and self.delta > 0:
            return recover_hankel_nnm_noisy(meas, n, opts, delta=self.delta)
        return recover_hankel_nnm(meas, n, opts)


class AtomicNormCompletion(_CompletionBase):
    """Fill missing samples by atomic norm minimization (undamped model)."""

    def __init__(self, tol=ANM_OPTIONS.tol, max_iters=ANM_OPTIONS.max_iters):
        self.tol = tol
        self.max_iters = max_iters

    def _options(self):
        check_positive_int(self.max_iters, "max_iters")
        return SolverOptions(max_iters=self.max_iters, tol=self.tol,
                             adapt_every=ANM_OPTIONS.adapt_every)

    def _solve(self, meas, n, opts):
        return recover_anm(meas, n, opts)


class SingleSnapshotMUSIC(BaseEstimator):
    """Frequency identification from complete single snapshots.

    After ``fit``, ``frequencies_`` has one sorted row of ``n_modes``
    estimates per input signal and ``profiles_`` holds the imaging profiles.
    """

    def __init__(self, n_modes=1, grid_size=DEFAULT_GRID, refine_iters=80):
        self.n_modes = n_modes
        self.grid_size = grid_size
        self.refine_iters = refine_iters

    def fit(self, X, y=None):
        X, n = check_signal_rows(X, allow_nan=False)
        R = check_positive_int(self.n_modes, "n_modes")
        freqs, profiles = [], []
        for row in X:
            est, prof = run_music(row, R, n, self.grid_size, self.refine_iters)
            freqs.append(est.sorted())
            profiles.append(prof)
        self.n_half_ = n
        self.n_features_in_ = X.shape[1]
        self.frequencies_ = np.array(freqs)
        self.profiles_ = profiles
        return self

    def predict(self, X):
        """Sorted frequency estimates, one row per signal."""
        return self.fit(X).frequencies_
