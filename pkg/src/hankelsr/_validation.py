"""Input checks shared by the functional API and the estimators.

scikit-learn's ``check_array`` rejects complex input, so the few checks we
need live here.
"""

import numbers

import numpy as np


def as_complex_vector(x, name="x"):
    arr = np.asarray(x)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    arr = arr.astype(complex, copy=True)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or infinite entries")
    return arr


def as_complex_matrix(a, name="A", square=False):
    arr = np.asarray(a)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be two-dimensional, got shape {arr.shape}")
    if square and arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{name} must be square, got shape {arr.shape}")
    return arr.astype(complex, copy=False)


def check_signal_rows(X, allow_nan=True):
    """Validate a 2-D array of signals, one per row, with NaN marking gaps.

    A single 1-D signal is promoted to one row. Rows must have odd length
    ``2N-1``; ``N`` is returned alongside the array.
    """
    X = np.asarray(X)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2:
        raise ValueError(f"expected a 2-D array of signals, got shape {X.shape}")
    X = X.astype(complex)
    if X.shape[1] % 2 == 0:
        raise ValueError(f"signal length must be odd (2N-1), got {X.shape[1]}")
    bad = np.isinf(X.real) | np.isinf(X.imag)
    if not allow_nan:
        bad |= np.isnan(X.real) | np.isnan(X.imag)
    if bad.any():
        raise ValueError("signals contain infinite entries" if allow_nan else
                         "signals contain NaN or infinite entries")
    return X, (X.shape[1] + 1) // 2


def check_positive_int(value, name, minimum=1):
    if not isinstance(value, numbers.Integral) or value < minimum:
        raise ValueError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)
