"""Single-snapshot MUSIC on the Hankel lifting.

The left singular vectors of ``H(x)`` past the first ``R`` span the noise
subspace ``U2``.  True frequencies are the zeros of ``||U2^* phi(f)||``
with ``phi(f) = [1, e^{i2 pi f}, ..., e^{i2 pi f (N-1)}]``, so the imaging
function ``J(f) = ||phi(f)|| / ||U2^* phi(f)||`` peaks there.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._validation import as_complex_vector
from .hankel_ops import build_hankel

SENTINEL = 1e16
DEFAULT_GRID = 2 ** 14
_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0
_PLATEAU_RTOL = 1e-12


class PeakCountError(RuntimeError):
    """The imaging function has fewer local maxima than requested modes."""

    def __init__(self, found, wanted):
        super().__init__(f"found {found} local maxima, need {wanted}")
        self.found = found
        self.wanted = wanted


@dataclass
class ImagingProfile:
    grid: np.ndarray
    values: np.ndarray
    refined_peaks: list = field(default_factory=list)
    spectral_gap: float = np.inf
    damped_warning: bool = False

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["f", "J"])
            for f, j in zip(self.grid, self.values):
                w.writerow([repr(float(f)), repr(float(j))])

    def peaks_dict(self) -> dict:
        return {
            "peaks": [{"frequency": float(f), "J": float(j)} for f, j in self.refined_peaks],
            "spectral_gap": float(self.spectral_gap),
            "damped_warning": bool(self.damped_warning),
        }


@dataclass
class FrequencyEstimate:
    frequencies: np.ndarray
    values: np.ndarray

    def sorted(self) -> np.ndarray:
        return np.sort(self.frequencies)

    def to_dict(self) -> dict:
        return {"frequencies": self.frequencies.tolist(), "J": self.values.tolist()}


class _NoiseSubspace:
    def __init__(self, x, R, n):
        x = as_complex_vector(x, "x")
        if len(x) != 2 * n - 1:
            raise ValueError(f"signal length {len(x)} does not match n={n}")
        if not 1 <= R < n:
            raise ValueError(f"need 1 <= R < n, got R={R}, n={n}")
        U, s, _ = np.linalg.svd(build_hankel(x, n))
        self.n = n
        self.U2 = U[:, R:]
        self.sigma = s
        self.gap = float(s[R - 1] / s[R]) if s[R] > 0 else np.inf

    def J(self, f):
        f = np.atleast_1d(np.asarray(f, dtype=float))
        phi = np.exp(2j * np.pi * np.outer(np.arange(self.n), f))
        den = np.linalg.norm(self.U2.conj().T @ phi, axis=0)
        with np.errstate(divide="ignore"):
            out = np.sqrt(self.n) / den
        return np.where(den <= np.sqrt(self.n) / SENTINEL, SENTINEL, out)

    def J_grid(self, G):
        # U2^* phi(k/G) for all k at once: column-wise inverse FFT
        P = np.fft.ifft(self.U2.conj(), n=G, axis=0) * G
        den = np.linalg.norm(P, axis=1)
        with np.errstate(divide="ignore"):
            out = np.sqrt(self.n) / den
        return np.where(den <= np.sqrt(self.n) / SENTINEL, SENTINEL, out)


def imaging_function(x, R, n, f):
    """``J(f)``; scalar in, scalar out, arrays broadcast."""
    vals = _NoiseSubspace(x, R, n).J(f)
    return float(vals[0]) if np.ndim(f) == 0 else vals


def _golden_max(fun, a, b, tol, max_steps):
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(max_steps):
        if b - a < tol:
            break
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = fun(d)
    f = (a + b) / 2.0
    return f, fun(f)


def run_music(x, R, n, grid_size=DEFAULT_GRID, refine_iters=80, refine_tol=1e-10,
              damped=False):
    """Estimate ``R`` frequencies from one snapshot.

    Returns ``(FrequencyEstimate, ImagingProfile)``.  Grid maxima are found
    with wrap-around neighbours; equal peak heights keep the lower
    frequency first.  Each maximum is refined by golden-section search over
    its two neighbouring cells.
    """
    if grid_size < 4 * n:
        raise ValueError(f"grid_size must be >= 4n = {4 * n}")
    ns = _NoiseSubspace(x, R, n)
    G = int(grid_size)
    grid = np.arange(G) / G
    J = ns.J_grid(G)
    # rises below this relative size are FFT roundoff, so a flat profile
    # (e.g. x = 0) has no maxima at all
    eps = _PLATEAU_RTOL * J
    is_max = (J - np.roll(J, 1) > eps) & (J - np.roll(J, -1) >= -eps)
    local = np.flatnonzero(is_max)
    if local.size < R:
        raise PeakCountError(int(local.size), R)
    top = local[np.argsort(-J[local], kind="stable")][:R]

    h = 1.0 / G

    def score(f):
        return float(ns.J(f % 1.0)[0])

    peaks = []
    for k in top:
        f, v = _golden_max(score, (k - 1) * h, (k + 1) * h, refine_tol, refine_iters)
        peaks.append((f % 1.0, v))
    peaks.sort(key=lambda p: (-p[1], p[0]))

    est = FrequencyEstimate(np.array([p[0] for p in peaks]), np.array([p[1] for p in peaks]))
    profile = ImagingProfile(grid, J, peaks, ns.gap, bool(damped))
    return est, profile


def write_peaks_json(path, est: FrequencyEstimate, profile: ImagingProfile, extra=None):
    from .io import write_json

    payload = {**profile.peaks_dict(), **est.to_dict()}
    if extra:
        payload.update(extra)
    write_json(Path(path), payload)
