"""Ground-truth spectrally sparse signals, sampling masks and measurements.

A signal is a sum of ``R`` damped complex exponentials observed on the
integer grid ``j = 0, ..., 2N-2``::

    x[j] = sum_k c_k * exp((2j*pi*f_k - tau_k) * j)

Everything here is immutable after construction and seeded explicitly, so
instances can be rebuilt bit-for-bit from ``(seed, N, R, ...)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from ._validation import as_complex_vector


class SeparationInfeasibleError(RuntimeError):
    """Rejection sampling could not honour the requested frequency gap."""


@dataclass(frozen=True)
class Mode:
    frequency: float
    damping: float
    coefficient: complex


@dataclass(frozen=True)
class SpectralSignal:
    """Parametric signal of half-length ``n_half`` (so ``2*n_half-1`` samples).

    Parameters
    ----------
    n_half : int
        Side of the square Hankel lifting.
    modes : tuple of Mode
        Frequencies in [0, 1), dampings >= 0 and nonzero coefficients.
    """

    n_half: int
    modes: tuple[Mode, ...]

    def __post_init__(self):
        if int(self.n_half) < 1:
            raise ValueError(f"n_half must be positive, got {self.n_half}")
        object.__setattr__(self, "modes", tuple(self.modes))
        if len(self.modes) > self.length:
            raise ValueError(
                f"{len(self.modes)} modes exceed signal length {self.length}"
            )
        for m in self.modes:
            if not 0.0 <= m.frequency < 1.0:
                raise ValueError(f"frequency {m.frequency} outside [0, 1)")
            if m.damping < 0:
                raise ValueError(f"damping {m.damping} is negative")
            if m.coefficient == 0:
                raise ValueError("coefficients must be nonzero")

    @classmethod
    def from_arrays(cls, n_half, frequencies, coefficients, dampings=None):
        f = np.asarray(frequencies, dtype=float).ravel()
        c = np.asarray(coefficients, dtype=complex).ravel()
        d = np.zeros_like(f) if dampings is None else np.asarray(dampings, float).ravel()
        if not (len(f) == len(c) == len(d)):
            raise ValueError("frequencies, coefficients and dampings differ in length")
        modes = tuple(
            Mode(float(fi) % 1.0, float(di), complex(ci)) for fi, ci, di in zip(f, c, d)
        )
        return cls(int(n_half), modes)

    @property
    def length(self) -> int:
        return 2 * self.n_half - 1

    @property
    def n_modes(self) -> int:
        return len(self.modes)

    @property
    def frequencies(self) -> np.ndarray:
        return np.array([m.frequency for m in self.modes], dtype=float)

    @property
    def dampings(self) -> np.ndarray:
        return np.array([m.damping for m in self.modes], dtype=float)

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([m.coefficient for m in self.modes], dtype=complex)

    @property
    def poles(self) -> np.ndarray:
        """``z_k = exp(2j*pi*f_k - tau_k)``."""
        return np.exp(2j * np.pi * self.frequencies - self.dampings)

    @property
    def is_damped(self) -> bool:
        return bool(np.any(self.dampings > 0))

    def min_separation(self) -> float:
        return min_wrap_separation(self.frequencies)

    def to_dict(self) -> dict:
        return {
            "n_half": self.n_half,
            "modes": [
                {
                    "frequency": m.frequency,
                    "damping": m.damping,
                    "coefficient": [m.coefficient.real, m.coefficient.imag],
                }
                for m in self.modes
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SpectralSignal":
        from .io import SchemaError, complex_from_pair

        try:
            n_half = int(d["n_half"])
            raw = d["modes"]
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"signal: missing field {exc}") from None
        modes = []
        for i, m in enumerate(raw):
            try:
                modes.append(
                    Mode(
                        float(m["frequency"]),
                        float(m.get("damping", 0.0)),
                        complex_from_pair(m["coefficient"], f"signal.modes[{i}].coefficient"),
                    )
                )
            except KeyError as exc:
                raise SchemaError(f"signal.modes[{i}]: missing field {exc}") from None
        return cls(n_half, tuple(modes))


def wrap_distance(f, g):
    """Distance on the frequency torus, ``min(|f-g|, 1-|f-g|)``."""
    d = np.abs(np.asarray(f, float) - np.asarray(g, float)) % 1.0
    return np.minimum(d, 1.0 - d)


def min_wrap_separation(frequencies) -> float:
    f = np.asarray(frequencies, float).ravel()
    if f.size < 2:
        return np.inf
    d = wrap_distance(f[:, None], f[None, :])
    d[np.diag_indices(f.size)] = np.inf
    return float(d.min())


def synthesize(signal: SpectralSignal) -> np.ndarray:
    """Evaluate the signal on ``j = 0 .. 2N-2`` by direct summation."""
    j = np.arange(signal.length)
    if signal.n_modes == 0:
        return np.zeros(signal.length, dtype=complex)
    exponent = np.outer(j, 2j * np.pi * signal.frequencies - signal.dampings)
    return np.exp(exponent) @ signal.coefficients


def experiment_coefficients(rng: np.random.Generator, size: int) -> np.ndarray:
    """Magnitudes ``1 + 10**(0.5*m)`` and phases ``2*pi*theta``, m, theta ~ U[0, 1)."""
    mags = 1.0 + 10.0 ** (0.5 * rng.random(size))
    phases = 2.0 * np.pi * rng.random(size)
    return mags * np.exp(1j * phases)


def random_instance(
    seed,
    n_half: int,
    n_modes: int,
    separation_floor: Optional[float] = None,
    max_tries: int = 10_000,
) -> SpectralSignal:
    """Undamped random instance with the experimental coefficient model.

    Frequencies are i.i.d. uniform on [0, 1) and are re-drawn as a block
    until their minimum wrap-around distance reaches ``separation_floor``.
    """
    if n_modes > n_half:
        raise ValueError(f"n_modes={n_modes} exceeds n_half={n_half}")
    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        f = rng.random(n_modes)
        if separation_floor is None or min_wrap_separation(f) >= separation_floor:
            break
    else:
        raise SeparationInfeasibleError(
            f"no draw of {n_modes} frequencies with separation >= {separation_floor} "
            f"after {max_tries} tries"
        )
    c = experiment_coefficients(rng, n_modes)
    return SpectralSignal.from_arrays(n_half, f, c)


@dataclass(frozen=True)
class SampleMask:
    """Sorted, duplicate-free set of observed indices into ``range(n_full)``."""

    n_full: int
    observed: tuple[int, ...]

    def __post_init__(self):
        obs = tuple(int(i) for i in self.observed)
        if any(b <= a for a, b in zip(obs, obs[1:])):
            raise ValueError("observed indices must be strictly increasing")
        if obs and (obs[0] < 0 or obs[-1] >= self.n_full):
            raise ValueError(
                f"observed index out of range [0, {self.n_full - 1}]: "
                f"{obs[0] if obs[0] < 0 else obs[-1]}"
            )
        object.__setattr__(self, "observed", obs)

    @classmethod
    def from_indices(cls, n_full: int, indices: Iterable[int]) -> "SampleMask":
        idx = sorted(set(int(i) for i in indices))
        return cls(n_full, tuple(idx))

    @classmethod
    def full(cls, n_full: int) -> "SampleMask":
        return cls(n_full, tuple(range(n_full)))

    @classmethod
    def all_but(cls, n_full: int, missing: Iterable[int]) -> "SampleMask":
        missing = set(int(i) for i in missing)
        return cls(n_full, tuple(i for i in range(n_full) if i not in missing))

    @classmethod
    def random(cls, n_full: int, m: int, seed) -> "SampleMask":
        """``m`` indices drawn uniformly without replacement."""
        if not 0 <= m <= n_full:
            raise ValueError(f"cannot observe {m} of {n_full} entries")
        rng = np.random.default_rng(seed)
        return cls(n_full, tuple(np.sort(rng.choice(n_full, size=m, replace=False)).tolist()))

    @property
    def m(self) -> int:
        return len(self.observed)

    @property
    def indices(self) -> np.ndarray:
        return np.asarray(self.observed, dtype=int)

    @property
    def unobserved(self) -> np.ndarray:
        return np.setdiff1d(np.arange(self.n_full), self.indices)

    @property
    def is_full(self) -> bool:
        return self.m == self.n_full

    def as_bool(self) -> np.ndarray:
        b = np.zeros(self.n_full, dtype=bool)
        b[self.indices] = True
        return b


def gaussian_operator(n_rows: int, n_cols: int, seed) -> np.ndarray:
    """``n_rows x n_cols`` matrix with real and imaginary parts i.i.d. N(0, 1)."""
    rng = np.random.default_rng(seed)
    return rng.standard_normal((n_rows, n_cols)) + 1j * rng.standard_normal((n_rows, n_cols))


@dataclass(frozen=True)
class MeasurementSet:
    """Linear measurements ``b = A(x) + eta`` with ``||eta||_2 = noise_level``.

    ``kind`` is ``"entries"`` (``mask`` set) or ``"gaussian"`` (``seed`` and
    ``n_full`` set; the operator is regenerated on demand).
    """

    kind: str
    values: np.ndarray
    n_full: int
    mask: Optional[SampleMask] = None
    seed: Optional[int] = None
    noise_level: float = 0.0
    noise_seed: Optional[int] = None
    _operator: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        vals = as_complex_vector(self.values, "values")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        if self.noise_level < 0:
            raise ValueError("noise_level must be >= 0")
        if self.kind == "entries":
            if self.mask is None:
                raise ValueError("entry sampling requires a mask")
            if self.mask.n_full != self.n_full:
                raise ValueError("mask length does not match n_full")
            if len(vals) != self.mask.m:
                raise ValueError(
                    f"{len(vals)} values for {self.mask.m} observed indices"
                )
        elif self.kind == "gaussian":
            if self.seed is None:
                raise ValueError("gaussian sampling requires the operator seed")
        else:
            raise ValueError(f"unknown measurement kind {self.kind!r}")

    @property
    def m(self) -> int:
        return len(self.values)

    def operator(self) -> np.ndarray:
        """Dense ``m x n_full`` matrix of the measurement map."""
        if self.kind == "entries":
            A = np.zeros((self.m, self.n_full), dtype=complex)
            A[np.arange(self.m), self.mask.indices] = 1.0
            return A
        if self._operator is None:
            object.__setattr__(self, "_operator", gaussian_operator(self.m, self.n_full, self.seed))
        return self._operator

    def apply(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=complex)
        if self.kind == "entries":
            return x[self.mask.indices]
        return self.operator() @ x

    def to_dict(self) -> dict:
        d = {
            "kind": self.kind,
            "n_full": self.n_full,
            "values": [[v.real, v.imag] for v in self.values],
            "noise_level": self.noise_level,
        }
        if self.mask is not None:
            d["mask"] = list(self.mask.observed)
        if self.seed is not None:
            d["seed"] = int(self.seed)
        if self.noise_seed is not None:
            d["noise_seed"] = int(self.noise_seed)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "MeasurementSet":
        from .io import SchemaError, complex_vector_from_pairs

        try:
            kind = d["kind"]
            n_full = int(d["n_full"])
            values = complex_vector_from_pairs(d["values"], "measurements.values")
        except KeyError as exc:
            raise SchemaError(f"measurements: missing field {exc}") from None
        mask = None
        if kind == "entries":
            if "mask" not in d:
                raise SchemaError("measurements: missing field 'mask'")
            try:
                mask = SampleMask.from_indices(n_full, d["mask"])
            except ValueError as exc:
                raise SchemaError(f"measurements.mask: {exc}") from None
            if mask.m != len(d["mask"]):
                raise SchemaError("measurements.mask: duplicate indices")
        try:
            return cls(
                kind=kind,
                values=values,
                n_full=n_full,
                mask=mask,
                seed=d.get("seed"),
                noise_level=float(d.get("noise_level", 0.0)),
                noise_seed=d.get("noise_seed"),
            )
        except ValueError as exc:
            raise SchemaError(f"measurements: {exc}") from None


def sample_entries(x, mask: SampleMask) -> MeasurementSet:
    x = as_complex_vector(x, "x")
    if len(x) != mask.n_full:
        raise ValueError(f"signal has length {len(x)}, mask expects {mask.n_full}")
    return MeasurementSet("entries", x[mask.indices], mask.n_full, mask=mask)


def sample_gaussian(x, m: int, seed) -> MeasurementSet:
    if m < 1:
        raise ValueError("need at least one Gaussian projection")
    x = as_complex_vector(x, "x")
    G = gaussian_operator(m, len(x), seed)
    return MeasurementSet("gaussian", G @ x, len(x), seed=int(seed), _operator=G)


def add_noise(meas: MeasurementSet, level: float, seed) -> MeasurementSet:
    """Add complex Gaussian noise rescaled to Euclidean norm exactly ``level``."""
    if level < 0:
        raise ValueError("noise level must be >= 0")
    if level == 0:
        return meas
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(meas.m) + 1j * rng.standard_normal(meas.m)
    v *= level / np.linalg.norm(v)
    return MeasurementSet(
        meas.kind,
        meas.values + v,
        meas.n_full,
        mask=meas.mask,
        seed=meas.seed,
        noise_level=float(level),
        noise_seed=int(seed) if seed is not None else None,
        _operator=meas._operator,
    )


def shift_frequencies(x, f0: float) -> np.ndarray:
    """Modulate ``x`` by ``exp(2j*pi*f0*j)``, shifting all frequencies by ``f0``."""
    x = np.asarray(x, dtype=complex)
    return x * np.exp(2j * np.pi * f0 * np.arange(len(x)))


def conjugate_pairs(signal: SpectralSignal) -> SpectralSignal:
    """Append the mirrored modes ``(1-f, conj(c))`` to make the samples real."""
    f = signal.frequencies
    c = signal.coefficients
    return SpectralSignal.from_arrays(
        signal.n_half,
        np.concatenate([f, (1.0 - f) % 1.0]),
        np.concatenate([c, np.conj(c)]),
    )

