"""Numerical checks of the recovery conditions, bounds and counterexamples.

Every checker returns a :class:`ConditionReport` carrying a signed margin
and the threshold it was compared against, so borderline cases are visible
instead of hidden behind a boolean.

Strict inequalities ``lhs < rhs`` hold when ``rhs - lhs > 1e-10 * scale``;
non-strict ones when ``rhs - lhs >= -1e-10 * scale``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .hankel_ops import (
    FullMaskError,
    build_hankel,
    numerical_rank,
    w_min as _w_min,
)
from .io import complex_vector_to_pairs, dumps, matrix_to_json
from .signal_model import SampleMask, SpectralSignal, experiment_coefficients, synthesize

STRICT_RTOL = 1e-10

HOLDS, FAILS, INAPPLICABLE = "holds", "fails", "inapplicable"


@dataclass
class ConditionReport:
    name: str
    verdict: str
    margin: float
    threshold: float = 0.0
    witness: Optional[dict] = None
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.verdict not in (HOLDS, FAILS, INAPPLICABLE):
            raise ValueError(f"unknown verdict {self.verdict!r}")
        if self.verdict == HOLDS and not self.margin > self.threshold:
            raise ValueError(f"{self.name}: 'holds' with margin {self.margin} <= {self.threshold}")
        if self.verdict == FAILS:
            if self.margin > self.threshold:
                raise ValueError(f"{self.name}: 'fails' with margin {self.margin} > {self.threshold}")
            if self.witness is None:
                raise ValueError(f"{self.name}: failing report needs a witness")

    @property
    def holds(self) -> bool:
        return self.verdict == HOLDS

    @classmethod
    def compare(cls, name, margin, threshold, witness=None, **details):
        """Verdict from ``margin > threshold``; the witness is kept only on failure."""
        margin = float(margin)
        verdict = HOLDS if margin > threshold else FAILS
        if verdict == FAILS and witness is None:
            witness = {}
        return cls(name, verdict, margin, float(threshold),
                   witness if verdict == FAILS else None, details)

    @classmethod
    def inapplicable(cls, name, reason, margin=float("nan"), **details):
        return cls(name, INAPPLICABLE, margin, 0.0, None, {"reason": reason, **details})

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "verdict": self.verdict,
            "margin": self.margin,
            "threshold": self.threshold,
            "witness": self.witness,
            "details": self.details,
        }

    def to_json(self) -> str:
        return dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> "ConditionReport":
        d = json.loads(line)
        return cls(d["name"], d["verdict"], float(d["margin"]), float(d["threshold"]),
                   d.get("witness"), d.get("details", {}))


def _strict(scale):
    return STRICT_RTOL * max(float(scale), 1.0)


def _sv(A):
    return np.linalg.svd(np.asarray(A), compute_uv=False)


def _ky_fan(s, k):
    return float(np.sort(s)[::-1][:k].sum())


# ---------------------------------------------------------------------------
# null-space directions


@dataclass(frozen=True)
class NullSpaceVector:
    """Nonzero ``z`` supported on the unobserved entries of ``mask``."""

    z: np.ndarray
    mask: SampleMask

    def __post_init__(self):
        z = np.asarray(self.z, dtype=complex).copy()
        if z.shape != (self.mask.n_full,):
            raise ValueError(f"z has shape {z.shape}, mask expects ({self.mask.n_full},)")
        if np.any(z[self.mask.indices] != 0):
            raise ValueError("z must vanish on observed indices")
        if not np.any(z != 0):
            raise ValueError("z must be nonzero")
        z.setflags(write=False)
        object.__setattr__(self, "z", z)

    @property
    def n(self) -> int:
        return (self.mask.n_full + 1) // 2

    def lifted(self) -> np.ndarray:
        return build_hankel(self.z, self.n)

    @classmethod
    def random(cls, mask: SampleMask, seed) -> "NullSpaceVector":
        """i.i.d. complex Gaussian values on the unobserved entries."""
        rng = np.random.default_rng(seed)
        miss = mask.unobserved
        if miss.size == 0:
            raise FullMaskError("full mask has a trivial null space")
        z = np.zeros(mask.n_full, dtype=complex)
        z[miss] = rng.standard_normal(miss.size) + 1j * rng.standard_normal(miss.size)
        return cls(z, mask)

    @classmethod
    def single(cls, mask: SampleMask, index: int, value: complex = 1.0) -> "NullSpaceVector":
        z = np.zeros(mask.n_full, dtype=complex)
        z[index] = value
        return cls(z, mask)


# ---------------------------------------------------------------------------
# worst case and null-space conditions


def worst_case_bound(mask: SampleMask, n: int):
    """Largest ``R`` with ``R < w_min / (2 (2n - 1 - M))``.

    Returns ``(max_R, report)``; ``max_R`` is ``None`` for a full mask.
    """
    try:
        wm = _w_min(mask, n)
    except FullMaskError:
        return None, ConditionReport.inapplicable("theorem1", "no unobserved entries")
    d = mask.n_full - mask.m
    bound = wm / (2.0 * d)
    max_r = (wm - 1) // (2 * d)
    rep = ConditionReport.compare(
        "theorem1", bound - max_r, 0.0, w_min=wm, unobserved=d, bound=bound, max_R=max_r
    )
    return int(max_r), rep


def check_strong_nullspace(z: NullSpaceVector, R: int, n: Optional[int] = None):
    """``2 * (sigma_1 + ... + sigma_R) < sum(sigma)`` for ``H(z)``."""
    n = z.n if n is None else n
    s = _sv(build_hankel(z.z, n))
    total = float(s.sum())
    margin = total - 2.0 * _ky_fan(s, R)
    return ConditionReport.compare(
        "strong_nullspace", margin, _strict(total),
        witness={"z": complex_vector_to_pairs(z.z), "R": R},
        R=R, nuclear=total,
    )


def _split_svd(X0, R):
    U, s, Vh = np.linalg.svd(X0)
    V = Vh.conj().T
    return U[:, :R], V[:, :R], U[:, R:], V[:, R:], s


def weak_margin_matrix(X0, Q, R):
    """``-|Tr(U^* Q V)| + ||Ubar^* Q Vbar||_*`` for the rank-``R`` SVD of ``X0``."""
    U1, V1, U2, V2, _ = _split_svd(X0, R)
    tr = abs(np.trace(U1.conj().T @ Q @ V1))
    rest = float(_sv(U2.conj().T @ Q @ V2).sum()) if U2.shape[1] else 0.0
    return -tr + rest, tr, rest


def check_weak_nullspace(x_true, z: NullSpaceVector, R: int):
    x_true = np.asarray(x_true, dtype=complex)
    n = (len(x_true) + 1) // 2
    X0 = build_hankel(x_true, n)
    rank = numerical_rank(X0)
    if rank != R:
        raise ValueError(f"stated rank R={R} but H(x) has numerical rank {rank}")
    Q = build_hankel(z.z, n)
    margin, tr, rest = weak_margin_matrix(X0, Q, R)
    scale = float(_sv(Q).sum())
    return ConditionReport.compare(
        "weak_nullspace", margin, _strict(scale),
        witness={"z": complex_vector_to_pairs(z.z), "R": R},
        trace_term=tr, complement_nuclear=rest,
    )


# ---------------------------------------------------------------------------
# orthogonal on-grid atoms


def orthogonal_instance(N, grid_indices, coefficients) -> SpectralSignal:
    """On-grid signal with frequencies ``s_k / N``; its atoms are orthogonal."""
    s = np.asarray(grid_indices, dtype=int)
    if len(np.unique(s % N)) != len(s):
        raise ValueError("grid indices must be distinct modulo N")
    return SpectralSignal.from_arrays(N, (s % N) / N, coefficients)


def _grid_phase(s, N):
    return np.exp(-2j * np.pi * np.asarray(s) * (N - 1) / N)


def orthogonal_trace_closed(s, coefficients, N) -> complex:
    """``Tr(U^* J V)`` from raw phases, ``sum e^{i theta_k} e^{-i 2 pi s_k (N-1)/N}``.

    For ``c_k = |c_k| e^{i phi_k}`` the left singular vector carries
    ``e^{i phi_k}`` so ``theta_k = -phi_k``.
    """
    theta = -np.angle(np.asarray(coefficients, dtype=complex))
    return complex(np.sum(np.exp(1j * theta) * _grid_phase(s, N)))


def orthogonal_trace_vectors(s, coefficients, N, chunk=256) -> complex:
    """Same trace, from the explicit singular vectors (never forming ``N x R`` in full)."""
    s = np.asarray(s)
    c = np.asarray(coefficients, dtype=complex)
    j = np.arange(N)
    total = 0j
    for lo in range(0, len(s), chunk):
        ss = s[lo:lo + chunk]
        phi = np.exp(2j * np.pi * np.outer(j, ss) / N)
        u = phi * (c[lo:lo + chunk] / np.abs(c[lo:lo + chunk])) / np.sqrt(N)
        v = phi.conj() / np.sqrt(N)
        # u^* J v where J reverses the row order
        total += np.sum(u.conj() * v[::-1])
    return complex(total)


def _draw_on_grid(N, R, rng):
    return np.sort(rng.choice(N, size=R, replace=False))


def orthogonal_atoms_margin(N: int, R: int, seed, adversarial=False):
    """Specialized weak condition ``T < N - R`` on a random on-grid instance.

    With ``adversarial`` the phases are set so every summand of ``T``
    equals 1.
    """
    if not 1 <= R <= N:
        raise ValueError(f"need 1 <= R <= N, got R={R}, N={N}")
    rng = np.random.default_rng(seed)
    s = _draw_on_grid(N, R, rng)
    c = experiment_coefficients(rng, R)
    if adversarial:
        c = np.abs(c) * _grid_phase(s, N)
    T = abs(orthogonal_trace_closed(s, c, N))
    return ConditionReport.compare(
        "theorem2", (N - R) - T, _strict(N),
        witness={"grid_indices": s.tolist(), "coefficients": complex_vector_to_pairs(c)},
        N=N, R=R, T=T, seed=seed, adversarial=adversarial,
    )


def theorem2_rank(N: int, c: float = 3.0) -> int:
    return int(N - math.ceil(c * math.sqrt(N * math.log(N))))


def tightness_instance(N: int, R: int, magnitudes=None, direct_max_n=256):
    """On-grid instance whose weak condition fails once ``R >= N/2``.

    Phases are aligned so ``u_k^* J v_k = 1`` for every atom.  Returns
    ``(signal, report)``; the report holds the weak margin with ``a = 1``.
    """
    if R > N:
        raise ValueError("R exceeds N")
    if 2 * R < N:
        return None, ConditionReport.inapplicable("tightness", "R < N/2", N=N, R=R)
    s = np.arange(R)
    mags = np.ones(R) if magnitudes is None else np.asarray(magnitudes, float)
    c = mags * _grid_phase(s, N)
    sig = orthogonal_instance(N, s, c)
    mask = SampleMask.all_but(2 * N - 1, [N - 1])
    z = NullSpaceVector.single(mask, N - 1)
    if N <= direct_max_n:
        rep = check_weak_nullspace(synthesize(sig), z, R)
        margin = rep.margin
        tr, rest = rep.details["trace_term"], rep.details["complement_nuclear"]
    else:
        tr = abs(orthogonal_trace_vectors(s, c, N))
        rest = float(N - R)
        margin = rest - tr
    rep = ConditionReport.compare(
        "tightness", margin, _strict(N),
        witness={"N": N, "R": R, "coefficients": complex_vector_to_pairs(c)},
        N=N, R=R, trace_term=tr, complement_nuclear=rest, closed_form_margin=N - 2 * R,
    )
    return sig, rep


def alternative_point(signal: SpectralSignal, eps: Optional[float] = None):
    """Feasible competitor ``x - eps * e_{N-1}`` for a tightness instance.

    Returns ``(x_alt, nuclear_alt, nuclear_true, closed_form_alt)`` where the
    closed form is ``sum |N |c_s| - eps| + (N - R) eps``.
    """
    N = signal.n_half
    c = signal.coefficients
    if eps is None:
        eps = 0.5 * N * float(np.abs(c).min())
    x = synthesize(signal)
    x_alt = x.copy()
    x_alt[N - 1] -= eps
    nuc_true = float(_sv(build_hankel(x, N)).sum())
    nuc_alt = float(_sv(build_hankel(x_alt, N)).sum())
    closed = float(np.abs(N * np.abs(c) - eps).sum() + (N - len(c)) * eps)
    return x_alt, nuc_alt, nuc_true, closed


# ---------------------------------------------------------------------------
# arbitrarily close atoms


def theorem3_rank(N: int, d_rel: float, c: float = 1.0) -> int:
    """Sparsity from the quadratic in ``R``; the smaller root keeps the
    threshold ``N - R - 4 sqrt(N) d_rel`` positive."""
    L = math.log(N)
    b = 2 * N - 8 * math.sqrt(N) * d_rel + 2 * c * L
    disc = 12 * c * N * L - 48 * c * math.sqrt(N) * d_rel * L + 4 * c * c * L * L
    if disc < 0:
        raise ValueError("no real sparsity level for these parameters")
    return int(math.floor((b - math.sqrt(disc)) / 2.0))


def close_atom_instance(N, R, d_rel, close_separation, seed):
    """``R - 1`` on-grid atoms plus one atom ``close_separation`` above one of them.

    Returns ``(signal, surrogate_grid_indices, surrogate_coefficients)``.
    The surrogate swaps the close atom for the nearest unused grid point
    with magnitude ``c_min``.
    """
    if d_rel <= 1.0:
        raise ValueError("d_rel must exceed 1 (|c_cl| > 0)")
    rng = np.random.default_rng(seed)
    s = _draw_on_grid(N, R - 1, rng)
    c = experiment_coefficients(rng, R - 1)
    c_min = float(np.abs(c).min())
    anchor = int(s[rng.integers(R - 1)])
    phase = np.exp(2j * np.pi * rng.random())
    c_cl = (d_rel - 1.0) * c_min * phase
    f_cl = (anchor / N + close_separation) % 1.0
    sig = SpectralSignal.from_arrays(N, np.append(s / N, f_cl), np.append(c, c_cl))
    used = set(s.tolist())
    free = np.array([k for k in range(N) if k not in used])
    dist = np.abs((free / N - f_cl + 0.5) % 1.0 - 0.5)
    rm = int(free[np.argmin(dist)])
    s_sur = np.append(s, rm)
    c_sur = np.append(c, c_min * phase)
    return sig, s_sur, c_sur


def perturbation_margin(N, R, d_rel=2.0, close_separation=1e-4, seed=0,
                        run_solver=None, solver_opts=None):
    """Sufficient condition ``T~ < N - R - 4 sqrt(N) d_rel`` on the surrogate.

    The solver is run on the true instance (mask all but ``N-1``) when
    ``run_solver`` is true; by default only for ``N <= 128``.
    """
    if close_separation == 0:
        return ConditionReport.inapplicable(
            "theorem3", "close atom coincides with a grid atom; only R-1 modes", N=N, R=R
        )
    if not 2 <= R <= N:
        raise ValueError("need 2 <= R <= N")
    sig, s_sur, c_sur = close_atom_instance(N, R, d_rel, close_separation, seed)
    T = abs(orthogonal_trace_closed(s_sur, c_sur, N))
    room = N - R - 4.0 * math.sqrt(N) * d_rel
    details = {"N": N, "R": R, "d_rel": d_rel, "T_surrogate": T, "room": room,
               "close_separation": close_separation, "seed": seed}
    if run_solver is None:
        run_solver = N <= 128
    if run_solver:
        from .recovery_solvers import recover_hankel_nnm, relative_error
        from .signal_model import sample_entries

        x = synthesize(sig)
        mask = SampleMask.all_but(2 * N - 1, [N - 1])
        res = recover_hankel_nnm(sample_entries(x, mask), N, solver_opts)
        details["solver_relative_error"] = relative_error(res.x_hat, x)
        details["solver_converged"] = res.converged
    if room <= 0:
        return ConditionReport.inapplicable(
            "theorem3", "N - R - 4 sqrt(N) d_rel <= 0", margin=room - T, **details
        )
    return ConditionReport.compare(
        "theorem3", room - T, _strict(N), witness={"signal": sig.to_dict()}, **details
    )


# ---------------------------------------------------------------------------
# separation necessity for the atomic norm


def unit_atom(f, length):
    return np.exp(2j * np.pi * f * np.arange(length)) / np.sqrt(length)


def atom_distance(f1, f2, length) -> float:
    """``||a(f1) - a(f2)||_2`` for unit-norm atoms of the given length."""
    return float(np.linalg.norm(unit_atom(f1, length) - unit_atom(f2, length)))


def separation_lower_bound(n: int) -> float:
    """``2 sigma_min(A) / sqrt(S)`` for the ``n`` orthonormal on-grid atoms.

    The atom matrix is unitary, so the value is ``2 / sqrt(n)``; the
    minimum singular value is computed rather than assumed.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    A = np.stack([unit_atom(k / n, n) for k in range(n)], axis=1)
    smin = float(_sv(A).min())
    return 2.0 * smin / math.sqrt(n)


# ---------------------------------------------------------------------------
# orthonormal atomic norm view of the nuclear norm


def oanm_properties(signal: SpectralSignal, rtol=1e-8, atol=1e-10):
    N = signal.n_half
    H = build_hankel(synthesize(signal), N)
    U, s, Vh = np.linalg.svd(H)
    R = signal.n_modes
    Ur, Vr = U[:, :R], Vh[:R].conj().T
    # <u_j v_j^*, u_k v_k^*> = (u_j^* u_k)(v_k^* v_j)
    gram = np.real((Ur.conj().T @ Ur) * (Vr.conj().T @ Vr).T)
    orth_err = float(np.abs(gram - np.eye(R)).max()) if R else 0.0
    nuc = float(s.sum())
    details = {"orthogonality_error": orth_err, "nuclear": nuc}
    slack = [atol - orth_err]

    f = signal.frequencies
    on_grid = (not signal.is_damped and np.allclose(f * N, np.round(f * N), atol=1e-12)
               and len(np.unique(np.round(f * N).astype(int) % N)) == R)
    details["on_grid_orthogonal"] = on_grid
    if on_grid:
        expect = np.sort(N * np.abs(signal.coefficients))[::-1]
        sv_err = float(np.max(np.abs(s[:R] - expect) / expect))
        coef_sum = float(expect.sum())
        sum_err = abs(nuc - coef_sum) / coef_sum
        details.update(sv_relative_error=sv_err, coefficient_sum=coef_sum,
                       sum_relative_error=sum_err)
        slack += [rtol - sv_err, rtol - sum_err]
    margin = min(slack)
    return ConditionReport.compare(
        "oanm", margin, 0.0, witness={"signal": signal.to_dict()}, **details
    )


# ---------------------------------------------------------------------------
# nuclear norm of a compression versus its complement


def coordinate_projector(size, k):
    P = np.zeros((size, size))
    P[np.arange(k), np.arange(k)] = 1.0
    return P


def random_projector(size, k, rng):
    G = rng.standard_normal((size, k)) + 1j * rng.standard_normal((size, k))
    Qm, _ = np.linalg.qr(G)
    return Qm @ Qm.conj().T


def _check_projector(P, size, k, name):
    P = np.asarray(P, dtype=complex)
    if P.shape != (size, size):
        raise ValueError(f"{name} must be {size}x{size}, got {P.shape}")
    tol = 1e-10 * max(1, size)
    if np.abs(P - P.conj().T).max() > tol:
        raise ValueError(f"{name} is not Hermitian")
    if np.abs(P @ P - P).max() > tol:
        raise ValueError(f"{name} is not idempotent")
    if abs(np.trace(P).real - k) > 1e-8:
        raise ValueError(f"{name} does not have rank {k}")
    return P


def nuclear_submatrix_inequality(A, k, P=None, Q=None):
    """``||P A Q^*||_* <= ||(I-P) A (I-Q)^*||_*`` for rank-``k`` projectors.

    Inapplicable unless ``sigma_1 + ... + sigma_k < sigma_{k+1} + ... + sigma_t``.
    """
    A = np.asarray(A, dtype=complex)
    m, n = A.shape
    s = _sv(A)
    top = float(s[:k].sum())
    rest = float(s[k:].sum())
    scale = float(s.sum())
    if not (1 <= k <= min(m, n)) or not top < rest:
        return ConditionReport.inapplicable(
            "theorem5", "precondition sigma_1..k < sigma_k+1..t fails", k=k,
            top=top, rest=rest,
        )
    P = coordinate_projector(m, k) if P is None else _check_projector(P, m, k, "P")
    Q = coordinate_projector(n, k) if Q is None else _check_projector(Q, n, k, "Q")
    lhs = float(_sv(P @ A @ Q.conj().T).sum())
    rhs = float(_sv((np.eye(m) - P) @ A @ (np.eye(n) - Q).conj().T).sum())
    return ConditionReport.compare(
        "theorem5", rhs - lhs, -_strict(scale),
        witness={"A": matrix_to_json(A), "k": k}, lhs=lhs, rhs=rhs, k=k,
    )


def sv_difference_majorization(X, Y, k):
    """Top-``k`` sum of ``|sigma_i(X) - sigma_i(Y)|`` is at most ``||X - Y||_(k)``."""
    X = np.asarray(X, dtype=complex)
    Y = np.asarray(Y, dtype=complex)
    if X.shape != Y.shape:
        raise ValueError(f"shape mismatch {X.shape} vs {Y.shape}")
    t = min(X.shape)
    if not 1 <= k <= t:
        raise ValueError(f"k must lie in 1..{t}")
    d = np.abs(_sv(X) - _sv(Y))
    lhs = _ky_fan(d, k)
    rhs = _ky_fan(_sv(X - Y), k)
    scale = max(float(_sv(X).sum()), float(_sv(Y).sum()))
    return ConditionReport.compare(
        "lemma7", rhs - lhs, -_strict(scale),
        witness={"X": matrix_to_json(X), "Y": matrix_to_json(Y), "k": k}, lhs=lhs, rhs=rhs,
    )


# ---------------------------------------------------------------------------
# 2 x 2 counterexample: the weak condition is not necessary


APPENDIX_X0 = np.array([[-1.0, 0.0], [0.0, 0.0]], dtype=complex)
APPENDIX_Q = np.ones((2, 2), dtype=complex)


def appendix_b_closed_form(a, theta) -> float:
    return math.sqrt(4 * a * a + 2 * a * (1 + math.cos(theta)) + 1)


def appendix_b_real_closed_form(t) -> float:
    return math.sqrt(4 * t * t + 1) if t >= 0 else 1 - 2 * t


def appendix_b_counterexample(a: float, theta: float, tol=1e-10):
    """``X0 + t Q`` with ``t = -a e^{-i theta}``: closed form, weak margin and uniqueness."""
    if a < 0:
        raise ValueError("a must be >= 0")
    t = -a * np.exp(-1j * theta)
    numeric = float(_sv(APPENDIX_X0 + t * APPENDIX_Q).sum())
    closed = appendix_b_closed_form(a, theta)
    weak, _, _ = weak_margin_matrix(APPENDIX_X0, APPENDIX_Q, 1)
    err = abs(numeric - closed)
    slack = [tol - err, 1e-12 - abs(weak)]
    if a > 0:
        slack.append(numeric - 1.0)
    return ConditionReport.compare(
        "appendixB", min(slack), 0.0, witness={"a": a, "theta": theta},
        numeric=numeric, closed_form=closed, weak_margin=weak, uniqueness_gap=numeric - 1.0,
    )


# ---------------------------------------------------------------------------
# subdifferential of the nuclear norm for complex matrices


def _compact_svd(X):
    X = np.asarray(X, dtype=complex)
    r = numerical_rank(X)
    U, s, Vh = np.linalg.svd(X)
    return U[:, :r], s[:r], Vh[:r].conj().T, U[:, r:], Vh[r:].conj().T


def subdifferential_membership(X, Z, tol=1e-10):
    """``Z = U V^* + W`` with ``U^* W = 0``, ``W V = 0`` and ``||W||_2 <= 1``."""
    U, _, V, _, _ = _compact_svd(X)
    W = np.asarray(Z, dtype=complex) - U @ V.conj().T
    a = float(np.linalg.norm(U.conj().T @ W))
    b = float(np.linalg.norm(W @ V))
    c = float(np.linalg.norm(W, 2)) if W.size else 0.0
    margin = min(tol - a, tol - b, 1.0 + tol - c)
    return ConditionReport.compare(
        "subdiff", margin, 0.0,
        witness={"X": matrix_to_json(X), "Z": matrix_to_json(Z)},
        left_leak=a, right_leak=b, spectral_norm_W=c,
    )


def random_subgradient(X, rng, spectral=None):
    """``U V^* + Ubar M Vbar^*`` with ``||M||_2`` uniform in [0, 1] (or ``spectral``)."""
    U, _, V, Ub, Vb = _compact_svd(X)
    Z = U @ V.conj().T
    if Ub.shape[1] and Vb.shape[1]:
        M = rng.standard_normal((Ub.shape[1], Vb.shape[1])) + \
            1j * rng.standard_normal((Ub.shape[1], Vb.shape[1]))
        target = rng.random() if spectral is None else spectral
        M *= target / np.linalg.norm(M, 2)
        Z = Z + Ub @ M @ Vb.conj().T
    return Z


def subgradient_gap(X, Z, Delta) -> float:
    """``||X + D||_* - ||X||_* - Re Tr(Z^* D)``; nonnegative for subgradients."""
    X = np.asarray(X, dtype=complex)
    return float(_sv(X + Delta).sum() - _sv(X).sum() - np.real(np.vdot(Z, Delta)))
