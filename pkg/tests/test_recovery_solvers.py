import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hankelsr import io
from hankelsr.recovery_solvers import (
    ANM_OPTIONS,
    RecoveryResult,
    SolverOptions,
    recover_anm,
    recover_hankel_nnm,
    recover_hankel_nnm_noisy,
    relative_error,
    svt,
)
from hankelsr.signal_model import (
    SampleMask,
    SpectralSignal,
    add_noise,
    random_instance,
    sample_entries,
    sample_gaussian,
    synthesize,
)
from oracles import anm_sdp, hankel_sdp


def instance(seed, n, r, m, floor=None):
    sig = random_instance(seed, n, r, separation_floor=floor)
    x = synthesize(sig)
    mask = SampleMask.random(sig.length, m, seed + 1000)
    return x, sample_entries(x, mask)


def test_relative_error():
    x = np.array([1 + 1j, 2, -3j])
    assert relative_error(x, x) == 0
    assert relative_error(2 * x, x) == pytest.approx(1.0)
    y = x + np.array([0.1, -0.2j, 0.3])
    assert relative_error(y, x) == pytest.approx(np.linalg.norm(y - x) / np.linalg.norm(x))
    with pytest.raises(ValueError):
        relative_error(x, np.zeros(3))
    with pytest.raises(ValueError):
        relative_error(x, x[:2])


def test_svt_trivial():
    rng = np.random.default_rng(0)
    M = rng.standard_normal((4, 6)) + 1j * rng.standard_normal((4, 6))
    assert np.allclose(svt(M, 0.0), M, atol=1e-12)
    s1 = np.linalg.svd(M, full_matrices=False)[1][0]
    assert np.array_equal(svt(M, s1), np.zeros((4, 6)))
    assert np.array_equal(svt(M, 2 * s1), np.zeros((4, 6)))
    with pytest.raises(ValueError):
        svt(M, -1)


def test_svt_third_singular_value():
    rng = np.random.default_rng(1)
    M = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    s = np.linalg.svd(M, compute_uv=False)
    out = svt(M, s[2])
    so = np.linalg.svd(out, compute_uv=False)
    assert np.sum(so > 1e-10 * s[0]) <= 2
    assert so.sum() == pytest.approx(np.maximum(s - s[2], 0).sum(), rel=1e-12)


def test_options_validation():
    with pytest.raises(ValueError):
        SolverOptions(max_iters=0)
    with pytest.raises(ValueError):
        SolverOptions(tol=0)
    with pytest.raises(ValueError):
        SolverOptions(rho=-1)


def test_full_mask_is_exact():
    x = synthesize(random_instance(0, 8, 3))
    res = recover_hankel_nnm(sample_entries(x, SampleMask.full(15)), 8)
    assert np.array_equal(res.x_hat, x) and res.converged


def test_small_instance_against_sdp():
    x, meas = instance(7, 8, 1, 9)
    res = recover_hankel_nnm(meas, 8)
    assert res.converged
    assert relative_error(res.x_hat, x) <= 1e-6
    x_sdp, val = hankel_sdp(8, meas.mask.indices, meas.values)
    assert relative_error(res.x_hat, x_sdp) <= 1e-5
    assert res.objective == pytest.approx(val, rel=1e-6)


def test_noisy_against_sdp():
    x, meas = instance(3, 6, 2, 9)
    meas = add_noise(meas, 0.05, 2)
    res = recover_hankel_nnm_noisy(meas, 6, SolverOptions(tol=1e-9))
    assert np.linalg.norm(res.x_hat[meas.mask.indices] - meas.values) <= 0.05 * (1 + 1e-6)
    x_sdp, val = hankel_sdp(6, meas.mask.indices, meas.values, delta=0.05)
    assert relative_error(res.x_hat, x_sdp) <= 1e-4
    assert res.objective == pytest.approx(val, rel=1e-5)


def test_noisy_trivial_zero():
    x, meas = instance(1, 8, 2, 10)
    delta = 10 * np.linalg.norm(meas.values)
    res = recover_hankel_nnm_noisy(meas, 8, delta=delta)
    assert np.array_equal(res.x_hat, np.zeros(15)) and res.objective == 0
    assert res.info["trivial_zero"]


def test_noisy_small_delta_continuity():
    x, meas = instance(5, 8, 2, 12)
    exact = recover_hankel_nnm(meas, 8)
    near = recover_hankel_nnm_noisy(meas, 8, delta=1e-8)
    assert np.linalg.norm(near.x_hat - exact.x_hat) <= 1e-4 * np.linalg.norm(exact.x_hat)


def test_noisy_rejections():
    x, meas = instance(1, 8, 2, 10)
    with pytest.raises(ValueError):
        recover_hankel_nnm_noisy(meas, 8)
    with pytest.raises(ValueError):
        recover_hankel_nnm(add_noise(meas, 0.1, 0), 8)
    with pytest.raises(NotImplementedError):
        recover_hankel_nnm_noisy(sample_gaussian(x, 10, 0), 8, delta=0.1)


def test_dimension_mismatch():
    x, meas = instance(1, 8, 2, 10)
    with pytest.raises(ValueError):
        recover_hankel_nnm(meas, 7)
    with pytest.raises(ValueError):
        recover_anm(meas, 9)


def test_gaussian_sampling_recovers():
    sig = random_instance(4, 12, 2)
    x = synthesize(sig)
    res = recover_hankel_nnm(sample_gaussian(x, 15, 3), 12)
    assert relative_error(res.x_hat, x) <= 1e-5


def test_anm_single_atom():
    sig = SpectralSignal.from_arrays(16, [0.213], [2 * np.exp(1j)])
    x = synthesize(sig)
    meas = sample_entries(x, SampleMask.random(31, 12, 0))
    assert relative_error(recover_anm(meas, 16).x_hat, x) <= 1e-3


def test_anm_against_sdp():
    x, meas = instance(2, 8, 2, 9, floor=0.2)
    res = recover_anm(meas, 8, SolverOptions(tol=1e-8, max_iters=20000, adapt_every=25))
    x_sdp, val = anm_sdp(15, meas.mask.indices, meas.values)
    assert relative_error(res.x_hat, x_sdp) <= 1e-5
    assert res.objective == pytest.approx(val, rel=1e-5)


def test_anm_full_mask_at_safe_separation():
    n = 64
    ok = 0
    for seed in range(20):
        sig = random_instance(seed, n, 4, separation_floor=4 / (2 * n - 1))
        x = synthesize(sig)
        res = recover_anm(sample_entries(x, SampleMask.full(2 * n - 1)), n)
        ok += relative_error(res.x_hat, x) <= 1e-3
    assert ok == 20


def test_anm_gaussian_sampling():
    sig = random_instance(6, 10, 1)
    x = synthesize(sig)
    res = recover_anm(sample_gaussian(x, 12, 1), 10)
    assert relative_error(res.x_hat, x) <= 1e-3


def test_nonconvergence_is_reported():
    x, meas = instance(8, 16, 4, 20)
    res = recover_hankel_nnm(meas, 16, SolverOptions(max_iters=3))
    assert not res.converged and res.iterations == 3
    assert recover_anm(meas, 16, SolverOptions(max_iters=3)).converged is False


def test_result_roundtrip():
    x, meas = instance(9, 6, 1, 8)
    res = recover_hankel_nnm(meas, 6)
    back = RecoveryResult.from_dict(json.loads(io.dumps(res.to_dict())))
    assert np.array_equal(back.x_hat, res.x_hat)
    assert back.iterations == res.iterations and back.solver == "hankel"


def test_anm_defaults():
    assert ANM_OPTIONS.tol == 1e-5 and ANM_OPTIONS.max_iters == 5000


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**31), st.integers(3, 8))
def test_observed_entries_are_pinned(seed, n):
    rng = np.random.default_rng(seed)
    L = 2 * n - 1
    x = rng.standard_normal(L) + 1j * rng.standard_normal(L)
    mask = SampleMask.random(L, int(rng.integers(1, L)), seed)
    res = recover_hankel_nnm(sample_entries(x, mask), n, SolverOptions(max_iters=500))
    assert np.allclose(res.x_hat[mask.indices], x[mask.indices], atol=1e-12)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**31), st.floats(0, 0.999))
def test_recovery_commutes_with_modulation(seed, f0):
    # a frequency shift keeps the rank and the problem is otherwise unchanged
    n = 8
    x, meas = instance(seed % 1000, n, 2, 11)
    mod = np.exp(2j * np.pi * f0 * np.arange(2 * n - 1))
    shifted = sample_entries(x * mod, meas.mask)
    a = recover_hankel_nnm(meas, n).x_hat
    b = recover_hankel_nnm(shifted, n).x_hat
    assert np.allclose(b, a * mod, atol=1e-5 * np.linalg.norm(x))


def test_undersampled_objective_not_worse_than_sdp():
    # with few samples the minimizer is flat; compare optimal values instead of x
    rng = np.random.default_rng(2024)
    for _ in range(5):
        n = int(rng.integers(4, 8))
        R = int(rng.integers(1, n // 2 + 1))
        x, meas = instance(int(rng.integers(1 << 20)), n, R, 2 * R)
        res = recover_hankel_nnm(meas, n)
        _, val = hankel_sdp(n, meas.mask.indices, meas.values)
        assert res.objective <= val * (1 + 1e-7)
