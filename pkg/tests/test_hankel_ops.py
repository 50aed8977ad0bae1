import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hankelsr.hankel_ops import (
    FullMaskError,
    HankelShape,
    antidiagonal_weights,
    build_hankel,
    hankel_adjoint,
    inner,
    nuclear_norm,
    numerical_rank,
    w_min,
)
from hankelsr.signal_model import SampleMask, SpectralSignal, random_instance, synthesize
from oracles import hankel_loop


def rand_c(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def test_unrolled_definition():
    a, b, c = 1 + 1j, 2.0, -3j
    assert np.array_equal(build_hankel(np.array([a, b, c]), 2), [[a, b], [b, c]])


def test_matches_loop():
    x = rand_c(np.random.default_rng(0), 13)
    assert np.array_equal(build_hankel(x), hankel_loop(x, 7))


def test_length_checked():
    with pytest.raises(ValueError):
        build_hankel(np.ones(4))
    with pytest.raises(ValueError):
        build_hankel(np.ones(5), 2)


def test_single_mode_rank_one():
    x = synthesize(SpectralSignal.from_arrays(16, [0.37], [2 - 1j]))
    s = np.linalg.svd(build_hankel(x), compute_uv=False)
    assert s[1] / s[0] < 1e-10
    assert numerical_rank(build_hankel(x)) == 1


def test_generic_rank_five():
    x = synthesize(random_instance(4, 16, 5, separation_floor=0.02))
    s = np.linalg.svd(hankel_loop(x, 16), compute_uv=False)
    oracle = int(np.sum(s > 16 * s[0] * 1e-12))
    assert oracle == 5 == numerical_rank(build_hankel(x))


def test_adjoint_identity_2x2():
    assert hankel_adjoint(np.eye(2)).tolist() == [1, 0, 1]


def test_adjoint_inner_product():
    rng = np.random.default_rng(1)
    for n in (1, 2, 5, 9):
        x, M = rand_c(rng, 2 * n - 1), rand_c(rng, n, n)
        lhs = np.vdot(build_hankel(x), M)
        rhs = np.vdot(x, hankel_adjoint(M))
        assert abs(lhs - rhs) <= 1e-12 * max(1, abs(lhs))


def test_adjoint_of_basis_is_weight():
    n = 6
    w = antidiagonal_weights(n)
    for i in range(2 * n - 1):
        e = np.zeros(2 * n - 1)
        e[i] = 1
        out = hankel_adjoint(build_hankel(e))
        assert out[i] == w[i] and np.count_nonzero(out) == 1


def test_weights():
    assert antidiagonal_weights(3).tolist() == [1, 2, 3, 2, 1]
    assert antidiagonal_weights(1).tolist() == [1]
    w = antidiagonal_weights(64)
    assert w.max() == 64 and w[63] == 64 and np.array_equal(w, w[::-1])
    # direct cell counting
    counts = np.zeros(127, int)
    for j in range(64):
        for k in range(64):
            counts[j + k] += 1
    assert np.array_equal(w, counts)


def test_shape_helper():
    sh = HankelShape(4)
    assert sh.full_len == 7 and sh.weights.sum() == 16
    cells = list(sh.cells(3))
    assert len(cells) == 4 and all(j + k == 3 for j, k in cells)


def test_w_min_examples():
    assert w_min(SampleMask.all_but(127, [63]), 64) == 64
    assert w_min(SampleMask.all_but(5, [0]), 3) == 1
    with pytest.raises(FullMaskError):
        w_min(SampleMask.full(5), 3)


def test_w_min_exhaustive_scan():
    rng = np.random.default_rng(2)
    for _ in range(50):
        n = int(rng.integers(2, 20))
        L = 2 * n - 1
        mask = SampleMask.random(L, int(rng.integers(0, L)), rng.integers(1 << 30))
        best = min(min(i + 1, L - i) for i in range(L) if i not in mask.observed)
        assert w_min(mask, n) == best


def test_nuclear_and_inner():
    A = np.diag([3.0, -2.0, 0.5])
    assert nuclear_norm(A) == pytest.approx(5.5)
    assert inner(1j * np.eye(2), 1j * np.eye(2)) == pytest.approx(2.0)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 40))
def test_weights_sum_to_square(n):
    w = antidiagonal_weights(n)
    assert w.sum() == n * n and len(w) == 2 * n - 1


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 15), st.integers(0, 2**31))
def test_adjoint_property(n, seed):
    rng = np.random.default_rng(seed)
    x, M = rand_c(rng, 2 * n - 1), rand_c(rng, n, n)
    assert np.isclose(np.vdot(build_hankel(x), M), np.vdot(x, hankel_adjoint(M)),
                      rtol=1e-12, atol=1e-12)
    # adjoint after lifting is elementwise weighting
    assert np.allclose(hankel_adjoint(build_hankel(x)), antidiagonal_weights(n) * x)
