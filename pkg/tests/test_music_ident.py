import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hankelsr.music_ident import (
    SENTINEL,
    PeakCountError,
    imaging_function,
    run_music,
    write_peaks_json,
)
from hankelsr.signal_model import SpectralSignal, random_instance, shift_frequencies, synthesize
from oracles import dense_music_scan


def wrap_err(a, b):
    d = np.abs(np.sort(np.asarray(a) % 1) - np.sort(np.asarray(b) % 1))
    return np.minimum(d, 1 - d)


def test_on_grid_peak_is_huge():
    n = 16
    x = synthesize(SpectralSignal.from_arrays(n, [3 / n], [1.5]))
    assert imaging_function(x, 1, n, 3 / n) >= 1e10


def test_opposite_frequency_is_small():
    n = 16
    f0 = 3 / n
    x = synthesize(SpectralSignal.from_arrays(n, [f0], [1.0]))
    v = imaging_function(x, 1, n, (f0 + 0.5) % 1)
    assert np.isfinite(v) and v < 10
    # direct projection: phi(f) is orthogonal to phi(f0), so it lies in U2
    assert v == pytest.approx(1.0, rel=1e-10)


def test_imaging_function_vectorized():
    n = 8
    x = synthesize(random_instance(0, n, 2))
    f = np.linspace(0, 1, 7, endpoint=False)
    vals = imaging_function(x, 2, n, f)
    assert vals.shape == (7,)
    assert vals[2] == pytest.approx(imaging_function(x, 2, n, float(f[2])), rel=1e-13)


def test_single_on_grid_mode():
    n = 32
    x = synthesize(SpectralSignal.from_arrays(n, [5 / n], [2j]))
    est, prof = run_music(x, 1, n)
    assert wrap_err(est.frequencies, [5 / n])[0] < 1e-9
    assert 1e10 <= prof.values.max() <= SENTINEL


def test_well_separated_against_dense_scan():
    n = 16
    sig = random_instance(3, n, 4, separation_floor=0.1)
    x = synthesize(sig)
    est, _ = run_music(x, 4, n)
    assert wrap_err(est.frequencies, sig.frequencies).max() <= 1e-6
    dense = dense_music_scan(x, 4, n)
    assert wrap_err(est.frequencies, dense).max() <= 1e-6


def test_peaks_ordered_by_height():
    n = 16
    x = synthesize(random_instance(5, n, 3, separation_floor=0.1))
    est, prof = run_music(x, 3, n)
    assert np.all(np.diff(est.values) <= 0)
    assert [f for f, _ in prof.refined_peaks] == est.frequencies.tolist()


def test_wraparound_peak_near_zero():
    n = 16
    sig = SpectralSignal.from_arrays(n, [0.9999, 0.5], [1, 1])
    est, _ = run_music(synthesize(sig), 2, n)
    assert wrap_err(est.frequencies, sig.frequencies).max() < 1e-7


def test_peak_count_error():
    with pytest.raises(PeakCountError) as info:
        run_music(np.zeros(15, complex), 2, 8)
    assert info.value.found == 0 and info.value.wanted == 2


def test_argument_checks():
    x = synthesize(random_instance(0, 8, 2))
    with pytest.raises(ValueError):
        run_music(x, 2, 8, grid_size=16)
    with pytest.raises(ValueError):
        run_music(x, 8, 8)
    with pytest.raises(ValueError):
        run_music(x, 1, 7)


def test_profile_outputs(tmp_path):
    n = 8
    x = synthesize(random_instance(1, n, 2, separation_floor=0.2))
    est, prof = run_music(x, 2, n, grid_size=64)
    prof.to_csv(tmp_path / "p.csv")
    lines = (tmp_path / "p.csv").read_text().splitlines()
    assert lines[0] == "f,J" and len(lines) == 65
    write_peaks_json(tmp_path / "peaks.json", est, prof, {"R": 2})
    d = json.loads((tmp_path / "peaks.json").read_text())
    assert len(d["peaks"]) == 2 and d["R"] == 2 and d["spectral_gap"] > 1


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31), st.floats(0, 0.999))
def test_shift_covariance(seed, f0):
    n = 16
    sig = random_instance(seed, n, 3, separation_floor=0.08)
    x = synthesize(sig)
    a, _ = run_music(x, 3, n)
    b, _ = run_music(shift_frequencies(x, f0), 3, n)
    assert wrap_err((a.frequencies + f0) % 1, b.frequencies).max() < 1e-6
