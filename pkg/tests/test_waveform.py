import numpy as np
import pytest
from hypothesis import given, strategies as st

from uavisac.exceptions import InvalidArgumentError, WaveformOverrunError
from uavisac.params import RadarParams
from uavisac.waveform import (
    GolayPair,
    assemble_pri,
    build_cef_waveform,
    default_waveforms,
    export_sequence_csv,
    generate_golay_pair,
    gv512,
    raised_cosine_taps,
)

POWERS = [2 ** k for k in range(1, 10)]


def slow_autocorr(x):
    """Aperiodic autocorrelation by explicit double loop."""
    n = len(x)
    out = []
    for lag in range(-(n - 1), n):
        out.append(sum(int(x[i]) * int(x[i + lag]) for i in range(n) if 0 <= i + lag < n))
    return np.array(out)


def test_length_two_pair():
    pair = generate_golay_pair(2)
    assert pair.a.tolist() == [1, 1]
    assert pair.b.tolist() == [1, -1]
    assert pair.autocorrelation_sum().tolist() == [0, 4, 0]


@pytest.mark.parametrize("length", POWERS)
def test_pairs_are_complementary(length):
    pair = generate_golay_pair(length)
    assert set(np.unique(pair.a)) <= {-1, 1} and set(np.unique(pair.b)) <= {-1, 1}
    assert pair.is_complementary()


@pytest.mark.parametrize("length", [16, 128, 512])
def test_complementarity_against_loop_oracle(length):
    pair = generate_golay_pair(length)
    total = slow_autocorr(pair.a) + slow_autocorr(pair.b)
    expected = np.zeros(2 * length - 1, dtype=int)
    expected[length - 1] = 2 * length
    assert np.array_equal(total, expected)


def test_ga128_matches_published_prefix():
    # first 16 chips of Ga128 as tabulated for the 802.11ad PHY
    prefix = [1, 1, -1, -1, -1, -1, -1, -1, -1, 1, -1, 1, 1, -1, -1, 1]
    assert generate_golay_pair(128).a[:16].tolist() == prefix


@pytest.mark.parametrize("bad", [0, 1, 3, 6, 100, 1024, 2.5, True])
def test_bad_lengths_rejected(bad):
    with pytest.raises(InvalidArgumentError):
        generate_golay_pair(bad)


def test_pair_is_immutable():
    pair = generate_golay_pair(8)
    with pytest.raises(ValueError):
        pair.a[0] = 5


def test_pair_shape_mismatch():
    with pytest.raises(InvalidArgumentError):
        GolayPair([1, 1], [1, 1, 1])


def test_generation_is_deterministic():
    a, b = generate_golay_pair(512), generate_golay_pair(512)
    assert a.a.tobytes() == b.a.tobytes() and a.b.tobytes() == b.b.tobytes()


def test_gu512_layout():
    p128, p256 = generate_golay_pair(128), generate_golay_pair(256)
    gu = build_cef_waveform(p256).samples.real.astype(int)
    ga, gb = p128.a, p128.b
    assert np.array_equal(gu, np.concatenate([-gb, -ga, gb, -ga]))
    assert np.array_equal(gv512(p256), np.concatenate([-gb, ga, -gb, -ga]))


def test_single_gu_waveform_magnitudes():
    w = build_cef_waveform(generate_golay_pair(256))
    assert w.active_length == 512
    assert np.allclose(np.abs(w.samples), 1.0)


def test_single_gu_response_peaks_at_zero_lag():
    s = build_cef_waveform(generate_golay_pair(256)).samples.real.astype(int)
    acf = np.correlate(s, s, "full")
    mid = s.size - 1
    assert acf[mid] == 512
    assert np.max(np.abs(np.delete(acf, mid))) < 512


def test_complementary_pair_response_is_a_spike():
    first, second = build_cef_waveform(generate_golay_pair(256), "complementary_pair")
    x, y = first.samples.real.astype(int), second.samples.real.astype(int)
    total = np.convolve(x, x[::-1]) + np.convolve(y, y[::-1])
    mid = x.size - 1
    assert total[mid] == 1024
    assert not np.any(np.delete(total, mid))


def test_amplitude_scaling():
    w = build_cef_waveform(generate_golay_pair(256), amplitude=3.0)
    assert np.allclose(np.abs(w.samples), 3.0)
    assert w.energy == pytest.approx(9.0 * 512)


def test_wrong_constituent_length():
    with pytest.raises(InvalidArgumentError):
        build_cef_waveform(generate_golay_pair(128))
    with pytest.raises(InvalidArgumentError):
        build_cef_waveform(generate_golay_pair(256), variant="gv")


def test_assemble_pri_full_window(table_params):
    w = default_waveforms()[0]
    frame = assemble_pri(w, table_params)
    assert frame.size == 3520
    assert np.array_equal(frame[:512], w.samples)
    assert not np.any(frame[512:])


def test_assemble_pri_overrun():
    params = RadarParams(fast_time_window=256)
    with pytest.raises(WaveformOverrunError):
        assemble_pri(default_waveforms()[0], params)


def test_shaping_taps():
    taps = raised_cosine_taps(0.25, 8)
    assert taps.sum() == pytest.approx(1.0)
    assert np.allclose(taps, taps[::-1])
    w = default_waveforms(shaping=taps)[0]
    assert w.active_length == 512 + taps.size - 1
    with pytest.raises(InvalidArgumentError):
        raised_cosine_taps(1.5)


def test_csv_export(tmp_path):
    pair = generate_golay_pair(32)
    path = tmp_path / "a.csv"
    export_sequence_csv(pair.a, path)
    assert np.array_equal(np.loadtxt(path, dtype=int), pair.a)


@given(st.sampled_from(POWERS), st.integers(min_value=0, max_value=3))
def test_negation_and_reversal_preserve_complementarity(length, op):
    pair = generate_golay_pair(length)
    a, b = pair.a, pair.b
    transformed = [(a, b), (-a, b), (a[::-1], b), (b, a)][op]
    assert GolayPair(*transformed).is_complementary()
