import cmath
import math

import numpy as np
import pytest

from uavisac.channel import (
    DataCube,
    NoiseModel,
    PathPair,
    fresnel_gamma,
    noise_only_cube,
    path_pair,
    propagation_gain,
    synthesize_datacube,
)
from uavisac.exceptions import InvalidArgumentError, InvalidGeometryError
from uavisac.geometry import (
    NO_GROUND,
    GroundModel,
    PolarimetricRcs,
    Scene,
    Target,
    UcaGeometry,
    generate_clutter,
    target_position_at,
)
from uavisac.params import RadarParams
from uavisac.waveform import default_waveforms

SMALL = RadarParams(cpi=8 * 2e-6, fast_time_window=1024)


def fresnel_oracle(psi, eps):
    s, c2 = math.sin(psi), math.cos(psi) ** 2
    root = cmath.sqrt(eps - c2)
    return (s - root) / (s + root), (eps * s - root) / (eps * s + root)


def test_fresnel_pec_limit():
    gh, gv = fresnel_gamma(0.3, GroundModel(relative_permittivity=1e14))
    assert gh == pytest.approx(-1.0, abs=1e-6)
    assert gv == pytest.approx(1.0, abs=1e-6)


def test_fresnel_normal_incidence():
    gh, gv = fresnel_gamma(math.pi / 2, GroundModel(relative_permittivity=3.0))
    assert complex(gh) == pytest.approx((1 - math.sqrt(3)) / (1 + math.sqrt(3)))
    assert complex(gh).real == pytest.approx(-0.268, abs=1e-3)


@pytest.mark.parametrize("psi", [0.05, 0.3, 0.9, 1.4])
def test_fresnel_against_formula(psi):
    eps = 5 - 0.5j
    gh, gv = fresnel_gamma(psi, GroundModel(relative_permittivity=eps))
    oh, ov = fresnel_oracle(psi, eps)
    assert complex(gh) == pytest.approx(oh, rel=1e-12)
    assert complex(gv) == pytest.approx(ov, rel=1e-12)
    assert abs(gh) <= 1 and abs(gv) <= 1


def test_fresnel_fixed_mode():
    gh, gv = fresnel_gamma(np.array([0.1, 0.2]), NO_GROUND)
    assert np.all(gh == 0) and np.all(gv == 0)
    gh, gv = fresnel_gamma(0.4, GroundModel(mode="fixed", fixed_gamma_h=-0.3, fixed_gamma_v=0.2j))
    assert complex(gh) == -0.3 and complex(gv) == 0.2j


def test_gain_single_path():
    g = propagation_gain(PathPair(1.0, 2.0, 0.1), 0.0, 2 * math.pi / 0.005)
    assert abs(g) == pytest.approx(1 / math.sqrt(4 * math.pi))
    assert abs(g) == pytest.approx(0.28209, abs=1e-5)


def test_gain_cancellation():
    g = propagation_gain(PathPair(3.0, 3.0, 0.0), -1.0, 1234.5)
    assert abs(g) == 0.0


def test_gain_hand_evaluation():
    k = 2 * math.pi / 0.005
    direct = cmath.exp(-1j * k * 5.0) / (math.sqrt(4 * math.pi) * 5.0)
    bounce = -0.3 * cmath.exp(-1j * k * 5.4) / (math.sqrt(4 * math.pi) * 5.4)
    got = propagation_gain(PathPair(5.0, 5.4, 0.2), -0.3, k)
    assert got == pytest.approx(direct + bounce, rel=1e-12)


def test_gain_rejects_zero_range():
    with pytest.raises(InvalidGeometryError):
        propagation_gain(PathPair(0.0, 1.0, 0.0), 0.0, 1.0)


def test_path_pair_image_method():
    r, rr, psi = path_pair([0, 0, 20.0], [4.0, 3.0, 5.0])
    assert r == pytest.approx(math.sqrt(16 + 9 + 225))
    assert rr == pytest.approx(math.sqrt(16 + 9 + 625))
    assert psi == pytest.approx(math.asin(25 / rr))
    assert rr >= r


def _reference_cube(scene, params, wave):
    """Explicit loop over packets, elements, legs and polarisations."""
    elems = scene.uca.positions()
    k, lam = params.wavenumber, params.wavelength
    xi = [scene.uca.element_pattern_h, scene.uca.element_pattern_v]
    out = np.zeros((2, scene.uca.n_elements, params.n_fast, params.n_packets), dtype=complex)
    eps = scene.ground.relative_permittivity
    for q in range(params.n_packets):
        for tgt in scene.targets:
            pos = target_position_at(tgt, q * params.pri, scene.uca.center)
            s = tgt.rcs.scattering_matrix()
            legs = []
            for e in elems:
                img = pos * np.array([1, 1, -1])
                rd, rr = np.linalg.norm(pos - e), np.linalg.norm(img - e)
                psi = math.asin((e[2] + pos[2]) / rr)
                gh, gv = fresnel_oracle(psi, eps) if scene.ground.enabled else (0, 0)
                legs.append([(rd, (1, 1)), (rr, (gh, gv))])
            for n_rx in range(len(elems)):
                for n_tx in range(len(elems)):
                    for l_tx, (lt, gam_t) in enumerate(legs[n_tx]):
                        for l_rx, (lr, gam_r) in enumerate(legs[n_rx]):
                            prop = (cmath.exp(-1j * k * (lt + lr))
                                    / (4 * math.pi * lt * lr))
                            delay = int(round((lt + lr) * params.sample_rate / params.c))
                            for p_rx in range(2):
                                amp = 0
                                for p_in in range(2):
                                    amp += (s[p_rx, p_in] * scene.uca.beam_weights[n_tx]
                                            * xi[p_in] * gam_t[p_in])
                                amp *= gam_r[p_rx] * xi[p_rx] * prop
                                amp *= params.amplitude * lam / math.sqrt(4 * math.pi)
                                seg = wave[: params.n_fast - delay]
                                out[p_rx, n_rx, delay:delay + seg.size, q] += amp * seg
    return out


@pytest.mark.parametrize("ground", [NO_GROUND, GroundModel(relative_permittivity=4 - 0.3j)])
def test_synthesis_matches_loop_oracle(ground):
    params = RadarParams(cpi=3 * 2e-6, fast_time_window=800)
    uca = UcaGeometry(3, 0.01, (0, 0, 4.0), beam_weights=[1, 0.5j, -0.8],
                      element_pattern_h=0.7, element_pattern_v=1.2)
    tgt = Target((6.0, 30.0, 110.0), 7.0, PolarimetricRcs(2.0, 0.3, 0.5, 4.0, (0, 1, 2, 3)))
    scene = Scene(uca, [tgt], ground=ground)
    wave = default_waveforms()[0]
    h, v = synthesize_datacube(scene, params, wave)
    ref = _reference_cube(scene, params, wave.samples)
    scale = np.max(np.abs(ref))
    assert np.max(np.abs(h.samples - ref[0])) <= 1e-10 * scale
    assert np.max(np.abs(v.samples - ref[1])) <= 1e-10 * scale


def _single(target, ground=NO_GROUND, params=SMALL, uca=None):
    uca = uca or UcaGeometry(8, 0.0033, (0, 0, 20.0))
    return synthesize_datacube(Scene(uca, [target], ground=ground), params, default_waveforms()[0])


def test_static_target_is_constant_in_slow_time():
    h, v = _single(Target((5.0, 165.0, 95.0), 0.0, PolarimetricRcs(2, 0, 0, 10)))
    x = v.samples
    assert np.max(np.abs(x - x[:, :, :1])) == 0.0
    assert np.var(x, axis=2).max() == 0.0


def test_static_target_delay_bin():
    h, v = _single(Target((5.0, 165.0, 95.0), 0.0))
    x = v.samples[0, :, 0]
    wave = default_waveforms()[0].samples
    start = int(np.flatnonzero(np.abs(x) > 1e-9 * np.abs(x).max())[0])
    assert start == round(2 * 5.0 / 299792458.0 * 1.76e9) == 59
    gain = x[start] / wave[0]
    assert np.allclose(x[start:start + 512], gain * wave, rtol=0, atol=1e-12 * abs(gain))


def test_approaching_target_phase_progression():
    params = SMALL
    h, v = _single(Target((5.0, 0.0, 100.0), 4.0), params=params)
    x = v.samples[0, 59 + 100, :]
    step = np.angle(x[1:] / x[:-1])
    expected = 2 * np.pi * (2 * 4.0 / params.wavelength) * params.pri
    assert np.allclose(step, expected, atol=1e-3)
    f_d = expected / (2 * np.pi * params.pri)
    assert f_d == pytest.approx(1600, rel=2e-3)


def test_linearity_in_amplitude():
    tgt = Target((7.0, 20.0, 120.0), 3.0)
    _, v1 = _single(tgt)
    _, v2 = _single(tgt, params=RadarParams(cpi=SMALL.cpi, fast_time_window=1024,
                                            energy_per_sample=9.0))
    assert np.max(np.abs(v2.samples - 3.0 * v1.samples)) <= 1e-12 * np.max(np.abs(v2.samples))


def test_superposition():
    uca = UcaGeometry(8, 0.0033, (0, 0, 20.0))
    t1 = Target((5.0, 165.0, 95.0), 4.0, PolarimetricRcs(2, 0, 0, 10))
    t2 = Target((10.0, 120.0, 130.0), 18.0, PolarimetricRcs(1, 0, 0, 5))
    g = GroundModel()
    wave = default_waveforms()[0]
    both = synthesize_datacube(Scene(uca, [t1, t2], ground=g), SMALL, wave)
    one = synthesize_datacube(Scene(uca, [t1], ground=g), SMALL, wave)
    two = synthesize_datacube(Scene(uca, [t2], ground=g), SMALL, wave)
    for p in range(2):
        s = one[p].samples + two[p].samples
        assert np.max(np.abs(both[p].samples - s)) <= 1e-12 * np.max(np.abs(s))


@pytest.mark.parametrize("ground", [NO_GROUND, GroundModel(mode="fixed", fixed_gamma_h=-0.4,
                                                            fixed_gamma_v=-0.4)])
def test_cross_polar_reciprocity(ground):
    hv_only = Target((6.0, 40.0, 115.0), 2.0, PolarimetricRcs(0.0, 1.5, 0.0, 0.0))
    vh_only = Target((6.0, 40.0, 115.0), 2.0, PolarimetricRcs(0.0, 0.0, 1.5, 0.0))
    h_resp, _ = _single(hv_only, ground)
    _, v_resp = _single(vh_only, ground)
    assert np.max(np.abs(h_resp.samples)) > 0
    assert np.allclose(h_resp.samples, v_resp.samples, rtol=0, atol=1e-15)


def test_co_polar_targets_do_not_leak():
    h, v = _single(Target((6.0, 40.0, 115.0), 2.0, PolarimetricRcs(0.0, 0.0, 0.0, 1.0)),
                   GroundModel())
    assert not np.any(h.samples)
    assert np.any(v.samples)


def test_noise_determinism_and_power():
    params = RadarParams(cpi=64 * 2e-6, fast_time_window=512)
    scene = Scene(UcaGeometry(4, 0.002, (0, 0, 20.0)), [])
    wave = default_waveforms()[0]
    a = synthesize_datacube(scene, params, wave, NoiseModel(2.0, seed=9))
    b = synthesize_datacube(scene, params, wave, NoiseModel(2.0, seed=9))
    c = synthesize_datacube(scene, params, wave, NoiseModel(2.0, seed=10))
    assert a[1].samples.tobytes() == b[1].samples.tobytes()
    assert a[1].samples.tobytes() != c[1].samples.tobytes()
    assert np.mean(np.abs(a[0].samples) ** 2) == pytest.approx(2.0, rel=0.02)
    only = noise_only_cube(params, 4, NoiseModel(2.0, seed=9), "H")
    assert np.array_equal(only.samples, a[0].samples)


def test_noise_model_validation():
    with pytest.raises(InvalidArgumentError):
        NoiseModel(-1.0)


def test_beyond_window_is_excluded(caplog):
    params = RadarParams(cpi=4 * 2e-6, fast_time_window=600)
    h, v = _single(Target((60.0, 0.0, 100.0), 1.0), params=params)
    assert v.info["excluded"] == ["target0"]
    assert not np.any(v.samples)


def test_clutter_is_static_and_without_bounce():
    params = RadarParams(cpi=4 * 2e-6, fast_time_window=1024)
    uca = UcaGeometry(8, 0.0033, (0, 0, 20.0))
    clutter = generate_clutter((-3, 3, -3, 3), 1.0, -5.0, seed=4)
    wave = default_waveforms()[0]
    with_ground = synthesize_datacube(Scene(uca, [], clutter, GroundModel()), params, wave)
    no_ground = synthesize_datacube(Scene(uca, [], clutter, NO_GROUND), params, wave)
    x = with_ground[1].samples
    assert np.any(x)
    assert np.max(np.abs(x - x[:, :, :1])) == 0.0
    assert np.array_equal(x, no_ground[1].samples)


def test_target_below_ground_rejected():
    with pytest.raises(InvalidGeometryError):
        _single(Target((30.0, 0.0, 180.0), 1.0))


def test_cube_validation():
    with pytest.raises(InvalidArgumentError):
        DataCube(np.zeros((2, 2)), "V", SMALL)
    with pytest.raises(InvalidArgumentError):
        DataCube(np.zeros((2, 2, 2)), "X", SMALL)


def test_sinc_interpolation_preserves_peak_location():
    params = RadarParams(cpi=2 * 2e-6, fast_time_window=1024)
    uca = UcaGeometry(8, 0.0033, (0, 0, 20.0))
    scene = Scene(uca, [Target((5.0, 165.0, 95.0), 0.0)], ground=NO_GROUND)
    wave = default_waveforms()[0]
    near = synthesize_datacube(scene, params, wave)[1].samples[0, :, 0]
    sinc = synthesize_datacube(scene, params, wave, interpolation="sinc")[1].samples[0, :, 0]
    ref = wave.samples
    corr_n = np.abs(np.correlate(near, ref, "valid"))
    corr_s = np.abs(np.correlate(sinc, ref, "valid"))
    assert abs(int(np.argmax(corr_n)) - int(np.argmax(corr_s))) <= 1
    with pytest.raises(InvalidArgumentError):
        synthesize_datacube(scene, params, wave, interpolation="cubic")
