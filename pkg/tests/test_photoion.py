import math
import warnings

import numpy as np
import pytest
import scipy.constants as sc
from hypothesis import given, settings
from hypothesis import strategies as st

from iontrap import photoion as pi
from iontrap.physcore import AtomicVapor, DomainError, GaussianFocus, IntensityConvention, PulsedLaser


def lab_setup(power=0.05, pressure_torr=1e-9):
    laser = PulsedLaser(431e-9, power, 82e6, 100e-15)
    focus = GaussianFocus(10e-6, 431e-9)
    vapor = AtomicVapor(pressure_torr * 101325 / 760, 300.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", pi.RayleighLengthWarning)
        geom = pi.InteractionGeometry(focus, 1e-3)
    return laser, focus, vapor, geom


def hand_rate(intensity):
    """Independent evaluation of the loading chain with scipy constants."""
    e_ph = sc.h * sc.c / 431e-9
    p = intensity**2 * 1e-34 / e_ph * 100e-15
    n0 = 1e-9 * 101325 / 760 / (sc.k * 300)
    w0, L, T = 10e-6, 1e-3, 1 / 82e6
    return p, n0, p * (n0 * w0 / (8 * T)) * (2 * math.pi * w0 * L)


def test_total_cross_section():
    assert pi.total_cross_section(pi.TwoPhotonAmplitudeSet()).sigma_prime == 0.0
    one = pi.total_cross_section(pi.TwoPhotonAmplitudeSet(((0, 1.0),)))
    assert one.sigma_prime == pytest.approx(5.7466e-43, rel=1e-12)
    two = pi.total_cross_section(pi.TwoPhotonAmplitudeSet(((0, 3 + 4j), (2, 1.0))))
    assert two.sigma_prime == pytest.approx(26 * 5.7466e-43, rel=1e-12)


def test_amplitude_j_restricted():
    with pytest.raises(ValueError):
        pi.TwoPhotonAmplitudeSet(((1, 1.0),))


@given(st.lists(st.tuples(st.sampled_from([0, 2]), st.complex_numbers(max_magnitude=1e3)), max_size=6),
       st.floats(0, 2 * math.pi), st.randoms())
def test_cross_section_permutation_and_phase_invariance(amps, phase, rnd):
    base = pi.total_cross_section(pi.TwoPhotonAmplitudeSet(tuple(amps))).sigma_prime
    shuffled = list(amps)
    rnd.shuffle(shuffled)
    rot = [(j, t * complex(math.cos(phase), math.sin(phase))) for j, t in shuffled]
    other = pi.total_cross_section(pi.TwoPhotonAmplitudeSet(tuple(rot))).sigma_prime
    assert other == pytest.approx(base, rel=1e-12, abs=1e-300)


def test_cross_section_non_negative():
    with pytest.raises(ValueError):
        pi.CrossSection(-1e-40)
    assert pi.DEFAULT_CROSS_SECTION.sigma_prime == pytest.approx(1e-34)


def test_probability_examples():
    s = pi.CrossSection(1e-34)
    assert pi.ionization_probability_per_pulse(0.0, s, 4.61e-19, 1e-13) == 0.0
    p = pi.ionization_probability_per_pulse(3.9e13, s, 4.61e-19, 1e-13)
    assert p == pytest.approx(3.3e-2, rel=1e-2)
    with pytest.warns(pi.PerturbativeValidityWarning):
        p2 = pi.ionization_probability_per_pulse(7.8e13, s, 4.61e-19, 1e-13)
    assert p2 == pytest.approx(4 * p, rel=1e-15)


def test_probability_warns_but_does_not_clamp():
    with pytest.warns(pi.PerturbativeValidityWarning):
        p = pi.ionization_probability_per_pulse(1e15, pi.CrossSection(1e-34), 4.61e-19, 1e-13)
    assert p > 1.0


def test_probability_domain():
    with pytest.raises(DomainError):
        pi.ionization_probability_per_pulse(1.0, pi.CrossSection(1e-34), 0.0, 1e-13)
    with pytest.raises(DomainError):
        pi.ionization_probability_per_pulse(-1.0, pi.CrossSection(1e-34), 1e-19, 1e-13)


def test_loading_rate_examples():
    _, _, _, geom = lab_setup()
    assert pi.loading_rate(0.033, 0.0, geom, 12.2e-9) == 0.0
    r = pi.loading_rate(3.3e-2, 3.22e13, geom, 12.2e-9)
    assert r == pytest.approx(7e6, rel=0.05)
    with pytest.warns(pi.RayleighLengthWarning):
        geom2 = pi.InteractionGeometry(geom.focus, 2e-3)
    assert pi.loading_rate(3.3e-2, 3.22e13, geom2, 12.2e-9) == pytest.approx(2 * r, rel=1e-15)


def test_geometry_rayleigh_warning():
    focus = GaussianFocus(10e-6, 431e-9)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        short = pi.InteractionGeometry(focus, 0.5e-3)
    assert short.within_rayleigh
    with pytest.warns(pi.RayleighLengthWarning):
        assert not pi.InteractionGeometry(focus, 1e-3).within_rayleigh
    with pytest.raises(ValueError):
        pi.InteractionGeometry(focus, 0.0)


@pytest.mark.parametrize("conv", list(IntensityConvention))
def test_rate_report_matches_hand_chain(conv):
    laser, focus, vapor, geom = lab_setup()
    rep = pi.rate_report(laser, focus, vapor, pi.CrossSection(1e-34), geom, conv)
    pk = 2 * (0.05 / 82e6 / 100e-15) / (math.pi * 1e-10)
    av = 2 * 0.05 / (math.pi * 1e-10)
    i = pk if conv is IntensityConvention.PEAK else av
    p, n0, r = hand_rate(i)
    assert rep.convention is conv
    assert rep.intensity == pytest.approx(i, rel=1e-12)
    assert rep.p_ion == pytest.approx(p, rel=1e-9)
    assert rep.density == pytest.approx(n0, rel=1e-9)
    assert rep.rate == pytest.approx(r, rel=1e-9)
    assert rep.trap_length == 1e-3
    assert "Rayleigh" in " ".join(rep.warnings)
    row = rep.as_row()
    assert row["rate_s"] == rep.rate
    assert row["convention_id"] == (0.0 if conv is IntensityConvention.PEAK else 1.0)


def test_rate_report_orders_of_magnitude():
    laser, focus, vapor, geom = lab_setup()
    s = pi.CrossSection(1e-34)
    peak = pi.rate_report(laser, focus, vapor, s, geom, "peak").rate
    avg = pi.rate_report(laser, focus, vapor, s, geom, "time-averaged").rate
    assert peak == pytest.approx(7e6, rel=0.05)
    assert avg == pytest.approx(4.7e-4, rel=0.05)


def test_rate_report_zero_power():
    laser, focus, vapor, geom = lab_setup(power=0.0)
    rep = pi.rate_report(laser, focus, vapor, pi.CrossSection(1e-34), geom, "peak")
    assert rep.intensity == rep.p_ion == rep.rate == 0.0


def test_rate_report_focus_must_match():
    laser, focus, vapor, geom = lab_setup()
    with pytest.raises(ValueError):
        pi.rate_report(laser, GaussianFocus(20e-6, 431e-9), vapor, pi.CrossSection(1e-34), geom, "peak")


def _rate(power, pressure_torr, conv):
    laser, focus, vapor, geom = lab_setup(power, pressure_torr)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return pi.rate_report(laser, focus, vapor, pi.CrossSection(1e-34), geom, conv).rate


@settings(max_examples=50, deadline=None)
@given(st.floats(1e-4, 1.0), st.floats(1.5, 10.0), st.sampled_from(list(IntensityConvention)))
def test_rate_quadratic_in_power(p, f, conv):
    assert _rate(f * p, 1e-9, conv) == pytest.approx(f**2 * _rate(p, 1e-9, conv), rel=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.floats(1e-12, 1e-6), st.floats(1.5, 10.0), st.sampled_from(list(IntensityConvention)))
def test_rate_linear_in_pressure(pr, f, conv):
    assert _rate(0.05, f * pr, conv) == pytest.approx(f * _rate(0.05, pr, conv), rel=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.floats(0, 10.0), st.floats(0, 1e-5), st.floats(1e-38, 1e-30), st.floats(1e-15, 1e-12))
def test_rates_non_negative(power, pressure, sigma, tau):
    laser = PulsedLaser(431e-9, power, 82e6, tau)
    focus = GaussianFocus(10e-6, 431e-9)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        geom = pi.InteractionGeometry(focus, 1e-3)
        for conv in IntensityConvention:
            rep = pi.rate_report(laser, focus, AtomicVapor(pressure, 300.0), pi.CrossSection(sigma), geom, conv)
            assert rep.p_ion >= 0 and rep.rate >= 0 and np.isfinite(rep.rate)
