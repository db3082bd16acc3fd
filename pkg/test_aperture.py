"""
Aperture tests: element moments, far field, beam metrics, pattern correlation
and the cascaded port model
"""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.testing import assert_allclose
from scipy.constants import c

from utils.aperture import (
    EXAMPLE_CODES,
    beam_metrics,
    code_pattern,
    element_moments,
    far_field,
    field_at_angles,
    pattern_correlation,
    port_response,
)
from utils.data_models import (
    ApertureConfig,
    FrequencyGrid,
    HologramCode,
    LorentzianParams,
    RadiationPattern,
    SiwParams,
)
from utils.errors import DomainError, NoBeamError
from utils.feedline import guided_wavenumber
from utils.meta_atom import ON, polarizability, shunt_admittance

W60 = 2 * math.pi * 60e9
ALTERNATING = EXAMPLE_CODES['alternating']

codes16 = st.integers(1, 2 ** 16 - 1).map(lambda v: HologramCode.from_int(v, 16))


def alternating_peak(config, frequency):
    """First-order beam of the period-two code: k0*sin(theta) = Re(beta) - pi/d"""
    omega = 2 * math.pi * frequency
    beta = guided_wavenumber(config.feed, omega).real
    return math.degrees(math.asin((beta - math.pi / config.spacing) / (omega / c)))


class TestExampleCodes:

    def test_six_distinct_codes(self):
        assert len(EXAMPLE_CODES) == 6
        assert len({str(code) for code in EXAMPLE_CODES.values()}) == 6
        assert all(len(code) == 16 for code in EXAMPLE_CODES.values())


class TestElementMoments:

    def test_zero_code(self, aperture):
        moments = element_moments(aperture, HologramCode.zeros(16), W60)
        assert np.all(moments == 0)
        pattern = code_pattern(aperture, HologramCode.zeros(16), 60e9)
        assert np.all(pattern.field == 0)
        with pytest.raises(NoBeamError, match='no beam'):
            beam_metrics(pattern)

    def test_single_first_element(self, lossless_aperture):
        code = HologramCode.from_int(1, 16)
        moments = element_moments(lossless_aperture, code, W60)
        assert_allclose(moments[0], polarizability(lossless_aperture.meta, W60), rtol=1e-12)
        assert np.all(moments[1:] == 0)

    def test_alternating_closed_form(self, aperture):
        moments = element_moments(aperture, ALTERNATING, W60)
        beta = guided_wavenumber(aperture.feed, W60)
        alpha = polarizability(aperture.meta, W60)
        expected = np.where(ALTERNATING.array > 0, alpha * np.exp(-1j * beta * aperture.positions), 0)
        assert_allclose(moments, expected, rtol=1e-12)
        assert np.count_nonzero(moments) == 8

    def test_code_length_must_match(self, aperture):
        with pytest.raises(DomainError):
            element_moments(aperture, HologramCode.ones(8), W60)

    def test_depletion_lowers_downstream_moments(self):
        plain = element_moments(ApertureConfig(), HologramCode.ones(16), W60)
        depleted = element_moments(ApertureConfig(depletion=0.2), HologramCode.ones(16), W60)
        assert_allclose(depleted[0], plain[0], rtol=1e-12)
        assert np.all(np.abs(depleted[1:]) < np.abs(plain[1:]))

    def test_leaky_off_state(self):
        config = ApertureConfig(meta=LorentzianParams(F_off=0.05))
        moments = element_moments(config, HologramCode.zeros(16), W60)
        assert np.all(np.abs(moments) > 0)


class TestFarField:

    def test_single_element_is_isotropic(self, aperture):
        pattern = code_pattern(aperture, HologramCode.from_int(1 << 5, 16), 60e9)
        alpha = abs(polarizability(aperture.meta, W60))
        assert np.ptp(pattern.magnitude) < 1e-12 * alpha

    def test_two_in_phase_elements(self):
        config = ApertureConfig(n_elements=2)
        theta = config.theta_grid
        field = far_field(config, [1.0, 1.0], W60).field
        k0 = W60 / c
        expected = np.abs(2 * np.cos(k0 * config.spacing * np.sin(np.radians(theta)) / 2))
        assert_allclose(np.abs(field), expected, rtol=0, atol=1e-12)

    def test_theta_grid(self, aperture):
        pattern = code_pattern(aperture, ALTERNATING, 60e9)
        assert pattern.theta.size == 1801
        assert pattern.theta[0] == -90.0 and pattern.theta[-1] == 90.0

    def test_field_at_arbitrary_angles_matches_grid(self, aperture):
        moments = element_moments(aperture, ALTERNATING, W60)
        pattern = far_field(aperture, moments, W60)
        picked = field_at_angles(aperture, moments, W60, pattern.theta[[100, 500, 900, 1300]])
        assert_allclose(picked, pattern.field[[100, 500, 900, 1300]], rtol=1e-12)

    def test_rejects_wrong_moment_count(self, aperture):
        with pytest.raises(DomainError):
            far_field(aperture, np.ones(15), W60)

    @given(st.integers(0, 2 ** 16 - 1), st.integers(0, 2 ** 16 - 1))
    def test_superposition_of_disjoint_codes(self, a, b):
        b &= ~a
        config = ApertureConfig()
        code_a, code_b = HologramCode.from_int(a, 16), HologramCode.from_int(b, 16)
        union = code_pattern(config, code_a | code_b, 60e9).field
        parts = code_pattern(config, code_a, 60e9).field + code_pattern(config, code_b, 60e9).field
        scale = max(np.max(np.abs(union)), 1.0)
        assert_allclose(union, parts, rtol=0, atol=1e-12 * scale)

    def test_normalized_pattern(self, aperture):
        pattern = code_pattern(aperture, ALTERNATING, 60e9)
        normalized = pattern.normalized()
        assert normalized.normalization == 'peak'
        assert normalized.magnitude.max() == pytest.approx(1.0, abs=1e-15)
        assert beam_metrics(normalized).peak_angle == pytest.approx(beam_metrics(pattern).peak_angle, abs=1e-9)

    def test_zero_pattern_is_not_normalized(self, aperture):
        theta = aperture.theta_grid
        pattern = RadiationPattern(60e9, theta, np.zeros(theta.size))
        assert pattern.normalized() is pattern

    def test_unknown_normalization(self):
        with pytest.raises(DomainError):
            RadiationPattern(60e9, [0.0], [1.0], 'db')


class TestBeamMetrics:

    def test_alternating_peak_matches_grating_relation(self, aperture):
        for frequency in (60e9, 61e9, 62e9):
            metrics = beam_metrics(code_pattern(aperture, ALTERNATING, frequency))
            assert abs(metrics.peak_angle - alternating_peak(aperture, frequency)) <= 0.3

    def test_alternating_reference_angles(self, aperture):
        expected = {59e9: -8.6, 60e9: -5.93, 61e9: -3.39, 62e9: -0.99, 63e9: 1.3}
        for frequency, angle in expected.items():
            metrics = beam_metrics(code_pattern(aperture, ALTERNATING, frequency))
            assert abs(metrics.peak_angle - angle) <= 0.3

    def test_alternating_beam_scans_with_frequency(self, aperture):
        peaks = [beam_metrics(code_pattern(aperture, ALTERNATING, f)).peak_angle
                 for f in np.arange(59e9, 63.01e9, 0.5e9)]
        assert np.all(np.diff(peaks) >= 0)
        assert peaks[6] - peaks[2] >= 2.0

    def test_period_three_twin_beam(self, aperture):
        metrics = beam_metrics(code_pattern(aperture, EXAMPLE_CODES['period_3'], 60e9))
        # mirrored lobes about u = -pi/d have equal height; the smaller angle is reported
        assert min(abs(metrics.peak_angle - 18.2), abs(metrics.peak_angle + 31.3)) <= 0.5

    def test_single_element_has_no_sidelobes(self, aperture):
        metrics = beam_metrics(code_pattern(aperture, HologramCode.from_int(1, 16), 60e9))
        assert metrics.sll == -math.inf
        assert metrics.hpbw_truncated

    def test_cosine_lobe(self):
        theta = np.linspace(-90.0, 90.0, 1801)
        field = np.where(np.abs(theta) <= 30, np.cos(np.radians(theta) * 3), 0.0)
        metrics = beam_metrics(RadiationPattern(60e9, theta, field))
        assert abs(metrics.peak_angle) <= 0.1
        assert abs(metrics.hpbw - 30.0) <= 0.1
        assert metrics.sll == -math.inf
        assert not metrics.hpbw_truncated
        # mean power over the visible range is 1/6 of the peak
        assert abs(metrics.directivity_1d - 10 * math.log10(6)) <= 0.01

    def test_sidelobe_level_of_two_lobes(self):
        theta = np.linspace(-90.0, 90.0, 1801)
        main = np.exp(-((theta - 10) / 5) ** 2)
        side = 0.5 * np.exp(-((theta + 40) / 5) ** 2)
        metrics = beam_metrics(RadiationPattern(60e9, theta, main + side))
        assert abs(metrics.peak_angle - 10) <= 0.1
        assert_allclose(metrics.sll, 20 * math.log10(0.5), atol=0.01)

    def test_two_element_broadside(self):
        config = ApertureConfig(n_elements=2)
        metrics = beam_metrics(far_field(config, [1.0, 1.0], W60))
        assert abs(metrics.peak_angle) <= 0.1
        assert metrics.sll <= 0

    def test_scale_invariance(self, aperture):
        pattern = code_pattern(aperture, ALTERNATING, 61e9)
        scaled = RadiationPattern(pattern.frequency, pattern.theta, pattern.field * (3 - 2j))
        a, b = beam_metrics(pattern), beam_metrics(scaled)
        assert a.peak_angle == pytest.approx(b.peak_angle, abs=1e-9)
        assert a.hpbw == pytest.approx(b.hpbw, abs=1e-9)
        assert a.directivity_1d == pytest.approx(b.directivity_1d, abs=1e-9)


class TestPatternCorrelation:

    def test_self_and_scaled(self, aperture):
        pattern = code_pattern(aperture, ALTERNATING, 60e9)
        scaled = RadiationPattern(pattern.frequency, pattern.theta, (0.3 - 0.7j) * pattern.field)
        assert pattern_correlation(pattern, pattern) == pytest.approx(1.0, abs=1e-12)
        assert pattern_correlation(pattern, scaled) == pytest.approx(1.0, abs=1e-12)

    def test_frequency_changes_the_pattern(self, aperture):
        p60 = code_pattern(aperture, ALTERNATING, 60e9)
        p62 = code_pattern(aperture, ALTERNATING, 62e9)
        assert pattern_correlation(p60, p62) < 1.0

    def test_example_codes_are_diverse(self, aperture):
        patterns = [code_pattern(aperture, code, 60e9) for code in EXAMPLE_CODES.values()]
        values = [pattern_correlation(a, b)
                  for i, a in enumerate(patterns) for b in patterns[i + 1:]]
        assert min(values) < 0.5

    def test_grid_mismatch(self, aperture):
        pattern = code_pattern(aperture, ALTERNATING, 60e9)
        coarse = code_pattern(ApertureConfig(theta_step_deg=1.0), ALTERNATING, 60e9)
        with pytest.raises(DomainError):
            pattern_correlation(pattern, coarse)

    def test_zero_pattern(self, aperture):
        pattern = code_pattern(aperture, ALTERNATING, 60e9)
        zero = code_pattern(aperture, HologramCode.zeros(16), 60e9)
        with pytest.raises(DomainError):
            pattern_correlation(pattern, zero)


class TestPortResponse:

    def test_all_off_lossless_line(self, grid):
        config = ApertureConfig(feed=SiwParams(tan_delta=0.0))
        ports = port_response(config, HologramCode.zeros(16), grid)
        assert_allclose(ports.response.s11, 0, atol=1e-12)
        assert_allclose(np.abs(ports.response.s21), 1.0, rtol=1e-12)
        assert np.all(ports.radiated_fraction.values == 0)

    def test_single_element_on_matched_line(self, aperture, grid):
        n = 5
        ports = port_response(aperture, HologramCode.from_int(1 << n, 16), grid)
        beta = guided_wavenumber(aperture.feed, grid.omega)
        y = shunt_admittance(aperture.meta, grid.omega, ON)
        x = aperture.positions
        assert_allclose(ports.response.s21, np.exp(-1j * beta * x[-1]) * 2 / (2 + y),
                        rtol=1e-10, atol=1e-12)
        assert_allclose(ports.response.s11, np.exp(-2j * beta * x[n]) * (-y / (2 + y)),
                        rtol=1e-10, atol=1e-12)

    @pytest.mark.parametrize('name', sorted(EXAMPLE_CODES))
    def test_power_partition_closes(self, aperture, grid, name):
        ports = port_response(aperture, EXAMPLE_CODES[name], grid)
        response = ports.response
        total = (np.abs(response.s11) ** 2 + np.abs(response.s21) ** 2
                 + ports.radiated_fraction.values + ports.dielectric_fraction.values)
        assert_allclose(total, 1.0, rtol=0, atol=1e-9)
        assert np.all(ports.radiated_fraction.values >= 0)
        assert np.all(ports.dielectric_fraction.values >= 0)

    @given(codes16)
    def test_reciprocal_and_passive(self, code):
        ports = port_response(ApertureConfig(), code, FrequencyGrid(59e9, 63e9, 41))
        response = ports.response
        assert_allclose(response.s12, response.s21, rtol=1e-12)
        power = np.abs(response.s11) ** 2 + np.abs(response.s21) ** 2
        assert np.all(power <= 1 + 1e-9)
        assert np.all((ports.radiated_fraction.values >= 0) & (ports.radiated_fraction.values <= 1))

    def test_codes_radiate_differently(self, aperture, grid):
        all_on = port_response(aperture, EXAMPLE_CODES['all_on'], grid).radiated_fraction.values
        alternating = port_response(aperture, ALTERNATING, grid).radiated_fraction.values
        assert np.max(np.abs(all_on - alternating)) > 1e-3
