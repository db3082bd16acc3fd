"""
Aperture - coded 16-element DMA
Element moments, far-field superposition, beam metrics, pattern correlation and
the transfer-matrix port model of the whole aperture
"""

import logging
import math
from typing import Dict, Tuple

import numpy as np
from scipy.constants import c
from scipy.integrate import trapezoid

from utils.data_models import (
    ApertureConfig,
    BeamMetrics,
    FrequencyGrid,
    HologramCode,
    PortResponse,
    RadiationPattern,
    RealSpectrum,
    TwoPortResponse,
)
from utils.errors import DomainError, NoBeamError
from utils.feedline import feed_field, guided_wavenumber
from utils.meta_atom import OFF, ON, polarizability, shunt_admittance

logger = logging.getLogger(__name__)

# Documented example holograms for a 16-element aperture, element nearest the feed first
EXAMPLE_CODES: Dict[str, HologramCode] = {
    'all_on': HologramCode.from_string('1111111111111111'),
    'alternating': HologramCode.from_string('1010101010101010'),
    'period_3': HologramCode.from_string('1001001001001001'),
    'period_4': HologramCode.from_string('1100110011001100'),
    'lower_half': HologramCode.from_string('1111111100000000'),
    'upper_half': HologramCode.from_string('0000000011111111'),
}

# Refined peaks within this relative margin count as equal; the smaller angle wins
PEAK_TIE_RTOL = 1e-4
HALF_POWER = 1.0 / math.sqrt(2.0)


def _check_code(config: ApertureConfig, code: HologramCode):
    if len(code) != config.n_elements:
        raise DomainError(f"code has {len(code)} bits, aperture has {config.n_elements} elements")


def element_moments(config: ApertureConfig, code: HologramCode, omega: float) -> np.ndarray:
    """
    Complex dipole moment of each element: m_n = alpha_state(w) * h_n(w)

    With depletion enabled every active element taps config.depletion of the
    guided power it receives; off elements never tap.
    """
    _check_code(config, code)
    bits = np.array(code.bits, dtype=bool)
    depletion = None
    if config.depletion > 0:
        depletion = np.where(bits, config.depletion, 0.0)

    excitation = feed_field(config.feed, omega, depletion)
    alpha_on = polarizability(config.meta, omega, ON)
    alpha_off = polarizability(config.meta, omega, OFF)
    return np.where(bits, alpha_on, alpha_off) * excitation.amplitudes


def field_at_angles(config: ApertureConfig, moments, omega: float, theta) -> np.ndarray:
    """E(theta) = sum_n m_n * exp(j*k0*x_n*sin(theta)), isotropic elements"""
    moments = np.asarray(moments, dtype=complex)
    if moments.shape != (config.n_elements,):
        raise DomainError(f"expected {config.n_elements} moments, got {moments.size}")
    k0 = omega / c
    sin_theta = np.sin(np.radians(np.asarray(theta, dtype=float)))
    return np.exp(1j * k0 * np.outer(sin_theta, config.positions)) @ moments


def far_field(config: ApertureConfig, moments, omega: float) -> RadiationPattern:
    """Far field on the configured theta grid"""
    theta = config.theta_grid
    return RadiationPattern(omega / (2 * math.pi), theta,
                            field_at_angles(config, moments, omega, theta))


def code_pattern(config: ApertureConfig, code: HologramCode, frequency: float) -> RadiationPattern:
    """Far field of one hologram at one frequency"""
    omega = 2 * math.pi * frequency
    return far_field(config, element_moments(config, code, omega), omega)


def _refine_peak(theta: np.ndarray, magnitude: np.ndarray, i: int) -> Tuple[float, float]:
    """Parabolic fit of ln|E| through three samples around index i"""
    if i == 0 or i == magnitude.size - 1:
        return float(theta[i]), float(magnitude[i])
    left, centre, right = magnitude[i - 1], magnitude[i], magnitude[i + 1]
    if left <= 0 or right <= 0:
        return float(theta[i]), float(centre)
    y_l, y_c, y_r = np.log(left), np.log(centre), np.log(right)
    curvature = y_l - 2 * y_c + y_r
    if curvature >= 0:
        return float(theta[i]), float(centre)
    delta = 0.5 * (y_l - y_r) / curvature
    step = theta[i + 1] - theta[i]
    peak_log = y_c - 0.25 * (y_l - y_r) * delta
    return float(theta[i] + delta * step), float(np.exp(peak_log))


def _main_peak(theta: np.ndarray, magnitude: np.ndarray) -> Tuple[int, float, float]:
    top = magnitude.max()
    padded = np.concatenate(([-np.inf], magnitude, [-np.inf]))
    is_local_max = (padded[1:-1] >= padded[:-2]) & (padded[1:-1] >= padded[2:])
    candidates = np.flatnonzero(is_local_max & (magnitude >= top * (1 - 1e-3)))

    # candidates ascend in angle, so a later peak must win by more than the tie margin
    best = None
    for i in candidates:
        angle, value = _refine_peak(theta, magnitude, int(i))
        if best is None or value > best[2] * (1 + PEAK_TIE_RTOL):
            best = (int(i), angle, value)
    return best


def _half_power_edge(theta, magnitude, i, level, direction):
    """Interpolated -3 dB crossing walking away from i; None when the grid ends first"""
    k = i
    last = magnitude.size - 1
    while 0 <= k + direction <= last:
        nxt = k + direction
        if magnitude[nxt] < level:
            m_in, m_out = magnitude[k], magnitude[nxt]
            fraction = (m_in - level) / (m_in - m_out)
            return float(theta[k] + fraction * (theta[nxt] - theta[k]))
        k = nxt
    return None


def _lobe_bound(magnitude, i, direction):
    """Index of the first minimum walking away from the peak"""
    k = i
    last = magnitude.size - 1
    while 0 <= k + direction <= last and magnitude[k + direction] <= magnitude[k]:
        k += direction
    return k


def beam_metrics(pattern: RadiationPattern) -> BeamMetrics:
    """
    Peak direction, half-power beamwidth, sidelobe level and 1D directivity

    Peak: argmax |E| refined by a parabola on ln|E|; equal peaks resolve to the
    smaller angle. HPBW: -3 dB crossings interpolated linearly; a missing crossing
    is replaced by the grid edge and flagged in hpbw_truncated. SLL: largest
    magnitude outside the main lobe (bounded by its first minima) relative to
    the peak. Directivity: |E(theta_p)|^2 / ((1/pi) * integral |E|^2 dtheta).
    """
    magnitude = pattern.magnitude
    theta = pattern.theta
    if not magnitude.max() > 0:
        raise NoBeamError("no beam: pattern is identically zero")

    i, peak_angle, peak_value = _main_peak(theta, magnitude)
    level = peak_value * HALF_POWER

    left = _half_power_edge(theta, magnitude, i, level, -1)
    right = _half_power_edge(theta, magnitude, i, level, +1)
    truncated = left is None or right is None
    if left is None:
        left = float(theta[0])
    if right is None:
        right = float(theta[-1])

    lo = _lobe_bound(magnitude, i, -1)
    hi = _lobe_bound(magnitude, i, +1)
    outside = np.concatenate((magnitude[:lo], magnitude[hi + 1:]))
    if outside.size and outside.max() > 0:
        sll = min(0.0, 20 * math.log10(outside.max() / peak_value))
    else:
        sll = -math.inf

    mean_power = trapezoid(magnitude ** 2, np.radians(theta)) / math.pi
    directivity = 10 * math.log10(peak_value ** 2 / mean_power)

    return BeamMetrics(
        peak_angle=peak_angle,
        peak_magnitude=peak_value,
        hpbw=right - left,
        sll=sll,
        directivity_1d=directivity,
        hpbw_truncated=truncated,
    )


def pattern_correlation(p1: RadiationPattern, p2: RadiationPattern) -> float:
    """|<E1, E2>| / (||E1|| * ||E2||) over the shared theta grid"""
    if p1.theta.shape != p2.theta.shape or not np.array_equal(p1.theta, p2.theta):
        raise DomainError("patterns are sampled on different theta grids")
    n1 = np.linalg.norm(p1.field)
    n2 = np.linalg.norm(p2.field)
    if n1 == 0 or n2 == 0:
        raise DomainError("correlation of a zero pattern is undefined")
    return float(min(1.0, abs(np.vdot(p1.field, p2.field)) / (n1 * n2)))


def _shunt_matrix(y):
    m = np.zeros(y.shape + (2, 2), dtype=complex)
    m[..., 0, 0] = 1.0
    m[..., 1, 0] = y
    m[..., 1, 1] = 1.0
    return m


def _line_matrix(phase):
    cos, sin = np.cos(phase), np.sin(phase)
    m = np.empty(phase.shape + (2, 2), dtype=complex)
    m[..., 0, 0] = cos
    m[..., 0, 1] = 1j * sin
    m[..., 1, 0] = 1j * sin
    m[..., 1, 1] = cos
    return m


def port_response(config: ApertureConfig, code: HologramCode, grid: FrequencyGrid) -> PortResponse:
    """
    Transfer-matrix model of the fed aperture between the first and last element

    Each active element is a shunt admittance y(w); off elements enter only when
    F_off > 0. Consecutive elements are joined by matched feed sections with the
    complex SIW wavenumber. The power partition comes from a backward walk with
    a matched load (V = I = 1 at port 2): shunts absorb Re(y)|V|^2 (radiation),
    line sections absorb the drop in Re(V*conj(I)) (dielectric loss). All
    fractions are relative to the incident power |a1|^2 with a1 = (V1 + I1)/2.
    """
    _check_code(config, code)
    omega = grid.omega
    beta = guided_wavenumber(config.feed, omega)
    positions = config.positions
    include_off = config.meta.F_off > 0

    sections = []
    for n, bit in enumerate(code.bits):
        if bit or include_off:
            sections.append(('shunt', shunt_admittance(config.meta, omega, ON if bit else OFF)))
        if n < config.n_elements - 1:
            sections.append(('line', beta * (positions[n + 1] - positions[n])))

    total = np.broadcast_to(np.eye(2, dtype=complex), omega.shape + (2, 2))
    for kind, values in sections:
        step = _shunt_matrix(values) if kind == 'shunt' else _line_matrix(values)
        total = total @ step

    A, B = total[..., 0, 0], total[..., 0, 1]
    C, D = total[..., 1, 0], total[..., 1, 1]
    den = A + B + C + D
    s11 = (A + B - C - D) / den
    s12 = 2 * (A * D - B * C) / den
    s21 = 2 / den
    s22 = (-A + B - C + D) / den

    voltage = np.ones_like(omega, dtype=complex)
    current = np.ones_like(omega, dtype=complex)
    radiated = np.zeros_like(omega)
    dielectric = np.zeros_like(omega)
    for kind, values in reversed(sections):
        if kind == 'shunt':
            radiated += np.real(values) * np.abs(voltage) ** 2
            current = current + values * voltage
        else:
            flux_out = np.real(voltage * np.conj(current))
            cos, sin = np.cos(values), np.sin(values)
            voltage, current = cos * voltage + 1j * sin * current, 1j * sin * voltage + cos * current
            dielectric += np.real(voltage * np.conj(current)) - flux_out

    incident = np.abs((voltage + current) / 2) ** 2
    logger.debug("port response for code %s: %d sections", code, len(sections))
    return PortResponse(
        response=TwoPortResponse(grid, s11, s21, s12, s22),
        radiated_fraction=RealSpectrum(grid, radiated / incident, ''),
        dielectric_fraction=RealSpectrum(grid, dielectric / incident, ''),
    )
