"""
Dispersion - indicators extracted from a transmission spectrum
Unwrapped phase, group delay, phase-retrieved index, group index and velocity,
effective permittivity and anomalous-dispersion bands

Derivatives use np.gradient(edge_order=2): central O(h^2) in the interior and
one-sided O(h^2) at both ends, exact for polynomials up to degree two.
"""

import logging
import math
from typing import Optional

import numpy as np
from scipy.constants import c

from utils.aperture import port_response
from utils.data_models import (
    ApertureConfig,
    Band,
    BandList,
    DispersionReport,
    FrequencyGrid,
    HologramCode,
    RealSpectrum,
    TwoPortResponse,
)
from utils.errors import DomainError
from utils.feedline import guided_wavenumber

logger = logging.getLogger(__name__)

# dn/dw threshold for anomalous dispersion (per rad/s)
ANOMALOUS_TOLERANCE = 1e-18
# |n_g| below this yields an infinite group velocity sentinel
GROUP_INDEX_FLOOR = 1e-9


def _derivative(spectrum: RealSpectrum) -> np.ndarray:
    if spectrum.grid.n_points < 3:
        raise DomainError("grid too coarse for derivatives (need at least 3 points)")
    return np.gradient(spectrum.values, spectrum.grid.omega, edge_order=2)


def unwrap_phase(response: TwoPortResponse) -> RealSpectrum:
    """
    Continuous phase of S21 (rad)

    The first sample keeps its principal value. The grid must be dense enough
    that the true phase moves less than pi between samples.
    """
    if response.s21.size == 0:
        raise DomainError("empty spectrum")
    return RealSpectrum(response.grid, np.unwrap(np.angle(response.s21)), 'rad')


def group_delay(phase: RealSpectrum) -> RealSpectrum:
    """tau_g = -d(phi)/d(omega) in seconds"""
    return phase.with_values(-_derivative(phase), 's')


def anchor_phase_branch(phase: RealSpectrum, thickness: float,
                        reference_index: float) -> RealSpectrum:
    """
    Shift an unwrapped phase by 2*pi*m so that the first-sample retrieved index
    -(phi_0 + 2*pi*m)*c/(omega_0*d) lands closest to reference_index
    """
    if thickness <= 0:
        raise DomainError(f"thickness must be positive, got {thickness}")
    omega0 = phase.grid.omega[0]
    target = -reference_index * omega0 * thickness / c
    m = round((target - phase.values[0]) / (2 * math.pi))
    return phase.with_values(phase.values + 2 * math.pi * m)


def effective_index(response: TwoPortResponse, thickness: float,
                    reference_index: Optional[float] = None) -> RealSpectrum:
    """
    Phase-only retrieval n(w) = -phi(w)*c/(w*d)

    Multiple reflections are ignored. Pass reference_index when the one-cell
    phase exceeds pi at the first grid point so the right 2*pi branch is used.
    """
    if thickness <= 0:
        raise DomainError(f"thickness must be positive, got {thickness}")
    phase = unwrap_phase(response)
    if reference_index is not None:
        phase = anchor_phase_branch(phase, thickness, reference_index)
    n = -phase.values * c / (response.grid.omega * thickness)
    return RealSpectrum(response.grid, n, '')


def group_index(n: RealSpectrum) -> RealSpectrum:
    """n_g = n + w*dn/dw"""
    return n.with_values(n.values + n.grid.omega * _derivative(n), '')


def group_velocity(n_g: RealSpectrum) -> RealSpectrum:
    """v_g = c/n_g (m/s); +-inf where |n_g| < GROUP_INDEX_FLOOR"""
    values = n_g.values
    singular = np.abs(values) < GROUP_INDEX_FLOOR
    safe = np.where(singular, 1.0, values)
    v_g = np.where(singular, np.copysign(np.inf, values), c / safe)
    return n_g.with_values(v_g, 'm/s')


def normalized_group_velocity(v_g: RealSpectrum) -> RealSpectrum:
    return v_g.with_values(v_g.values / c, '')


def effective_permittivity(n: RealSpectrum) -> RealSpectrum:
    """eps_eff = n^2 (sign of n is not carried; anomalous bands are reported separately)"""
    return n.with_values(n.values ** 2, '')


def _edge(f_a, f_b, v_a, v_b, level):
    """Frequency where the straight line through (f_a, v_a), (f_b, v_b) hits level"""
    if v_b == v_a:
        return f_b
    return f_a + (f_b - f_a) * (level - v_a) / (v_b - v_a)


def anomalous_bands(n: RealSpectrum, tolerance: float = ANOMALOUS_TOLERANCE) -> BandList:
    """
    Maximal intervals where dn/dw < -tolerance

    Band edges are interpolated linearly between the bracketing samples; a band
    touching the grid edge ends at that grid frequency.
    """
    slope = _derivative(n)
    frequencies = n.grid.frequencies
    level = -tolerance
    inside = slope < level

    bands = []
    k = 0
    count = inside.size
    while k < count:
        if not inside[k]:
            k += 1
            continue
        start = k
        while k < count and inside[k]:
            k += 1
        stop = k - 1

        if start == 0:
            f_lo = frequencies[0]
        else:
            f_lo = _edge(frequencies[start - 1], frequencies[start],
                         slope[start - 1], slope[start], level)
        if stop == count - 1:
            f_hi = frequencies[-1]
        else:
            f_hi = _edge(frequencies[stop], frequencies[stop + 1],
                         slope[stop], slope[stop + 1], level)
        bands.append(Band(float(f_lo), float(f_hi)))

    logger.debug("found %d anomalous band(s)", len(bands))
    return BandList(tuple(bands))


def dispersion_report(response: TwoPortResponse, thickness: float,
                      reference_index: Optional[float] = None) -> DispersionReport:
    """Every indicator of one response in a single pass"""
    phase = unwrap_phase(response)
    if reference_index is not None:
        phase = anchor_phase_branch(phase, thickness, reference_index)
    n = effective_index(response, thickness, reference_index)
    n_g = group_index(n)
    return DispersionReport(
        response=response,
        thickness=thickness,
        phase=phase,
        group_delay=group_delay(phase),
        effective_index=n,
        group_index=n_g,
        group_velocity=group_velocity(n_g),
        effective_permittivity=effective_permittivity(n),
        anomalous_bands=anomalous_bands(n),
    )


def code_dispersion(config: ApertureConfig, code: HologramCode, grid: FrequencyGrid,
                    thickness: Optional[float] = None) -> DispersionReport:
    """
    Dispersion indicators of the whole coded aperture

    Uses the cascade S21 between the first and last element; thickness defaults
    to that distance (one spacing for a single element). The phase branch is
    anchored on the bare feed index Re(beta)/k0 at the first grid frequency.
    """
    if thickness is None:
        thickness = config.length if config.length > 0 else config.spacing
    omega0 = grid.omega[0]
    reference_index = float(np.real(guided_wavenumber(config.feed, omega0))) * c / omega0
    ports = port_response(config, code, grid)
    logger.info("aperture dispersion for code %s over %.6g m", code, thickness)
    return dispersion_report(ports.response, thickness, reference_index)
