"""
Meta-Atom - Lorentzian CELC surrogate
Polarizability of one switchable meta-atom and the shunt two-port it forms on a matched line
"""

import logging

import numpy as np

from utils.data_models import FrequencyGrid, LorentzianParams, RealSpectrum, TwoPortResponse
from utils.errors import DomainError

logger = logging.getLogger(__name__)

ON, OFF = 1, 0


def _check_omega(omega) -> np.ndarray:
    omega = np.asarray(omega, dtype=float)
    if omega.size == 0 or np.any(~(omega > 0)):
        raise DomainError("angular frequency must be positive")
    return omega


def _state_params(params: LorentzianParams, state: int):
    """(omega0, coupling) of the requested state"""
    if state not in (ON, OFF):
        raise DomainError(f"state must be 0 or 1, got {state}")
    if state == ON:
        return params.omega0, params.F
    return params.omega0_off, params.F_off


def _lorentzian(omega: np.ndarray, omega0: float, gamma: float, coupling: float):
    denominator = omega0 ** 2 - omega ** 2 + 1j * gamma * omega
    return coupling * omega ** 2 / denominator


def polarizability(params: LorentzianParams, omega, state: int = ON):
    """
    Normalized polarizability alpha(w) = F*w^2 / (w0^2 - w^2 + j*gamma*w)

    e^{+jwt} convention, so Im(alpha) < 0 for every w > 0.
    Off state with F_off = 0 returns exact zeros; otherwise the off state is
    the same Lorentzian at (f0_off, gamma, F_off).

    Args:
        params: LorentzianParams
        omega: angular frequency (rad/s), scalar or array
        state: 1 for on, 0 for off

    Returns:
        complex scalar or array shaped like omega
    """
    omega = _check_omega(omega)
    omega0, coupling = _state_params(params, state)
    if coupling == 0:
        alpha = np.zeros(omega.shape, dtype=complex)
    else:
        alpha = _lorentzian(omega, omega0, params.gamma, coupling)
    return alpha[()] if alpha.ndim == 0 else alpha


def radiating_strength(params: LorentzianParams, state: int, omega):
    """Per-element complex weight consumed by the aperture (alpha of the given state)"""
    return polarizability(params, omega, state)


def shunt_admittance(params: LorentzianParams, omega, state: int = ON):
    """Normalized shunt admittance y = j*c0*w*alpha(w)"""
    omega = _check_omega(omega)
    return 1j * params.shunt_scale * omega * polarizability(params, omega, state)


def shunt_s_params(params: LorentzianParams, state: int, grid: FrequencyGrid) -> TwoPortResponse:
    """
    Shunt element on a matched line: S21 = 2/(2+y), S11 = -y/(2+y)

    The element is symmetric, so S12 is S21 and S22 is S11.
    """
    y = shunt_admittance(params, grid.omega, state)
    s21 = 2.0 / (2.0 + y)
    s11 = -y / (2.0 + y)
    logger.debug("shunt response state=%d min|S21|=%.6g", state, np.min(np.abs(s21)))
    return TwoPortResponse(grid, s11, s21)


def element_radiated_fraction(params: LorentzianParams, state: int,
                              grid: FrequencyGrid) -> RealSpectrum:
    """Power the element removes from the line: 1 - |S11|^2 - |S21|^2"""
    response = shunt_s_params(params, state, grid)
    fraction = 1.0 - np.abs(response.s11) ** 2 - np.abs(response.s21) ** 2
    # rounding can leave -1e-17 where the element is transparent
    return RealSpectrum(grid, np.clip(fraction, 0.0, 1.0), '')


def analytic_group_delay(params: LorentzianParams, state: int,
                         grid: FrequencyGrid) -> RealSpectrum:
    """
    Closed-form group delay of the shunt response

    arg S21 = -arg(2 + y), hence tau_g = d arg(2+y)/dw = Im(y' / (2 + y)) with
    y' = j*c0*(alpha + w*alpha') and alpha' = F*(2wD - w^2 D')/D^2, D' = -2w + j*gamma.
    """
    omega = grid.omega
    omega0, coupling = _state_params(params, state)
    if coupling == 0:
        return RealSpectrum(grid, np.zeros_like(omega), 's')

    denominator = omega0 ** 2 - omega ** 2 + 1j * params.gamma * omega
    d_denominator = -2 * omega + 1j * params.gamma
    alpha = coupling * omega ** 2 / denominator
    d_alpha = coupling * (2 * omega * denominator - omega ** 2 * d_denominator) / denominator ** 2

    c0 = params.shunt_scale
    y = 1j * c0 * omega * alpha
    d_y = 1j * c0 * (alpha + omega * d_alpha)
    return RealSpectrum(grid, np.imag(d_y / (2.0 + y)), 's')
