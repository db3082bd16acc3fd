"""
Feedline - SIW TE10 reference wave
Guided wavenumber of the dielectric-filled SIW and the complex field it delivers to each meta-atom
"""

import logging
import math
from typing import Optional, Sequence

import numpy as np
from scipy.constants import c

from utils.data_models import FeedExcitation, SiwParams
from utils.errors import BelowCutoffError, DomainError

logger = logging.getLogger(__name__)


def guided_wavenumber(params: SiwParams, omega):
    """
    TE10 wavenumber beta = beta_r - j*beta_r*tan_delta/2 (rad/m)

    beta_r = sqrt(eps_r*k0^2 - (pi/a_eff)^2), evaluated as
    sqrt(eps_r)*sqrt((k0 - kc0)*(k0 + kc0)) with kc0 = 2*pi*f_cutoff/c so the
    difference stays accurate right above cutoff.

    Args:
        params: SiwParams
        omega: angular frequency (rad/s), scalar or array

    Returns:
        complex beta shaped like omega; e^{-j*beta*x} decays along +x
    """
    omega = np.asarray(omega, dtype=float)
    frequency = omega / (2 * math.pi)
    if np.any(~(frequency > params.f_cutoff)):
        worst = float(np.min(frequency))
        raise BelowCutoffError(
            f"below cutoff: {worst / 1e9:.6g} GHz <= TE10 cutoff {params.f_cutoff / 1e9:.6g} GHz")

    k0 = omega / c
    kc0 = 2 * math.pi * params.f_cutoff / c
    beta_r = math.sqrt(params.eps_r) * np.sqrt((k0 - kc0) * (k0 + kc0))
    beta = beta_r * (1.0 - 0.5j * params.tan_delta)
    return beta[()] if beta.ndim == 0 else beta


def propagation_factor(params: SiwParams, omega: float, length: float) -> complex:
    """Segment transfer factor e^{-j*beta*length}"""
    if length < 0:
        raise DomainError(f"segment length must be >= 0, got {length}")
    return complex(np.exp(-1j * guided_wavenumber(params, omega) * length))


def _depletion_array(depletion: Optional[Sequence[float]], n_elements: int) -> np.ndarray:
    if depletion is None:
        return np.zeros(n_elements)
    kappa = np.asarray(depletion, dtype=float)
    if kappa.shape != (n_elements,):
        raise DomainError(f"depletion needs {n_elements} couplings, got {kappa.size}")
    if np.any(kappa < 0) or np.any(kappa >= 1):
        raise DomainError("depletion couplings must lie in [0, 1)")
    return kappa


def feed_field(params: SiwParams, omega: float,
               depletion: Optional[Sequence[float]] = None) -> FeedExcitation:
    """
    Reference wave at each element: h_n = e^{-j*beta*x_n} * prod_{m<n} sqrt(1 - kappa_m)

    Args:
        params: SiwParams (positions define x_n)
        omega: angular frequency (rad/s)
        depletion: per-element coupling kappa_n in [0, 1), None for no depletion

    Returns:
        FeedExcitation with one complex amplitude per element
    """
    x = params.x
    kappa = _depletion_array(depletion, x.size)
    beta = guided_wavenumber(params, omega)

    # energy left in the guide when the wave reaches element n
    remaining = np.concatenate(([1.0], np.cumprod(1.0 - kappa)[:-1]))
    amplitudes = np.exp(-1j * beta * x) * np.sqrt(remaining)
    return FeedExcitation(float(omega), amplitudes)


def residual_power(params: SiwParams, omega: float,
                   depletion: Optional[Sequence[float]] = None) -> float:
    """Guided power left just past the last element, relative to the launched wave"""
    excitation = feed_field(params, omega, depletion)
    kappa = _depletion_array(depletion, len(params.positions))
    return float(np.abs(excitation.amplitudes[-1]) ** 2 * (1.0 - kappa[-1]))


def element_radiated_power(params: SiwParams, omega: float,
                           depletion: Optional[Sequence[float]] = None) -> np.ndarray:
    """kappa_n*|h_n|^2: guided power tapped by each element"""
    excitation = feed_field(params, omega, depletion)
    kappa = _depletion_array(depletion, len(params.positions))
    return kappa * np.abs(excitation.amplitudes) ** 2
