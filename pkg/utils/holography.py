"""
Holography - binary hologram design and frequency scanning
Interference-principle code synthesis, the exhaustive 2^N steering oracle,
frequency scans and the hybrid frequency-code beam table
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import List, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.constants import c

from utils.aperture import beam_metrics, code_pattern, element_moments
from utils.data_models import ApertureConfig, HologramCode, ScanResult, SteeringTarget
from utils.errors import DomainError, NoBeamError
from utils.feedline import feed_field, guided_wavenumber
from utils.meta_atom import OFF, ON, polarizability

logger = logging.getLogger(__name__)

MAX_EXHAUSTIVE_ELEMENTS = 24
CHUNK_SIZE = 1 << 14


def synthesize_code(config: ApertureConfig, target: SteeringTarget) -> HologramCode:
    """
    Binarized interference of the guided reference and the object plane wave

    b_n = 1 iff Re[conj(h_n) * exp(-j*k0*x_n*sin(theta_t))] >= 0, with the
    lossless, undepleted reference h_n = exp(-j*Re(beta)*x_n).
    """
    omega = target.omega
    beta = float(np.real(guided_wavenumber(config.feed, omega)))
    k0 = omega / c
    x = config.positions
    reference = np.exp(-1j * beta * x)
    obj = np.exp(-1j * k0 * x * math.sin(math.radians(target.theta_t)))
    interference = np.real(np.conj(reference) * obj)
    code = HologramCode(tuple(int(v >= 0) for v in interference))
    logger.info("synthesized %s for %.3f deg at %.6g GHz",
                code, target.theta_t, target.frequency / 1e9)
    return code


def _steering_phase(config: ApertureConfig, target: SteeringTarget) -> np.ndarray:
    k0 = target.omega / c
    return np.exp(1j * k0 * config.positions * math.sin(math.radians(target.theta_t)))


def code_gain(config: ApertureConfig, code: HologramCode, target: SteeringTarget) -> float:
    """Field gain |E(theta_t)| of a code at the target frequency"""
    moments = element_moments(config, code, target.omega)
    return float(abs(np.sum(moments * _steering_phase(config, target))))


def _chunk_best(start: int, stop: int, n_elements: int, base: complex,
                delta: np.ndarray) -> Tuple[int, float]:
    """Best code value in [start, stop); the first maximum is the smallest value"""
    values = np.arange(start, stop, dtype=np.int64)
    bits = ((values[:, None] >> np.arange(n_elements)) & 1).astype(float)
    gains = np.abs(base + bits @ delta)
    k = int(np.argmax(gains))
    return start + k, float(gains[k])


def exhaustive_best_code(config: ApertureConfig, target: SteeringTarget,
                         workers: int = 1) -> Tuple[HologramCode, float]:
    """
    Exhaustive steering oracle over all 2^N codes

    The field at theta_t is affine in the bits, E = sum(off weights) + bits @ delta,
    so each chunk of integer code values is scored with one matrix product.
    Chunks are combined in ascending order with a strict comparison, so ties go to
    the smallest code value (element 1 is the least significant bit) whatever
    the number of workers.

    Args:
        config: ApertureConfig (depletion must be off)
        target: SteeringTarget
        workers: thread count

    Returns:
        (best code, linear gain |E(theta_t)|)
    """
    n = config.n_elements
    if n > MAX_EXHAUSTIVE_ELEMENTS:
        raise DomainError(
            f"exhaustive search refused for {n} elements (limit {MAX_EXHAUSTIVE_ELEMENTS})")
    if config.depletion > 0:
        raise DomainError("exhaustive search needs depletion off (moments must not depend on the code)")
    if workers < 1:
        raise DomainError(f"workers must be >= 1, got {workers}")

    omega = target.omega
    h = feed_field(config.feed, omega).amplitudes
    steer = _steering_phase(config, target)
    on_weights = polarizability(config.meta, omega, ON) * h * steer
    off_weights = polarizability(config.meta, omega, OFF) * h * steer
    base = complex(np.sum(off_weights))
    delta = on_weights - off_weights

    total = 1 << n
    bounds = [(start, min(start + CHUNK_SIZE, total)) for start in range(0, total, CHUNK_SIZE)]
    logger.info("exhaustive search: %d codes in %d chunk(s), %d worker(s)", total, len(bounds), workers)

    if workers == 1:
        results = [_chunk_best(a, b, n, base, delta) for a, b in bounds]
    else:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(lambda ab: _chunk_best(ab[0], ab[1], n, base, delta), bounds))

    best_value, best_gain = results[0]
    for value, gain in results[1:]:
        if gain > best_gain:
            best_value, best_gain = value, gain
    return HologramCode.from_int(best_value, n), best_gain


def frequency_scan(config: ApertureConfig, code: HologramCode,
                   frequencies: Sequence[float]) -> ScanResult:
    """Beam metrics of one code at each frequency (strictly increasing)"""
    if code.is_zero:
        raise NoBeamError("no beam: the all-off code radiates nothing")
    if len(frequencies) == 0:
        raise DomainError("frequency list is empty")
    rows = [(float(f), beam_metrics(code_pattern(config, code, f))) for f in frequencies]
    return ScanResult(code, tuple(rows))


def hybrid_diversity_table(config: ApertureConfig, codes: Sequence[HologramCode],
                           frequencies: Sequence[float]) -> List[ScanResult]:
    """Full code x frequency table of beams; one ScanResult row per code, order preserved"""
    if len(codes) == 0 or len(frequencies) == 0:
        raise DomainError("hybrid table needs at least one code and one frequency")
    return [frequency_scan(config, code, frequencies) for code in codes]


def table_span(table: Sequence[ScanResult]) -> float:
    """Peak-angle range covered by every beam of the table together"""
    angles = [angle for row in table for angle in row.peak_angles]
    return max(angles) - min(angles)


def scan_table_frame(table: Sequence[ScanResult]) -> pd.DataFrame:
    """Long-form table: one line per (code, frequency) beam"""
    records = []
    for row in table:
        for frequency, metrics in row.rows:
            records.append({
                'code': str(row.code),
                'frequency_hz': frequency,
                'peak_angle_deg': metrics.peak_angle,
                'peak_magnitude': metrics.peak_magnitude,
                'hpbw_deg': metrics.hpbw,
                'hpbw_truncated': metrics.hpbw_truncated,
                'sll_db': metrics.sll,
                'directivity_1d_db': metrics.directivity_1d,
            })
    columns = ['code', 'frequency_hz', 'peak_angle_deg', 'peak_magnitude', 'hpbw_deg',
               'hpbw_truncated', 'sll_db', 'directivity_1d_db']
    return pd.DataFrame(records, columns=columns)
