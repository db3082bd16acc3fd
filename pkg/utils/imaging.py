"""
Imaging - frequency-code diverse computational imaging
Measurement matrix from (code, frequency) masks, diversity metrics, simulated
measurements and matched-filter / Tikhonov reconstruction
"""

import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np

from utils.aperture import EXAMPLE_CODES, element_moments, field_at_angles
from utils.data_models import (
    ApertureConfig,
    DiversityReport,
    Estimate,
    HologramCode,
    MeasurementMatrix,
    Scene,
)
from utils.errors import DomainError, NoBeamError, RankDeficientError

logger = logging.getLogger(__name__)

DEFAULT_IMAGING_FREQUENCIES = (59.5e9, 60.5e9, 61.5e9, 62.5e9)
DEFAULT_PIXELS = 32
DEFAULT_RANDOM_CODES = 10
RANK_THRESHOLD = 1e-3
SINGULAR_FLOOR = 1e-12


def default_scene_angles(n_pixels: int = DEFAULT_PIXELS, u_max: float = 0.9) -> np.ndarray:
    """Pixel angles (deg) uniform in sin(theta) over [-u_max, u_max]"""
    if n_pixels < 1 or not 0 < u_max < 1:
        raise DomainError("need n_pixels >= 1 and 0 < u_max < 1")
    return np.degrees(np.arcsin(np.linspace(-u_max, u_max, n_pixels)))


def _random_codes(n_elements: int, count: int, rng, exclude=()) -> List[HologramCode]:
    """Distinct non-zero random codes, skipping anything in exclude"""
    if count > 2 ** n_elements - 1 - len(set(exclude)):
        raise DomainError(f"cannot draw {count} distinct codes for {n_elements} elements")
    seen = set(exclude)
    codes = []
    while len(codes) < count:
        code = HologramCode(tuple(int(b) for b in rng.integers(0, 2, size=n_elements)))
        if code.is_zero or code in seen:
            continue
        seen.add(code)
        codes.append(code)
    return codes


def default_ensemble(config: ApertureConfig, seed: int = 0,
                     frequencies: Sequence[float] = DEFAULT_IMAGING_FREQUENCIES,
                     n_random: int = DEFAULT_RANDOM_CODES) -> Tuple[List[HologramCode], List[float]]:
    """The example holograms (when they fit the aperture) plus seeded random ones"""
    examples = [code for code in EXAMPLE_CODES.values() if len(code) == config.n_elements]
    rng = np.random.default_rng(seed)
    codes = examples + _random_codes(config.n_elements, n_random, rng, exclude=examples)
    return codes, [float(f) for f in frequencies]


def single_frequency_ensemble(config: ApertureConfig, n_codes: int, frequency: float,
                              seed: int = 0) -> Tuple[List[HologramCode], List[float]]:
    """n_codes distinct random holograms at one frequency (equal-M comparison ensemble)"""
    rng = np.random.default_rng(seed)
    return _random_codes(config.n_elements, n_codes, rng), [float(frequency)]


def build_measurement_matrix(config: ApertureConfig, codes: Sequence[HologramCode],
                             frequencies: Sequence[float], scene_angles,
                             two_way: bool = False) -> MeasurementMatrix:
    """
    One-way far-field sensing operator H[m, p] = E(theta_p; code_m, f_m)

    Rows run over codes x frequencies with the frequency varying fastest.
    two_way=True squares each entry (monostatic model).
    """
    if len(codes) == 0 or len(frequencies) == 0:
        raise DomainError("measurement ensemble needs at least one code and one frequency")
    for code in codes:
        if code.is_zero:
            raise NoBeamError("no beam: all-off code in the measurement ensemble")

    angles = np.asarray(scene_angles, dtype=float)
    if np.any(np.abs(angles) >= 90):
        raise DomainError("scene angles must lie inside (-90, 90)")

    rows = []
    descriptors = []
    for code in codes:
        for frequency in frequencies:
            omega = 2 * math.pi * frequency
            row = field_at_angles(config, element_moments(config, code, omega), omega, angles)
            rows.append(row ** 2 if two_way else row)
            descriptors.append((code, float(frequency)))

    logger.info("measurement matrix %d x %d (%d codes, %d frequencies)",
                len(rows), angles.size, len(codes), len(frequencies))
    return MeasurementMatrix(np.array(rows), angles, tuple(descriptors))


def forward_measure(H: MeasurementMatrix, scene: Scene, noise_sigma: float = 0.0,
                    seed: Optional[int] = None) -> np.ndarray:
    """g = H @ sigma + n, with circular complex noise of std noise_sigma per component"""
    if scene.n_pixels != H.n_pixels:
        raise DomainError(f"scene has {scene.n_pixels} pixels, operator has {H.n_pixels}")
    if noise_sigma < 0:
        raise DomainError(f"noise sigma must be >= 0, got {noise_sigma}")
    g = H.entries @ scene.reflectivity
    if noise_sigma > 0:
        rng = np.random.default_rng(seed)
        noise = rng.standard_normal(H.n_rows) + 1j * rng.standard_normal(H.n_rows)
        g = g + noise_sigma * noise
    return g


def _check_measurements(H: MeasurementMatrix, g) -> np.ndarray:
    g = np.asarray(g, dtype=complex)
    if g.shape != (H.n_rows,):
        raise DomainError(f"expected {H.n_rows} measurements, got {g.size}")
    return g


def reconstruct_matched_filter(H: MeasurementMatrix, g,
                               normalization: str = 'energy') -> Estimate:
    """
    Adjoint reconstruction H^H g with per-pixel normalization

    'energy' divides by ||H[:, p]||^2 (amplitude estimate), 'unit' by ||H[:, p]||
    (detection statistic). Zero columns give 0 and are listed in zero_columns.
    """
    if normalization not in ('energy', 'unit'):
        raise DomainError(f"unknown normalization {normalization!r}")
    g = _check_measurements(H, g)
    norms = np.linalg.norm(H.entries, axis=0)
    zero = norms == 0
    scale = norms ** 2 if normalization == 'energy' else norms
    back = H.entries.conj().T @ g
    values = np.where(zero, 0.0, back / np.where(zero, 1.0, scale))
    return Estimate(values, tuple(np.flatnonzero(zero)))


def localize(H: MeasurementMatrix, g) -> int:
    """Pixel with the largest unit-normalized matched-filter response"""
    return reconstruct_matched_filter(H, g, 'unit').argmax


def reconstruct_tikhonov(H: MeasurementMatrix, g, lam: float) -> Estimate:
    """
    sigma_hat = sum_k s_k/(s_k^2 + lam) * <u_k, g> * v_k

    lam = 0 is plain least squares and is refused when H is underdetermined or
    s_min <= 1e-12 * s_1.
    """
    if lam < 0:
        raise DomainError(f"regularization must be >= 0, got {lam}")
    g = _check_measurements(H, g)
    U, s, Vh = np.linalg.svd(H.entries, full_matrices=False)
    if lam == 0 and (H.n_rows < H.n_pixels or s[-1] <= SINGULAR_FLOOR * s[0]):
        raise RankDeficientError("rank-deficient: matrix is numerically singular, use lambda > 0")
    filtered = s / (s ** 2 + lam)
    values = Vh.conj().T @ (filtered * (U.conj().T @ g))
    return Estimate(values)


def diversity_metrics(H: MeasurementMatrix, threshold: float = RANK_THRESHOLD) -> DiversityReport:
    """Singular spectrum, effective rank, mean pairwise row correlation and condition number"""
    s = np.linalg.svd(H.entries, compute_uv=False)
    effective_rank = int(np.count_nonzero(s >= s[0] * threshold))
    condition = float(s[0] / s[-1]) if s[-1] > 0 else math.inf

    rows = H.entries / np.linalg.norm(H.entries, axis=1, keepdims=True)
    if H.n_rows > 1:
        gram = np.abs(rows @ rows.conj().T)
        upper = np.triu_indices(H.n_rows, k=1)
        mean_correlation = float(np.clip(gram[upper].mean(), 0.0, 1.0))
    else:
        mean_correlation = 0.0

    return DiversityReport(s, effective_rank, mean_correlation, condition, threshold)


def relative_error(estimate: Estimate, truth: Scene) -> float:
    """||sigma_hat - sigma|| / ||sigma||"""
    reference = np.linalg.norm(truth.reflectivity)
    if reference == 0:
        raise DomainError("relative error against an empty scene is undefined")
    return float(np.linalg.norm(estimate.values - truth.reflectivity) / reference)


def snr_noise_sigma(H: MeasurementMatrix, scene: Scene, snr_db: float) -> float:
    """Per-component noise std giving the requested mean SNR on the noiseless measurements"""
    signal_power = float(np.mean(np.abs(forward_measure(H, scene)) ** 2))
    return math.sqrt(signal_power / (2 * 10 ** (snr_db / 10)))


def localization_rate(H: MeasurementMatrix, trials: int = 200, snr_db: float = 20.0,
                      seed: int = 0) -> float:
    """Fraction of random single-scatterer trials where localize hits the true pixel"""
    if trials < 1:
        raise DomainError("need at least one trial")
    rng = np.random.default_rng(seed)
    hits = 0
    for _ in range(trials):
        pixel = int(rng.integers(H.n_pixels))
        scene = Scene.point(H.pixel_angles, pixel)
        sigma = snr_noise_sigma(H, scene, snr_db)
        g = forward_measure(H, scene, sigma, seed=int(rng.integers(2 ** 32)))
        hits += localize(H, g) == pixel
    rate = hits / trials
    logger.info("localization rate %.3f over %d trials at %.1f dB", rate, trials, snr_db)
    return rate
