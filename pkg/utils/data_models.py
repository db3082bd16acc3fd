"""
Data Models for the DMA simulator
Plain records passed between the meta-atom, feed, aperture, holography and
imaging modules, with the dict round-trip used by the exporters
"""

import math
from dataclasses import dataclass, asdict, field
from pathlib import Path
from typing import Optional, Tuple

import numpy as np
from scipy.constants import c

from utils.errors import DomainError

# Default output directory
DATA_DIR = Path(__file__).parent.parent / 'data'

GHZ = 1e9
DEFAULT_N_ELEMENTS = 16
DEFAULT_SPACING = 2.0e-3  # m, about 0.4 free-space wavelengths at 60 GHz

# Nominal CELC slot dimensions (mm); metadata only, nothing is derived from them.
CELC_GEOMETRY_MM = {'a': 0.3, 'b': 0.2, 'g': 0.1, 'R': 1.1, 'r': 0.9}


def _as_array(values, dtype) -> np.ndarray:
    array = np.array(values, dtype=dtype)
    array.setflags(write=False)
    return array


# ==================== META-ATOM ====================

@dataclass(frozen=True)
class LorentzianParams:
    """On/off Lorentzian parameterization of one CELC meta-atom"""
    f0: float = 60.0 * GHZ  # on-state resonance (Hz)
    gamma: float = 2 * math.pi * 1.5 * GHZ  # damping (rad/s)
    F: float = 0.5  # coupling amplitude
    f0_off: Optional[float] = None  # None means "transparent"/same resonance as f0
    F_off: float = 0.0
    c0: Optional[float] = None  # shunt scale; None means gamma / omega0**2

    def __post_init__(self):
        if not self.f0 > 0:
            raise DomainError(f"f0 must be positive, got {self.f0}")
        if not self.gamma > 0:
            raise DomainError(f"gamma must be positive, got {self.gamma}")
        if self.F < 0 or self.F_off < 0:
            raise DomainError("coupling amplitudes F and F_off must be >= 0")
        if self.f0_off is not None and not self.f0_off > 0:
            raise DomainError(f"f0_off must be positive, got {self.f0_off}")
        if self.c0 is not None and not self.c0 > 0:
            raise DomainError(f"c0 must be positive, got {self.c0}")

    @property
    def omega0(self) -> float:
        return 2 * math.pi * self.f0

    @property
    def omega0_off(self) -> float:
        f0 = self.f0 if self.f0_off is None else self.f0_off
        return 2 * math.pi * f0

    @property
    def shunt_scale(self) -> float:
        """c0 in y(w) = j*c0*w*alpha(w)"""
        if self.c0 is not None:
            return self.c0
        return self.gamma / self.omega0 ** 2

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> 'LorentzianParams':
        return cls(**data)


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform frequency grid (Hz)"""
    f_start: float = 59.0 * GHZ
    f_stop: float = 63.0 * GHZ
    n_points: int = 2001

    def __post_init__(self):
        if not self.f_start > 0:
            raise DomainError(f"grid frequencies must be positive, got f_start={self.f_start}")
        if not self.f_start < self.f_stop:
            raise DomainError("grid requires f_start < f_stop")
        if int(self.n_points) != self.n_points or self.n_points < 2:
            raise DomainError(f"grid needs an integer n_points >= 2, got {self.n_points}")

    @property
    def frequencies(self) -> np.ndarray:
        return np.linspace(self.f_start, self.f_stop, int(self.n_points))

    @property
    def omega(self) -> np.ndarray:
        return 2 * np.pi * self.frequencies

    @property
    def step(self) -> float:
        return (self.f_stop - self.f_start) / (self.n_points - 1)

    def refined(self, factor: int = 2) -> 'FrequencyGrid':
        """Same span with the spacing divided by factor"""
        return FrequencyGrid(self.f_start, self.f_stop, (self.n_points - 1) * factor + 1)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> 'FrequencyGrid':
        return cls(**data)


@dataclass(frozen=True, eq=False)
class TwoPortResponse:
    """Complex S-parameters on a frequency grid; s12/s22 default to the symmetric case"""
    grid: FrequencyGrid
    s11: np.ndarray
    s21: np.ndarray
    s12: Optional[np.ndarray] = None
    s22: Optional[np.ndarray] = None

    def __post_init__(self):
        n = self.grid.n_points
        s11 = _as_array(self.s11, complex)
        s21 = _as_array(self.s21, complex)
        s12 = s21 if self.s12 is None else _as_array(self.s12, complex)
        s22 = s11 if self.s22 is None else _as_array(self.s22, complex)
        for name, values in (('s11', s11), ('s21', s21), ('s12', s12), ('s22', s22)):
            if values.shape != (n,):
                raise DomainError(f"{name} has {values.size} samples, grid has {n}")
        object.__setattr__(self, 's11', s11)
        object.__setattr__(self, 's21', s21)
        object.__setattr__(self, 's12', s12)
        object.__setattr__(self, 's22', s22)


# ==================== DISPERSION ====================

@dataclass(frozen=True, eq=False)
class RealSpectrum:
    """Real-valued quantity sampled on a frequency grid"""
    grid: FrequencyGrid
    values: np.ndarray
    unit: str = ''

    def __post_init__(self):
        values = _as_array(self.values, float)
        if values.shape != (self.grid.n_points,):
            raise DomainError(f"spectrum has {values.size} samples, grid has {self.grid.n_points}")
        object.__setattr__(self, 'values', values)

    def with_values(self, values, unit: Optional[str] = None) -> 'RealSpectrum':
        return RealSpectrum(self.grid, values, self.unit if unit is None else unit)


@dataclass(frozen=True)
class Band:
    """Closed frequency interval [f_lo, f_hi] (Hz)"""
    f_lo: float
    f_hi: float

    def __post_init__(self):
        if self.f_lo > self.f_hi:
            raise DomainError(f"band lower edge {self.f_lo} above upper edge {self.f_hi}")

    def contains(self, frequency: float) -> bool:
        return self.f_lo <= frequency <= self.f_hi

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class BandList:
    """Disjoint, ascending frequency intervals"""
    bands: Tuple[Band, ...] = ()

    def __post_init__(self):
        bands = tuple(self.bands)
        for previous, current in zip(bands, bands[1:]):
            if not previous.f_hi < current.f_lo:
                raise DomainError("bands must be disjoint and sorted ascending")
        object.__setattr__(self, 'bands', bands)

    def __len__(self) -> int:
        return len(self.bands)

    def __iter__(self):
        return iter(self.bands)

    def __getitem__(self, index) -> Band:
        return self.bands[index]

    def contains(self, frequency: float) -> bool:
        return any(band.contains(frequency) for band in self.bands)

    def to_dict(self) -> dict:
        return {'bands': [band.to_dict() for band in self.bands]}

    @classmethod
    def from_dict(cls, data: dict) -> 'BandList':
        return cls(tuple(Band(**b) for b in data['bands']))


@dataclass(frozen=True, eq=False)
class DispersionReport:
    """Every dispersion indicator extracted from one transmission spectrum"""
    response: TwoPortResponse
    thickness: float
    phase: RealSpectrum
    group_delay: RealSpectrum
    effective_index: RealSpectrum
    group_index: RealSpectrum
    group_velocity: RealSpectrum
    effective_permittivity: RealSpectrum
    anomalous_bands: BandList

    def summary(self) -> dict:
        grid = self.response.grid
        magnitude = np.abs(self.response.s21)
        i_dip = int(np.argmin(magnitude))
        v_g = self.group_velocity.values
        finite_v_g = v_g[np.isfinite(v_g)]
        return {
            'thickness_m': float(self.thickness),
            'dip_frequency_hz': float(grid.frequencies[i_dip]),
            'dip_s21_db': float(20 * np.log10(magnitude[i_dip])),
            'min_group_delay_s': float(np.min(self.group_delay.values)),
            'min_group_index': float(np.min(self.group_index.values)),
            'min_group_velocity_m_per_s': float(np.min(finite_v_g)) if finite_v_g.size else None,
            'n_anomalous_bands': len(self.anomalous_bands),
            'anomalous_bands': self.anomalous_bands.to_dict()['bands'],
        }


# ==================== FEED ====================

@dataclass(frozen=True)
class SiwParams:
    """Dielectric-filled SIW feed and the element positions along it"""
    eps_r: float = 3.0
    tan_delta: float = 0.001
    f_cutoff: float = 45.0 * GHZ
    positions: Tuple[float, ...] = tuple(n * DEFAULT_SPACING for n in range(DEFAULT_N_ELEMENTS))

    def __post_init__(self):
        positions = tuple(float(x) for x in self.positions)
        if self.eps_r < 1:
            raise DomainError(f"eps_r must be >= 1, got {self.eps_r}")
        if self.tan_delta < 0:
            raise DomainError(f"tan_delta must be >= 0, got {self.tan_delta}")
        if not self.f_cutoff > 0:
            raise DomainError(f"f_cutoff must be positive, got {self.f_cutoff}")
        if not positions:
            raise DomainError("at least one element position is required")
        if positions[0] < 0 or any(b <= a for a, b in zip(positions, positions[1:])):
            raise DomainError("positions must be non-negative and strictly increasing")
        object.__setattr__(self, 'positions', positions)

    @classmethod
    def default(cls, n_elements: int = DEFAULT_N_ELEMENTS, spacing: float = DEFAULT_SPACING,
                **kwargs) -> 'SiwParams':
        return cls(positions=tuple(n * spacing for n in range(n_elements)), **kwargs)

    @property
    def a_eff(self) -> float:
        """Equivalent rectangular-guide width (m) giving f_cutoff"""
        return c / (2 * self.f_cutoff * math.sqrt(self.eps_r))

    @property
    def x(self) -> np.ndarray:
        return np.array(self.positions)

    def to_dict(self) -> dict:
        data = asdict(self)
        data['positions'] = list(self.positions)
        return data

    @classmethod
    def from_dict(cls, data: dict) -> 'SiwParams':
        return cls(**data)


@dataclass(frozen=True, eq=False)
class FeedExcitation:
    """Guided reference wave sampled at each element"""
    omega: float
    amplitudes: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'amplitudes', _as_array(self.amplitudes, complex))


# ==================== APERTURE ====================

@dataclass(frozen=True)
class HologramCode:
    """Binary hologram; element 1 (nearest the feed) first"""
    bits: Tuple[int, ...]

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if not bits:
            raise DomainError("hologram code must have at least one element")
        if any(b not in (0, 1) for b in bits):
            raise DomainError(f"hologram code bits must be 0 or 1, got {self.bits}")
        object.__setattr__(self, 'bits', bits)

    @classmethod
    def from_string(cls, text: str) -> 'HologramCode':
        text = text.strip()
        if not text or set(text) - {'0', '1'}:
            raise DomainError(f"code string must contain only 0/1 characters, got {text!r}")
        return cls(tuple(int(ch) for ch in text))

    @classmethod
    def from_int(cls, value: int, n_elements: int) -> 'HologramCode':
        """Element 1 is the least significant bit"""
        if value < 0 or value >= 2 ** n_elements:
            raise DomainError(f"code value {value} out of range for {n_elements} elements")
        return cls(tuple((value >> n) & 1 for n in range(n_elements)))

    @classmethod
    def zeros(cls, n_elements: int) -> 'HologramCode':
        return cls((0,) * n_elements)

    @classmethod
    def ones(cls, n_elements: int) -> 'HologramCode':
        return cls((1,) * n_elements)

    def __str__(self) -> str:
        return ''.join(str(b) for b in self.bits)

    def __len__(self) -> int:
        return len(self.bits)

    def __or__(self, other: 'HologramCode') -> 'HologramCode':
        if len(other) != len(self):
            raise DomainError("codes of different length")
        return HologramCode(tuple(a | b for a, b in zip(self.bits, other.bits)))

    @property
    def value(self) -> int:
        return sum(b << n for n, b in enumerate(self.bits))

    @property
    def n_active(self) -> int:
        return sum(self.bits)

    @property
    def is_zero(self) -> bool:
        return self.n_active == 0

    @property
    def array(self) -> np.ndarray:
        return np.array(self.bits, dtype=float)


@dataclass(frozen=True)
class ApertureConfig:
    """Linear coded aperture: element count, pitch, meta-atom, feed and angle grid"""
    n_elements: int = DEFAULT_N_ELEMENTS
    spacing: float = DEFAULT_SPACING
    meta: LorentzianParams = field(default_factory=LorentzianParams)
    feed: Optional[SiwParams] = None  # None means SiwParams.default(n_elements, spacing)
    theta_step_deg: float = 0.1
    depletion: float = 0.0  # uniform coupling of active elements; 0 disables depletion

    def __post_init__(self):
        if int(self.n_elements) != self.n_elements or self.n_elements < 1:
            raise DomainError(f"n_elements must be a positive integer, got {self.n_elements}")
        if not self.spacing > 0:
            raise DomainError(f"spacing must be positive, got {self.spacing}")
        if not 0 < self.theta_step_deg <= 90:
            raise DomainError(f"theta step must be in (0, 90] degrees, got {self.theta_step_deg}")
        if not 0 <= self.depletion < 1:
            raise DomainError(f"depletion coupling must be in [0, 1), got {self.depletion}")
        if self.feed is None:
            object.__setattr__(self, 'feed', SiwParams.default(self.n_elements, self.spacing))
        elif len(self.feed.positions) != self.n_elements:
            raise DomainError(
                f"feed defines {len(self.feed.positions)} positions for {self.n_elements} elements")

    @property
    def theta_grid(self) -> np.ndarray:
        """Observation angles (deg) covering [-90, 90] inclusive"""
        n_steps = int(round(180.0 / self.theta_step_deg))
        return np.linspace(-90.0, 90.0, n_steps + 1)

    @property
    def positions(self) -> np.ndarray:
        return self.feed.x

    @property
    def length(self) -> float:
        return float(self.feed.positions[-1] - self.feed.positions[0])

    def to_dict(self) -> dict:
        return {
            'n_elements': self.n_elements,
            'spacing': self.spacing,
            'meta': self.meta.to_dict(),
            'feed': self.feed.to_dict(),
            'theta_step_deg': self.theta_step_deg,
            'depletion': self.depletion,
        }


@dataclass(frozen=True, eq=False)
class RadiationPattern:
    """Complex far field on the theta grid at one frequency"""
    frequency: float
    theta: np.ndarray
    field: np.ndarray
    normalization: str = 'absolute'  # 'absolute' or 'peak'

    def __post_init__(self):
        theta = _as_array(self.theta, float)
        values = _as_array(self.field, complex)
        if theta.shape != values.shape:
            raise DomainError("pattern field and theta grid differ in length")
        if self.normalization not in ('absolute', 'peak'):
            raise DomainError(f"unknown normalization {self.normalization!r}")
        object.__setattr__(self, 'theta', theta)
        object.__setattr__(self, 'field', values)

    @property
    def magnitude(self) -> np.ndarray:
        return np.abs(self.field)

    def normalized(self) -> 'RadiationPattern':
        """Field divided by its peak magnitude; an all-zero pattern is returned unchanged"""
        peak = self.magnitude.max()
        if peak == 0:
            return self
        return RadiationPattern(self.frequency, self.theta, self.field / peak, 'peak')


@dataclass(frozen=True)
class BeamMetrics:
    """Main-beam summary of one pattern"""
    peak_angle: float  # deg
    peak_magnitude: float  # linear
    hpbw: float  # deg
    sll: float  # dB, <= 0; -inf when there is nothing outside the main lobe
    directivity_1d: float  # dB
    hpbw_truncated: bool = False

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> 'BeamMetrics':
        return cls(**data)


@dataclass(frozen=True, eq=False)
class PortResponse:
    """Cascade S-parameters plus the power partition of the coded aperture"""
    response: TwoPortResponse
    radiated_fraction: RealSpectrum
    dielectric_fraction: RealSpectrum


# ==================== HOLOGRAPHY ====================

@dataclass(frozen=True)
class SteeringTarget:
    """Object-beam direction at one frequency"""
    theta_t: float  # deg
    frequency: float  # Hz

    def __post_init__(self):
        if not abs(self.theta_t) < 90:
            raise DomainError(f"target angle must satisfy |theta_t| < 90, got {self.theta_t}")
        if not self.frequency > 0:
            raise DomainError(f"target frequency must be positive, got {self.frequency}")

    @property
    def omega(self) -> float:
        return 2 * math.pi * self.frequency


@dataclass(frozen=True)
class ScanResult:
    """Beam metrics of one code across increasing frequencies"""
    code: HologramCode
    rows: Tuple[Tuple[float, BeamMetrics], ...]

    def __post_init__(self):
        rows = tuple(self.rows)
        frequencies = [f for f, _ in rows]
        if any(b <= a for a, b in zip(frequencies, frequencies[1:])):
            raise DomainError("scan frequencies must be strictly increasing")
        object.__setattr__(self, 'rows', rows)

    @property
    def frequencies(self) -> Tuple[float, ...]:
        return tuple(f for f, _ in self.rows)

    @property
    def peak_angles(self) -> Tuple[float, ...]:
        return tuple(m.peak_angle for _, m in self.rows)

    @property
    def span(self) -> float:
        angles = self.peak_angles
        return max(angles) - min(angles)


# ==================== IMAGING ====================

@dataclass(frozen=True, eq=False)
class Scene:
    """1D angular reflectivity strip"""
    pixel_angles: np.ndarray  # deg
    reflectivity: np.ndarray

    def __post_init__(self):
        angles = _as_array(self.pixel_angles, float)
        values = _as_array(self.reflectivity, complex)
        if angles.ndim != 1 or angles.shape != values.shape:
            raise DomainError("scene angles and reflectivity must have equal length")
        if np.any(np.abs(angles) >= 90):
            raise DomainError("scene angles must lie inside (-90, 90)")
        if np.any(np.diff(angles) <= 0):
            raise DomainError("scene angles must be strictly increasing")
        object.__setattr__(self, 'pixel_angles', angles)
        object.__setattr__(self, 'reflectivity', values)

    @classmethod
    def point(cls, pixel_angles, pixel: int, amplitude: complex = 1.0) -> 'Scene':
        angles = np.asarray(pixel_angles, dtype=float)
        if not 0 <= pixel < angles.size:
            raise DomainError(f"pixel {pixel} outside 0..{angles.size - 1}")
        values = np.zeros(angles.size, dtype=complex)
        values[pixel] = amplitude
        return cls(angles, values)

    @property
    def n_pixels(self) -> int:
        return int(self.pixel_angles.size)


@dataclass(frozen=True, eq=False)
class MeasurementMatrix:
    """M x P sensing operator; row m is mask (code, frequency) sampled at the pixels"""
    entries: np.ndarray
    pixel_angles: np.ndarray
    rows: Optional[Tuple[Tuple[HologramCode, float], ...]] = None

    def __post_init__(self):
        entries = _as_array(self.entries, complex)
        angles = _as_array(self.pixel_angles, float)
        if entries.ndim != 2 or entries.shape[0] < 1 or entries.shape[1] < 1:
            raise DomainError("measurement matrix must be a non-empty 2D array")
        if entries.shape[1] != angles.size:
            raise DomainError(f"{entries.shape[1]} columns for {angles.size} pixel angles")
        if not np.all(np.any(entries != 0, axis=1)):
            raise DomainError("every measurement row needs at least one nonzero entry")
        if self.rows is not None:
            rows = tuple(self.rows)
            if len(rows) != entries.shape[0]:
                raise DomainError(f"{len(rows)} row descriptors for {entries.shape[0]} rows")
            object.__setattr__(self, 'rows', rows)
        object.__setattr__(self, 'entries', entries)
        object.__setattr__(self, 'pixel_angles', angles)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.entries.shape

    @property
    def n_rows(self) -> int:
        return self.entries.shape[0]

    @property
    def n_pixels(self) -> int:
        return self.entries.shape[1]


@dataclass(frozen=True, eq=False)
class Estimate:
    """Reconstructed reflectivity; zero_columns lists pixels the operator cannot see"""
    values: np.ndarray
    zero_columns: Tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'values', _as_array(self.values, complex))
        object.__setattr__(self, 'zero_columns', tuple(int(p) for p in self.zero_columns))

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.values))

    @property
    def argmax(self) -> int:
        return int(np.argmax(np.abs(self.values)))


@dataclass(frozen=True, eq=False)
class DiversityReport:
    """Singular spectrum and mask-correlation summary of a measurement matrix"""
    singular_values: np.ndarray
    effective_rank: int
    mean_row_correlation: float
    condition_number: float
    rank_threshold: float = 1e-3

    def __post_init__(self):
        object.__setattr__(self, 'singular_values', _as_array(self.singular_values, float))

    def to_dict(self) -> dict:
        return {
            'singular_values': [float(s) for s in self.singular_values],
            'effective_rank': int(self.effective_rank),
            'mean_row_correlation': float(self.mean_row_correlation),
            'condition_number': float(self.condition_number),
            'rank_threshold': float(self.rank_threshold),
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'DiversityReport':
        return cls(**data)
