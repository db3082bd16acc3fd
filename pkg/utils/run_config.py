"""
Run Configuration - JSON config file for the CLI
Sections map one-to-one onto dataclasses; every field has a default, so an empty
file reproduces the documented defaults. Unknown keys are rejected by dotted path.
"""

import json
import logging
import math
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import List, Optional, Tuple, Union, get_args, get_origin

import numpy as np

from utils.data_models import (
    DATA_DIR,
    ApertureConfig,
    FrequencyGrid,
    HologramCode,
    LorentzianParams,
    SiwParams,
)
from utils.errors import ConfigError, DmaError, ParseError
from utils.imaging import default_ensemble, default_scene_angles

logger = logging.getLogger(__name__)

DEFAULT_CODES = [
    '1111111111111111',
    '1010101010101010',
    '1001001001001001',
    '1100110011001100',
    '1111111100000000',
    '0000000011111111',
]


@dataclass
class MetaAtomSection:
    f0: float = 60.0e9
    gamma: float = 2 * math.pi * 1.5e9
    F: float = 0.5
    f0_off: Optional[float] = None
    F_off: float = 0.0
    c0: Optional[float] = None


@dataclass
class FeedSection:
    eps_r: float = 3.0
    tan_delta: float = 0.001
    f_cutoff: float = 45.0e9
    positions: Optional[List[float]] = None  # None: n_elements points at the aperture spacing


@dataclass
class ApertureSection:
    n_elements: int = 16
    spacing: float = 2.0e-3
    theta_step_deg: float = 0.1
    depletion: float = 0.0


@dataclass
class GridSection:
    f_start: float = 59.0e9
    f_stop: float = 63.0e9
    n_points: int = 2001


@dataclass
class CodesSection:
    codes: List[str] = field(default_factory=lambda: list(DEFAULT_CODES))
    frequencies: List[float] = field(default_factory=lambda: [60.0e9, 61.0e9, 62.0e9])


@dataclass
class ImagingSection:
    frequencies: List[float] = field(default_factory=lambda: [59.5e9, 60.5e9, 61.5e9, 62.5e9])
    n_random_codes: int = 10
    n_pixels: int = 32
    u_max: float = 0.9
    rank_threshold: float = 1e-3
    two_way: bool = False
    comparison_frequency: float = 61.0e9

    def __post_init__(self):
        if not self.frequencies or min(self.frequencies) <= 0 or self.comparison_frequency <= 0:
            raise ConfigError("imaging frequencies must be a non-empty list of positive values")
        if self.n_random_codes < 0:
            raise ConfigError(f"imaging.n_random_codes must be >= 0, got {self.n_random_codes}")
        if not 0 < self.rank_threshold < 1:
            raise ConfigError(f"imaging.rank_threshold must be in (0, 1), got {self.rank_threshold}")


@dataclass
class DispersionSection:
    thickness: Optional[float] = None  # None: one element spacing


SECTIONS = {
    'meta_atom': MetaAtomSection,
    'feed': FeedSection,
    'aperture': ApertureSection,
    'grid': GridSection,
    'codes': CodesSection,
    'imaging': ImagingSection,
    'dispersion': DispersionSection,
}
TOP_LEVEL = ('seed', 'out_dir', 'workers')


@dataclass
class RunConfig:
    meta_atom: MetaAtomSection = field(default_factory=MetaAtomSection)
    feed: FeedSection = field(default_factory=FeedSection)
    aperture: ApertureSection = field(default_factory=ApertureSection)
    grid: GridSection = field(default_factory=GridSection)
    codes: CodesSection = field(default_factory=CodesSection)
    imaging: ImagingSection = field(default_factory=ImagingSection)
    dispersion: DispersionSection = field(default_factory=DispersionSection)
    seed: int = 0
    out_dir: Optional[str] = None
    workers: int = 1

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> 'RunConfig':
        if not isinstance(data, dict):
            raise ConfigError("config root must be a JSON object")
        unknown = [key for key in data if key not in SECTIONS and key not in TOP_LEVEL]
        if unknown:
            raise ConfigError(f"unknown config key: {sorted(unknown)[0]}")

        kwargs = {}
        for name, section_cls in SECTIONS.items():
            if name in data:
                kwargs[name] = _build_section(name, section_cls, data[name])
        types = {f.name: f.type for f in fields(cls)}
        for name in TOP_LEVEL:
            if name in data:
                kwargs[name] = _coerce(name, data[name], types[name])
        config = cls(**kwargs)
        if config.seed < 0:
            raise ConfigError(f"seed must be a non-negative integer, got {config.seed!r}")
        if config.workers < 1:
            raise ConfigError(f"workers must be a positive integer, got {config.workers!r}")
        return config

    # ==================== BUILDERS ====================

    def meta_params(self) -> LorentzianParams:
        return _checked('meta_atom', lambda: LorentzianParams(**asdict(self.meta_atom)))

    def siw_params(self) -> SiwParams:
        section = asdict(self.feed)
        positions = section.pop('positions')
        if positions is None:
            return _checked('feed', lambda: SiwParams.default(
                self.aperture.n_elements, self.aperture.spacing, **section))
        return _checked('feed', lambda: SiwParams(positions=tuple(positions), **section))

    def aperture_config(self) -> ApertureConfig:
        meta = self.meta_params()
        feed = self.siw_params()
        return _checked('aperture', lambda: ApertureConfig(meta=meta, feed=feed, **asdict(self.aperture)))

    def frequency_grid(self) -> FrequencyGrid:
        return _checked('grid', lambda: FrequencyGrid(**asdict(self.grid)))

    def scene_angles(self) -> np.ndarray:
        imaging = self.imaging
        return _checked('imaging', lambda: default_scene_angles(imaging.n_pixels, imaging.u_max))

    def imaging_ensemble(self, aperture: ApertureConfig) -> Tuple[List[HologramCode], List[float]]:
        imaging = self.imaging
        return _checked('imaging', lambda: default_ensemble(
            aperture, self.seed, imaging.frequencies, imaging.n_random_codes))

    def code_list(self) -> List[HologramCode]:
        return [parse_code(text, self.aperture.n_elements) for text in self.codes.codes]

    def output_dir(self) -> Path:
        return Path(self.out_dir) if self.out_dir else DATA_DIR


def _build_section(name: str, section_cls, values):
    if not isinstance(values, dict):
        raise ConfigError(f"config section {name} must be an object")
    types = {f.name: f.type for f in fields(section_cls)}
    for key in values:
        if key not in types:
            raise ConfigError(f"unknown config key: {name}.{key}")
    return section_cls(**{key: _coerce(f"{name}.{key}", value, types[key])
                          for key, value in values.items()})


def _coerce(path: str, value, annotation):
    """Check a JSON value against a field annotation; ints widen to float"""
    if get_origin(annotation) is Union:
        if value is None:
            return None
        annotation = next(a for a in get_args(annotation) if a is not type(None))
    if get_origin(annotation) is list:
        if not isinstance(value, list):
            raise ConfigError(f"{path} must be a list, got {value!r}")
        (item,) = get_args(annotation)
        return [_coerce(f"{path}[{i}]", v, item) for i, v in enumerate(value)]

    if annotation is float:
        valid = isinstance(value, (int, float)) and not isinstance(value, bool)
        value = float(value) if valid else value
    elif annotation is int:
        valid = isinstance(value, int) and not isinstance(value, bool)
    else:
        valid = isinstance(value, annotation)
    if not valid:
        raise ConfigError(f"{path} must be {annotation.__name__}, got {value!r}")
    return value


def _checked(section: str, build):
    try:
        return build()
    except (ValueError, TypeError) as e:
        raise ConfigError(f"invalid {section} configuration: {e}") from e


def parse_code(text: str, n_elements: int) -> HologramCode:
    """Parse a 0/1 code string and check it against the aperture size"""
    try:
        code = HologramCode.from_string(text)
    except DmaError as e:
        raise ConfigError(str(e)) from e
    if len(code) != n_elements:
        raise ConfigError(f"code {text!r} has {len(code)} bits, aperture has {n_elements} elements")
    return code


def load_run_config(path: Optional[Union[str, Path]] = None, environ=None) -> RunConfig:
    """
    Load a RunConfig: file values first, then DMA_OUT_DIR / DMA_WORKERS from the
    environment for anything the file leaves unset, then built-in defaults.

    Args:
        path: JSON file, or None for defaults only
        environ: mapping used instead of os.environ (tests)

    Returns:
        RunConfig
    """
    environ = os.environ if environ is None else environ
    data = {}
    if path is not None:
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as e:
            raise ConfigError(f"cannot read config file {path}: {e}") from e
        if text.strip():
            try:
                data = json.loads(text)
            except json.JSONDecodeError as e:
                raise ParseError(f"invalid JSON in {path}: {e.msg}", line=e.lineno) from e
        logger.info("loaded config from %s", path)
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")

    if 'out_dir' not in data and environ.get('DMA_OUT_DIR'):
        data = dict(data, out_dir=environ['DMA_OUT_DIR'])
    if 'workers' not in data and environ.get('DMA_WORKERS'):
        try:
            workers = int(environ['DMA_WORKERS'])
        except ValueError as e:
            raise ConfigError(f"DMA_WORKERS must be an integer, got {environ['DMA_WORKERS']!r}") from e
        data = dict(data, workers=workers)

    try:
        return RunConfig.from_dict(data)
    except TypeError as e:
        raise ConfigError(f"invalid configuration: {e}") from e
