"""
Export Functions - CSV and JSON files written by the CLI, and their readers
CSV: header row, no index, '%.17g' floats, complex values as <name>_re / <name>_im
JSON: sorted keys, two-space indent, trailing newline
"""

import json
import logging
import math
import re
from pathlib import Path
from typing import Dict, Union

import numpy as np
import pandas as pd

from utils.data_models import (
    BeamMetrics,
    DiversityReport,
    Estimate,
    FrequencyGrid,
    HologramCode,
    MeasurementMatrix,
    PortResponse,
    RadiationPattern,
    RealSpectrum,
    Scene,
    TwoPortResponse,
)
from utils.errors import ParseError

logger = logging.getLogger(__name__)

FLOAT_FORMAT = '%.17g'
SCENE_COLUMNS = ['angle_deg', 're', 'im']

PathLike = Union[str, Path]


# ==================== WRITERS ====================

def write_csv(frame: pd.DataFrame, path: PathLike) -> Path:
    path = Path(path)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
    logger.debug("wrote %s (%d rows)", path, len(frame))
    return path


def write_json(data: dict, path: PathLike) -> Path:
    path = Path(path)
    path.write_text(json.dumps(data, sort_keys=True, indent=2) + '\n')
    logger.debug("wrote %s", path)
    return path


def _complex_columns(name: str, values) -> Dict[str, np.ndarray]:
    values = np.asarray(values, dtype=complex)
    return {f'{name}_re': values.real, f'{name}_im': values.imag}


def s_params_frame(response: TwoPortResponse) -> pd.DataFrame:
    columns = {'frequency_hz': response.grid.frequencies}
    for name in ('s11', 's21', 's12', 's22'):
        columns.update(_complex_columns(name, getattr(response, name)))
    return pd.DataFrame(columns)


def spectrum_frame(spectrum: RealSpectrum, name: str) -> pd.DataFrame:
    return pd.DataFrame({'frequency_hz': spectrum.grid.frequencies, name: spectrum.values})


def port_frame(port: PortResponse) -> pd.DataFrame:
    frame = s_params_frame(port.response)
    frame['radiated_fraction'] = port.radiated_fraction.values
    frame['dielectric_fraction'] = port.dielectric_fraction.values
    return frame


def pattern_frame(pattern: RadiationPattern) -> pd.DataFrame:
    """theta_deg, field_re, field_im and the peak-normalized magnitude in dB"""
    with np.errstate(divide='ignore'):
        magnitude_db = 20 * np.log10(pattern.normalized().magnitude)
    columns = {'theta_deg': pattern.theta}
    columns.update(_complex_columns('field', pattern.field))
    columns['magnitude_db'] = magnitude_db
    return pd.DataFrame(columns)


def estimate_frame(pixel_angles, estimate: Estimate) -> pd.DataFrame:
    columns = {'pixel': np.arange(estimate.values.size), 'angle_deg': np.asarray(pixel_angles)}
    columns.update(_complex_columns('estimate', estimate.values))
    columns['magnitude'] = np.abs(estimate.values)
    return pd.DataFrame(columns)


def singular_values_frame(report: DiversityReport, ensemble: str) -> pd.DataFrame:
    return pd.DataFrame({
        'ensemble': ensemble,
        'index': np.arange(report.singular_values.size),
        'singular_value': report.singular_values,
    })


def measurement_matrix_frame(H: MeasurementMatrix) -> pd.DataFrame:
    """Long form: one line per (row, pixel) entry"""
    n_rows, n_pixels = H.shape
    rows = np.repeat(np.arange(n_rows), n_pixels)
    pixels = np.tile(np.arange(n_pixels), n_rows)
    columns = {'row': rows}
    if H.rows is not None:
        columns['code'] = np.repeat([str(code) for code, _ in H.rows], n_pixels)
        columns['frequency_hz'] = np.repeat([f for _, f in H.rows], n_pixels)
    columns['pixel'] = pixels
    columns['angle_deg'] = H.pixel_angles[pixels]
    columns.update(_complex_columns('h', H.entries.ravel()))
    return pd.DataFrame(columns)


def scene_frame(scene: Scene) -> pd.DataFrame:
    return pd.DataFrame({
        'angle_deg': scene.pixel_angles,
        're': scene.reflectivity.real,
        'im': scene.reflectivity.imag,
    })


# ==================== READERS ====================

def read_csv(path: PathLike) -> pd.DataFrame:
    return pd.read_csv(path, float_precision='round_trip')


def read_json(path: PathLike) -> dict:
    return json.loads(Path(path).read_text())


def _grid_from(frequencies: np.ndarray) -> FrequencyGrid:
    return FrequencyGrid(float(frequencies[0]), float(frequencies[-1]), int(frequencies.size))


def _complex(frame: pd.DataFrame, name: str) -> np.ndarray:
    return frame[f'{name}_re'].to_numpy() + 1j * frame[f'{name}_im'].to_numpy()


def read_s_params(path: PathLike) -> TwoPortResponse:
    frame = read_csv(path)
    grid = _grid_from(frame['frequency_hz'].to_numpy())
    return TwoPortResponse(grid, _complex(frame, 's11'), _complex(frame, 's21'),
                           _complex(frame, 's12'), _complex(frame, 's22'))


def read_spectrum(path: PathLike, name: str, unit: str = '') -> RealSpectrum:
    frame = read_csv(path)
    grid = _grid_from(frame['frequency_hz'].to_numpy())
    return RealSpectrum(grid, frame[name].to_numpy(), unit)


def read_pattern(path: PathLike, frequency: float) -> RadiationPattern:
    frame = read_csv(path)
    return RadiationPattern(frequency, frame['theta_deg'].to_numpy(), _complex(frame, 'field'))


def read_beam_metrics(path: PathLike) -> BeamMetrics:
    data = read_json(path)
    return BeamMetrics.from_dict(data['metrics'] if 'metrics' in data else data)


def read_measurement_matrix(path: PathLike) -> MeasurementMatrix:
    frame = pd.read_csv(path, float_precision='round_trip', dtype={'code': str})
    n_rows = int(frame['row'].max()) + 1
    n_pixels = int(frame['pixel'].max()) + 1
    entries = _complex(frame, 'h').reshape(n_rows, n_pixels)
    angles = frame['angle_deg'].to_numpy()[:n_pixels]
    rows = None
    if 'code' in frame:
        first = frame[frame['pixel'] == 0]
        rows = tuple((HologramCode.from_string(code), float(f))
                     for code, f in zip(first['code'], first['frequency_hz']))
    return MeasurementMatrix(entries, angles, rows)


def write_scene(scene: Scene, path: PathLike) -> Path:
    return write_csv(scene_frame(scene), path)


def read_scene(path: PathLike) -> Scene:
    """
    Parse a scene CSV (header angle_deg,re,im; the header is line 1)

    Raises:
        ParseError naming the offending line
    """
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    except pd.errors.EmptyDataError:
        raise ParseError("scene file is empty", line=1) from None
    except pd.errors.ParserError as e:
        match = re.search(r'line (\d+)', str(e))
        raise ParseError(f"malformed scene row: {e}", line=int(match.group(1)) if match else None) from e
    except OSError as e:
        raise ParseError(f"cannot read scene file {path}: {e}") from e

    if [c.strip() for c in frame.columns] != SCENE_COLUMNS:
        raise ParseError(f"expected header {','.join(SCENE_COLUMNS)}, got {','.join(frame.columns)}",
                         line=1)
    if frame.empty:
        raise ParseError("scene file has no pixels", line=2)

    angles, values = [], []
    for k, (angle, real, imag) in enumerate(frame.itertuples(index=False, name=None)):
        line = k + 2
        try:
            angle, real, imag = float(angle), float(real), float(imag)
        except ValueError:
            raise ParseError(f"non-numeric value in {angle!r},{real!r},{imag!r}", line=line) from None
        if not all(math.isfinite(v) for v in (angle, real, imag)):
            raise ParseError("non-finite value", line=line)
        if abs(angle) >= 90:
            raise ParseError(f"angle {angle} outside (-90, 90)", line=line)
        if angles and angle <= angles[-1]:
            raise ParseError(f"angle {angle} not above the previous pixel {angles[-1]}", line=line)
        angles.append(angle)
        values.append(complex(real, imag))
    return Scene(np.array(angles), np.array(values))
