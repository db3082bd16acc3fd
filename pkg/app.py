"""
DMA Simulator - command-line front end
Subcommands: dispersion | pattern | scan | table | design | image | metrics
Exit codes: 0 success, 2 usage/config error, 3 numerical error
"""

import argparse
import logging
import math
import os
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np
import pandas as pd
from dotenv import load_dotenv

# Load environment variables
load_dotenv()

from utils.aperture import beam_metrics, code_pattern, port_response
from utils.data_models import CELC_GEOMETRY_MM, Scene, SteeringTarget
from utils.dispersion import code_dispersion, dispersion_report, normalized_group_velocity
from utils.errors import ConfigError, DomainError
from utils.export_functions import (
    estimate_frame,
    measurement_matrix_frame,
    pattern_frame,
    port_frame,
    read_scene,
    s_params_frame,
    singular_values_frame,
    spectrum_frame,
    write_csv,
    write_json,
)
from utils.holography import (
    code_gain,
    exhaustive_best_code,
    frequency_scan,
    hybrid_diversity_table,
    scan_table_frame,
    synthesize_code,
    table_span,
)
from utils.imaging import (
    build_measurement_matrix,
    diversity_metrics,
    forward_measure,
    localize,
    reconstruct_matched_filter,
    reconstruct_tikhonov,
    relative_error,
    single_frequency_ensemble,
)
from utils.meta_atom import OFF, ON, analytic_group_delay, element_radiated_fraction, shunt_s_params
from utils.run_config import RunConfig, load_run_config, parse_code

logger = logging.getLogger('app')

GHZ = 1e9


def _db(value: float) -> float:
    return 20 * math.log10(value) if value > 0 else -math.inf


# ==================== SUBCOMMANDS ====================

def cmd_dispersion(config: RunConfig, args, out: Path) -> List[Path]:
    """Dispersion indicators of one meta-atom (or of the coded aperture with --code)"""
    grid = config.frequency_grid()
    if grid.n_points < 3:
        raise ConfigError("grid too coarse for derivatives (need n_points >= 3)")
    thickness = args.thickness if args.thickness is not None else config.dispersion.thickness
    if thickness is not None and not thickness > 0:
        raise ConfigError(f"thickness must be positive, got {thickness}")

    files = []
    if args.code:
        aperture = config.aperture_config()
        code = parse_code(args.code, aperture.n_elements)
        report = code_dispersion(aperture, code, grid, thickness)
        files.append(write_csv(port_frame(port_response(aperture, code, grid)), out / 's_params.csv'))
        delay = spectrum_frame(report.group_delay, 'group_delay_s')
    else:
        meta = config.meta_params()
        state = OFF if args.off else ON
        if thickness is None:
            thickness = config.aperture.spacing
        report = dispersion_report(shunt_s_params(meta, state, grid), thickness)
        s_frame = s_params_frame(report.response)
        s_frame['radiated_fraction'] = element_radiated_fraction(meta, state, grid).values
        files.append(write_csv(s_frame, out / 's_params.csv'))
        delay = spectrum_frame(report.group_delay, 'group_delay_s')
        delay['group_delay_analytic_s'] = analytic_group_delay(meta, state, grid).values

    files.append(write_csv(spectrum_frame(report.phase, 'phase_rad'), out / 'phase.csv'))
    files.append(write_csv(delay, out / 'group_delay.csv'))

    velocity = spectrum_frame(report.group_velocity, 'group_velocity_m_per_s')
    velocity['group_velocity_over_c'] = normalized_group_velocity(report.group_velocity).values
    files.append(write_csv(velocity, out / 'group_velocity.csv'))

    index = spectrum_frame(report.effective_index, 'effective_index')
    index['group_index'] = report.group_index.values
    files.append(write_csv(index, out / 'group_index.csv'))
    files.append(write_csv(spectrum_frame(report.effective_permittivity, 'eps_eff'), out / 'eps_eff.csv'))
    files.append(write_json(report.anomalous_bands.to_dict(), out / 'anomalous_bands.json'))

    summary = report.summary()
    summary['celc_geometry_mm'] = CELC_GEOMETRY_MM
    summary['mode'] = f"code {args.code}" if args.code else ('off' if args.off else 'on')
    files.append(write_json(summary, out / 'dispersion_summary.json'))
    print(f"Anomalous bands: {len(report.anomalous_bands)}")
    for band in report.anomalous_bands:
        print(f"  {band.f_lo / GHZ:.4f} - {band.f_hi / GHZ:.4f} GHz")
    return files


def cmd_pattern(config: RunConfig, args, out: Path) -> List[Path]:
    """Far-field pattern, beam metrics and port response of one hologram"""
    aperture = config.aperture_config()
    code = parse_code(args.code, aperture.n_elements)
    frequency = args.ghz * GHZ
    pattern = code_pattern(aperture, code, frequency)
    metrics = beam_metrics(pattern)

    files = [write_csv(pattern_frame(pattern), out / 'pattern.csv')]
    files.append(write_json({'code': str(code), 'frequency_hz': frequency, 'metrics': metrics.to_dict()},
                            out / 'pattern_metrics.json'))
    files.append(write_csv(port_frame(port_response(aperture, code, config.frequency_grid())),
                           out / 'port_response.csv'))
    print(f"Code {code} at {args.ghz:g} GHz: peak {metrics.peak_angle:.2f} deg, "
          f"HPBW {metrics.hpbw:.2f} deg, SLL {metrics.sll:.2f} dB")
    return files


def _frequencies(args, config: RunConfig) -> List[float]:
    if args.ghz:
        return [f * GHZ for f in args.ghz]
    return list(config.codes.frequencies)


def cmd_scan(config: RunConfig, args, out: Path) -> List[Path]:
    """Beam metrics of one hologram across frequencies"""
    aperture = config.aperture_config()
    code = parse_code(args.code, aperture.n_elements)
    result = frequency_scan(aperture, code, _frequencies(args, config))
    for frequency, metrics in result.rows:
        print(f"  {frequency / GHZ:8.3f} GHz  peak {metrics.peak_angle:8.3f} deg")
    return [write_csv(scan_table_frame([result]), out / 'scan.csv')]


def cmd_table(config: RunConfig, args, out: Path) -> List[Path]:
    """Hybrid code x frequency beam table"""
    aperture = config.aperture_config()
    if args.code:
        codes = [parse_code(text, aperture.n_elements) for text in args.code]
    else:
        codes = config.code_list()
    table = hybrid_diversity_table(aperture, codes, _frequencies(args, config))

    summary = {
        'table_span_deg': table_span(table),
        'code_spans_deg': {str(row.code): row.span for row in table},
    }
    print(f"Table span {summary['table_span_deg']:.2f} deg, "
          f"widest single code {max(summary['code_spans_deg'].values()):.2f} deg")
    return [write_csv(scan_table_frame(table), out / 'table.csv'),
            write_json(summary, out / 'table_summary.json')]


def cmd_design(config: RunConfig, args, out: Path) -> List[Path]:
    """Holographic code for a steering target, optionally checked against the exhaustive oracle"""
    if not abs(args.theta) < 90:
        raise ConfigError(f"target angle must satisfy |theta| < 90, got {args.theta}")
    aperture = config.aperture_config()
    target = SteeringTarget(args.theta, args.ghz * GHZ)

    code = synthesize_code(aperture, target)
    gain = code_gain(aperture, code, target)
    report = {
        'target': {'theta_deg': target.theta_t, 'frequency_hz': target.frequency},
        'synthesized': {'code': str(code), 'gain': gain, 'gain_db': _db(gain)},
    }
    print(code)

    if args.oracle:
        workers = args.workers if args.workers is not None else config.workers
        if workers < 1:
            raise ConfigError(f"workers must be >= 1, got {workers}")
        best, best_gain = exhaustive_best_code(aperture, target, workers=workers)
        gap = _db(best_gain) - _db(gain) if gain > 0 else math.inf
        report['oracle'] = {'code': str(best), 'gain': best_gain, 'gain_db': _db(best_gain),
                            'gap_db': gap}
        print(f"oracle {best}  gap {gap:.3f} dB")
    return [write_json(report, out / 'design.json')]


def _scene(config: RunConfig, args, angles) -> Scene:
    if args.scene:
        return read_scene(args.scene)
    if args.point is None:
        raise ConfigError("image needs --scene PATH or --point PIXEL")
    if not 0 <= args.point < len(angles):
        raise ConfigError(f"--point must be in 0..{len(angles) - 1}, got {args.point}")
    return Scene.point(angles, args.point)


def cmd_image(config: RunConfig, args, out: Path) -> List[Path]:
    """Simulated measurement and reconstruction with the default frequency-code ensemble"""
    aperture = config.aperture_config()
    imaging = config.imaging
    angles = config.scene_angles()
    scene = _scene(config, args, angles)

    codes, frequencies = config.imaging_ensemble(aperture)
    H = build_measurement_matrix(aperture, codes, frequencies, scene.pixel_angles,
                                 two_way=imaging.two_way)
    g = forward_measure(H, scene, args.noise, seed=config.seed)
    diversity = diversity_metrics(H, imaging.rank_threshold)
    sigma_1 = float(diversity.singular_values[0])

    report = {'method': args.method, 'noise_sigma': args.noise, 'shape': list(H.shape),
              'localized_pixel': localize(H, g), 'diversity': diversity.to_dict()}
    if args.method == 'mf':
        estimate = reconstruct_matched_filter(H, g)
        report['zero_columns'] = list(estimate.zero_columns)
    else:
        ladder = args.lam or [1e-12]
        estimates = [reconstruct_tikhonov(H, g, lam * sigma_1 ** 2) for lam in ladder]
        report['lambda_over_sigma1_sq'] = ladder
        report['estimate_norms'] = [e.norm for e in estimates]
        estimate = estimates[0]
    if np.any(scene.reflectivity != 0):
        report['relative_error'] = relative_error(estimate, scene)

    print(f"Localized pixel {report['localized_pixel']} "
          f"({H.pixel_angles[report['localized_pixel']]:.2f} deg)")
    return [write_csv(estimate_frame(scene.pixel_angles, estimate), out / 'estimate.csv'),
            write_csv(measurement_matrix_frame(H), out / 'measurement_matrix.csv'),
            write_json(report, out / 'image_report.json')]


def cmd_metrics(config: RunConfig, args, out: Path) -> List[Path]:
    """Diversity of the frequency-code ensemble against an equal-size single-frequency one"""
    aperture = config.aperture_config()
    imaging = config.imaging
    angles = config.scene_angles()

    codes, frequencies = config.imaging_ensemble(aperture)
    H = build_measurement_matrix(aperture, codes, frequencies, angles, two_way=imaging.two_way)
    single_codes, single_freq = single_frequency_ensemble(
        aperture, H.n_rows, imaging.comparison_frequency, config.seed)
    H_single = build_measurement_matrix(aperture, single_codes, single_freq, angles,
                                        two_way=imaging.two_way)

    hybrid = diversity_metrics(H, imaging.rank_threshold)
    single = diversity_metrics(H_single, imaging.rank_threshold)
    frame = pd.concat([singular_values_frame(hybrid, 'frequency_code'),
                       singular_values_frame(single, 'single_frequency')], ignore_index=True)
    print(f"Effective rank: frequency-code {hybrid.effective_rank}, "
          f"single-frequency {single.effective_rank}")
    return [write_json({'frequency_code': hybrid.to_dict(), 'single_frequency': single.to_dict()},
                       out / 'diversity.json'),
            write_csv(frame, out / 'singular_values.csv')]


COMMANDS = {
    'dispersion': cmd_dispersion,
    'pattern': cmd_pattern,
    'scan': cmd_scan,
    'table': cmd_table,
    'design': cmd_design,
    'image': cmd_image,
    'metrics': cmd_metrics,
}


# ==================== ARGUMENTS ====================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='dma', description='Binary-coded dynamic metasurface antenna simulator')
    parser.add_argument('--config', help='JSON run configuration')
    parser.add_argument('--out', help='output directory (default: data/ or DMA_OUT_DIR)')
    parser.add_argument('--seed', type=int, help='seed for random codes and noise')
    parser.add_argument('-v', '--verbose', action='store_true', help='log progress at INFO level')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('dispersion', help='dispersion indicators of the meta-atom')
    p.add_argument('--off', action='store_true', help='off-state element')
    p.add_argument('--code', help='analyse the coded aperture instead of one element')
    p.add_argument('--thickness', type=float, help='retrieval thickness in metres')

    p = sub.add_parser('pattern', help='far-field pattern of one code')
    p.add_argument('code')
    p.add_argument('--ghz', type=float, default=60.0, help='frequency in GHz')

    p = sub.add_parser('scan', help='frequency scan of one code')
    p.add_argument('code')
    p.add_argument('--ghz', type=float, nargs='+', help='frequencies in GHz')

    p = sub.add_parser('table', help='hybrid code x frequency table')
    p.add_argument('--code', action='append', help='code (repeatable; default: configured codes)')
    p.add_argument('--ghz', type=float, nargs='+', help='frequencies in GHz')

    p = sub.add_parser('design', help='holographic code for a steering angle')
    p.add_argument('--theta', type=float, required=True, help='target angle in degrees')
    p.add_argument('--ghz', type=float, default=60.0, help='frequency in GHz')
    p.add_argument('--oracle', action='store_true', help='also run the exhaustive search')
    p.add_argument('--workers', type=int, help='threads for the exhaustive search')

    p = sub.add_parser('image', help='simulated imaging and reconstruction')
    p.add_argument('--scene', help='scene CSV (angle_deg,re,im)')
    p.add_argument('--point', type=int, help='single unit scatterer at this pixel')
    p.add_argument('--noise', type=float, default=0.0, help='noise std per component')
    p.add_argument('--method', choices=['mf', 'tikhonov'], default='mf')
    p.add_argument('--lambda', dest='lam', type=float, action='append',
                   help='Tikhonov weight in units of sigma_1^2 (repeatable)')

    sub.add_parser('metrics', help='diversity metrics of the imaging ensembles')
    return parser


def _setup_logging(verbose: bool):
    level = logging.INFO
    if not verbose:
        level = getattr(logging, os.getenv('DMA_LOG_LEVEL', 'WARNING').upper(), logging.WARNING)
    logging.basicConfig(level=level, format='%(levelname)s %(name)s: %(message)s',
                        stream=sys.stderr, force=True)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    _setup_logging(args.verbose)
    try:
        config = load_run_config(args.config)
        if args.out:
            config.out_dir = args.out
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError(f"seed must be >= 0, got {args.seed}")
            config.seed = args.seed
        if args.command == 'image' and args.noise < 0:
            raise ConfigError(f"noise must be >= 0, got {args.noise}")

        out = config.output_dir()
        out.mkdir(parents=True, exist_ok=True)
        files = COMMANDS[args.command](config, args, out)
        files.append(write_json(config.to_dict(), out / 'resolved_config.json'))
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except DomainError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3

    print(f"✅ Wrote {len(files)} file(s) to {out}")
    return 0


if __name__ == '__main__':
    sys.exit(main())
