"""
CLI tests: subcommands, output files and exit codes
"""

import json
import math

import numpy as np
import pandas as pd
import pytest
from scipy.constants import c

from app import main
from utils.data_models import SiwParams
from utils.feedline import guided_wavenumber
from utils.imaging import default_scene_angles


def run(tmp_path, *argv, config=None):
    args = ['--out', str(tmp_path)]
    if config is not None:
        path = tmp_path / 'input_config.json'
        path.write_text(json.dumps(config))
        args += ['--config', str(path)]
    return main(args + list(argv))


def load(path):
    return json.loads(path.read_text())


class TestDispersionCommand:

    def test_default_run(self, tmp_path):
        assert run(tmp_path, 'dispersion') == 0
        bands = load(tmp_path / 'anomalous_bands.json')['bands']
        assert len(bands) == 1
        assert bands[0]['f_lo'] < 60e9 < bands[0]['f_hi']
        delay = pd.read_csv(tmp_path / 'group_delay.csv')
        assert list(delay.columns) == ['frequency_hz', 'group_delay_s', 'group_delay_analytic_s']
        assert len(delay) == 2001
        summary = load(tmp_path / 'dispersion_summary.json')
        assert summary['mode'] == 'on'
        assert (tmp_path / 'resolved_config.json').exists()

    def test_off_state_has_flat_delay(self, tmp_path):
        assert run(tmp_path, 'dispersion', '--off') == 0
        delay = pd.read_csv(tmp_path / 'group_delay.csv')
        assert np.max(np.abs(delay['group_delay_s'])) < 1e-15
        assert load(tmp_path / 'anomalous_bands.json')['bands'] == []

    def test_coded_aperture(self, tmp_path):
        assert run(tmp_path, 'dispersion', '--code', '1010101010101010') == 0
        ports = pd.read_csv(tmp_path / 's_params.csv')
        assert 'dielectric_fraction' in ports.columns

    def test_two_point_grid_is_a_usage_error(self, tmp_path, capsys):
        assert run(tmp_path, 'dispersion', config={'grid': {'n_points': 2}}) == 2
        assert 'grid too coarse' in capsys.readouterr().err


class TestPatternCommands:

    def test_alternating_pattern(self, tmp_path):
        assert run(tmp_path, 'pattern', '1010101010101010') == 0
        pattern = pd.read_csv(tmp_path / 'pattern.csv')
        assert len(pattern) == 1801
        metrics = load(tmp_path / 'pattern_metrics.json')['metrics']
        assert abs(metrics['peak_angle'] + 5.93) <= 0.3

    def test_zero_code_has_no_beam(self, tmp_path, capsys):
        assert run(tmp_path, 'pattern', '0' * 16) == 3
        assert 'no beam' in capsys.readouterr().err

    def test_wrong_code_length(self, tmp_path):
        assert run(tmp_path, 'pattern', '1010') == 2

    def test_repeated_runs_write_identical_files(self, tmp_path):
        assert run(tmp_path, 'pattern', '1001001001001001', '--ghz', '61') == 0
        first = {p.name: p.read_bytes() for p in tmp_path.iterdir()}
        assert run(tmp_path, 'pattern', '1001001001001001', '--ghz', '61') == 0
        second = {p.name: p.read_bytes() for p in tmp_path.iterdir()}
        assert first == second

    def test_resolved_config_reproduces_the_run(self, tmp_path):
        first, second = tmp_path / 'first', tmp_path / 'second'
        assert main(['--out', str(first), 'pattern', '1100110011001100']) == 0
        resolved = str(first / 'resolved_config.json')
        assert main(['--config', resolved, '--out', str(second), 'pattern', '1100110011001100']) == 0
        for name in ('pattern.csv', 'pattern_metrics.json', 'port_response.csv'):
            assert (first / name).read_bytes() == (second / name).read_bytes()

    def test_scan(self, tmp_path):
        assert run(tmp_path, 'scan', '1010101010101010', '--ghz', '60', '61', '62') == 0
        scan = pd.read_csv(tmp_path / 'scan.csv', dtype={'code': str})
        assert len(scan) == 3
        assert np.all(np.diff(scan['peak_angle_deg']) > 0)

    def test_table(self, tmp_path):
        assert run(tmp_path, 'table') == 0
        table = pd.read_csv(tmp_path / 'table.csv', dtype={'code': str})
        assert len(table) == 18
        summary = load(tmp_path / 'table_summary.json')
        assert summary['table_span_deg'] > max(summary['code_spans_deg'].values())


class TestDesignCommand:

    def test_phase_locked_target(self, tmp_path, capsys):
        omega = 2 * math.pi * 60e9
        beta = guided_wavenumber(SiwParams.default(eps_r=1.0), omega).real
        theta = math.degrees(math.asin(beta / (omega / c)))
        assert run(tmp_path, 'design', '--theta', repr(theta), config={'feed': {'eps_r': 1.0}}) == 0
        assert '1' * 16 in capsys.readouterr().out
        assert load(tmp_path / 'design.json')['synthesized']['code'] == '1' * 16

    def test_oracle_gap(self, tmp_path):
        assert run(tmp_path, 'design', '--theta', '30', '--oracle') == 0
        report = load(tmp_path / 'design.json')
        assert 0 <= report['oracle']['gap_db'] <= 3.0

    def test_zero_workers(self, tmp_path, capsys):
        assert run(tmp_path, 'design', '--theta', '10', '--oracle', '--workers', '0') == 2
        assert 'workers' in capsys.readouterr().err

    @pytest.mark.parametrize('theta', ['90', '95', '-120'])
    def test_invisible_target(self, tmp_path, theta):
        assert run(tmp_path, 'design', '--theta', theta) == 2


class TestImagingCommands:

    def test_point_scatterer(self, tmp_path):
        assert run(tmp_path, 'image', '--point', '7') == 0
        report = load(tmp_path / 'image_report.json')
        assert report['localized_pixel'] == 7
        assert report['shape'] == [64, 32]
        estimate = pd.read_csv(tmp_path / 'estimate.csv')
        assert len(estimate) == 32

    def test_tikhonov_ladder(self, tmp_path):
        assert run(tmp_path, 'image', '--point', '3', '--method', 'tikhonov',
                   '--lambda', '1e-2', '--lambda', '1', '--lambda', '1e2') == 0
        norms = load(tmp_path / 'image_report.json')['estimate_norms']
        assert norms[0] > norms[1] > norms[2]

    def test_scene_file(self, tmp_path):
        angles = default_scene_angles()
        values = np.zeros(32)
        values[20] = 1.0
        scene = pd.DataFrame({'angle_deg': angles, 're': values, 'im': np.zeros(32)})
        scene.to_csv(tmp_path / 'scene.csv', index=False, float_format='%.17g')
        assert run(tmp_path, 'image', '--scene', str(tmp_path / 'scene.csv')) == 0
        assert load(tmp_path / 'image_report.json')['localized_pixel'] == 20

    def test_malformed_scene(self, tmp_path, capsys):
        path = tmp_path / 'scene.csv'
        path.write_text('angle_deg,re,im\n-10,1,0\n-20,1,0\n')
        assert run(tmp_path, 'image', '--scene', str(path)) == 2
        assert 'line 3' in capsys.readouterr().err

    def test_image_needs_a_scene(self, tmp_path):
        assert run(tmp_path, 'image') == 2

    def test_metrics(self, tmp_path):
        assert run(tmp_path, 'metrics') == 0
        diversity = load(tmp_path / 'diversity.json')
        assert (diversity['frequency_code']['effective_rank']
                > diversity['single_frequency']['effective_rank'])
        values = pd.read_csv(tmp_path / 'singular_values.csv')
        assert set(values['ensemble']) == {'frequency_code', 'single_frequency'}


class TestExitCodes:

    def test_unknown_config_key(self, tmp_path, capsys):
        assert run(tmp_path, 'pattern', '1' * 16, config={'aperture': {'spacin': 2e-3}}) == 2
        assert 'aperture.spacin' in capsys.readouterr().err

    @pytest.mark.parametrize('config, argv', [
        ({'grid': {'n_points': 'abc'}}, ['dispersion']),
        ({'imaging': {'n_pixels': 'x'}}, ['image', '--point', '1']),
        ({'imaging': {'n_pixels': 0}}, ['metrics']),
        ({'feed': {'eps_r': '3'}}, ['pattern', '1' * 16]),
    ])
    def test_wrong_config_values(self, tmp_path, capsys, config, argv):
        assert run(tmp_path, *argv, config=config) == 2
        assert 'error: ' in capsys.readouterr().err

    @pytest.mark.parametrize('thickness', ['0', '-0.001'])
    def test_non_positive_thickness(self, tmp_path, capsys, thickness):
        assert run(tmp_path, 'dispersion', '--thickness', thickness) == 2
        assert 'thickness' in capsys.readouterr().err

    def test_non_positive_thickness_in_config(self, tmp_path):
        assert run(tmp_path, 'dispersion', config={'dispersion': {'thickness': 0.0}}) == 2

    def test_unknown_subcommand(self, tmp_path):
        assert run(tmp_path, 'hologram') == 2

    def test_negative_noise(self, tmp_path):
        assert run(tmp_path, 'image', '--point', '1', '--noise', '-1') == 2
