import io
import shutil
import tempfile
from dataclasses import replace
from pathlib import Path
from unittest import mock

import numpy as np
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, tag

from apps.masking import loss as masking_loss
from apps.scenesim.presets import preset
from apps.scenesim.render import render
from apps.system.formats import load_mask_png, load_pfm, save_pfm
from apps.system.utils import read_json

SMALL = ['--width', '64', '--height', '48']


def run(*args):
    out = io.StringIO()
    call_command(*args, stdout=out, stderr=io.StringIO())
    return out.getvalue()


class CommandTestCase(SimpleTestCase):
    def setUp(self):
        self.tmp = Path(tempfile.mkdtemp())
        self.addCleanup(shutil.rmtree, self.tmp, ignore_errors=True)

    def simulate(self, name='scene', *extra):
        out = self.tmp / name
        run('simulate', '--out', str(out), '--preset', 'static', *SMALL, *extra)
        return out


class SimulateCommandTests(CommandTestCase):
    def test_writes_sample_and_manifest(self):
        out = self.simulate()
        for name in ('scene.json', 'labels.png', 'labels.json', 'poses.txt', 'manifest.json',
                     'image_t.png', 'image_t-1.png', 'image_t+1.png', 'depth_t.pfm', 'depth_t.png',
                     'occlusion_t-1.png', 'occlusion_t+1.png'):
            self.assertTrue((out / name).exists(), name)
        manifest = read_json(out / 'manifest.json')
        self.assertEqual(manifest['command'], 'simulate')
        self.assertEqual(manifest['status'], 'success')
        self.assertEqual(manifest['config']['preset'], 'static')
        self.assertIn(str(out / 'depth_t.pfm'), manifest['outputs'])

    def test_same_seed_same_bytes(self):
        first = self.simulate('a', '--seed', '3')
        second = self.simulate('b', '--seed', '3')
        for name in ('image_t.png', 'image_t+1.png', 'depth_t.pfm', 'poses.txt'):
            self.assertEqual((first / name).read_bytes(), (second / name).read_bytes(), name)

    def test_unknown_preset_is_input_error(self):
        with self.assertRaises(CommandError) as ctx:
            run('simulate', '--out', str(self.tmp / 'bad'), '--preset', 'nowhere', *SMALL)
        self.assertEqual(ctx.exception.returncode, 2)
        self.assertNotEqual(read_json(self.tmp / 'bad' / 'manifest.json')['status'], 'success')

    def test_missing_spec_file_is_input_error(self):
        with self.assertRaises(CommandError) as ctx:
            run('simulate', '--out', str(self.tmp / 'bad'), '--spec', str(self.tmp / 'nothing.json'))
        self.assertEqual(ctx.exception.returncode, 2)
        self.assertIn('nothing.json', str(ctx.exception))
        self.assertEqual(read_json(self.tmp / 'bad' / 'manifest.json')['status'], 'missing-file')

    def test_malformed_spec_file_is_input_error(self):
        spec = self.tmp / 'broken.json'
        spec.write_text('{"preset": "static",', encoding='utf-8')
        with self.assertRaises(CommandError) as ctx:
            run('simulate', '--out', str(self.tmp / 'bad'), '--spec', str(spec))
        self.assertEqual(ctx.exception.returncode, 2)
        self.assertEqual(read_json(self.tmp / 'bad' / 'manifest.json')['status'], 'bad-spec')


class OptimizeCommandTests(CommandTestCase):
    def test_zero_iterations_writes_initial_depth(self):
        out = self.tmp / 'opt'
        run('optimize', '--out', str(out), '--preset', 'static', *SMALL, '--scales', '3', '--iters', '0')
        depth = load_pfm(out / 'depth_t.pfm')
        self.assertEqual(depth.shape, (48, 64))
        np.testing.assert_allclose(depth, 4.0)
        self.assertEqual(len(pose_rows(out / 'poses.txt')), 2)
        report = read_json(out / 'metrics.json')
        self.assertEqual(report['code'], 0)
        self.assertEqual(report['data']['iterations'], 0)
        self.assertIn('abs_rel', report['data']['metrics'])
        lines = (out / 'loss.csv').read_text().splitlines()
        self.assertEqual(lines[0], 'iteration,loss,kept_fraction')
        self.assertEqual(len(lines), 2)

    def test_csv_format_and_checkpoints(self):
        out = self.tmp / 'opt'
        run(
            'optimize', '--out', str(out), '--preset', 'static', *SMALL, '--scales', '3', '--iters', '2',
            '--format', 'csv', '--checkpoint-every', '1', '--log-every', '1',
        )
        self.assertTrue((out / 'metrics.csv').exists())
        self.assertTrue((out / 'checkpoints' / 'iter_00000' / 'mask_t-1.png').exists())
        self.assertTrue((out / 'checkpoints' / 'iter_00001' / 'mask_t+1.png').exists())

    def test_progress_is_logged_once(self):
        out = self.tmp / 'opt'
        with self.assertLogs('apps.optimizer.optimize', level='INFO') as logs:
            stdout = run(
                'optimize', '--out', str(out), '--preset', 'static', *SMALL, '--scales', '3', '--iters', '2',
                '--no-coarse-to-fine', '--log-every', '1',
            )
        progress = [line for line in logs.output if 'iter ' in line]
        self.assertEqual(len(progress), 2)
        self.assertNotIn('iter ', stdout)

    def test_contra_scene_without_outlier_mask(self):
        out = self.tmp / 'contra'
        run(
            'optimize', '--out', str(out), '--preset', 'contra_dir', *SMALL, '--scales', '3', '--iters', '2',
            '--no-outlier-mask', '--log-every', '0',
        )
        report = read_json(out / 'metrics.json')['data']
        self.assertFalse(report['config']['flags']['outlier'])
        self.assertTrue(report['config']['flags']['principled'])
        self.assertIn('contra_dir', report['regions']['regions'])
        self.assertEqual(read_json(out / 'manifest.json')['status'], 'success')

    def test_divergence_exits_with_numerical_code(self):
        calls = {'n': 0}

        def flaky(*args, **kwargs):
            calls['n'] += 1
            result = masking_loss.total_loss(*args, **kwargs)
            if calls['n'] == 3:
                return replace(result, loss=float('nan'))
            return result

        out = self.tmp / 'diverged'
        with mock.patch('apps.optimizer.optimize.total_loss', side_effect=flaky):
            with self.assertRaises(CommandError) as ctx:
                run(
                    'optimize', '--out', str(out), '--preset', 'static', *SMALL, '--scales', '3',
                    '--iters', '5', '--no-coarse-to-fine', '--log-every', '0',
                )
        self.assertEqual(ctx.exception.returncode, 3)
        self.assertTrue((out / 'depth_t.pfm').exists())
        self.assertNotEqual(read_json(out / 'manifest.json')['status'], 'success')


def pose_rows(path):
    return [line for line in Path(path).read_text().splitlines() if line.strip()]


class MasksCommandTests(CommandTestCase):
    def test_identity_poses_keep_every_pixel_in_bounds(self):
        out = self.tmp / 'masks'
        run('masks', '--out', str(out), '--preset', 'static', *SMALL, '--scales', '3', '--identity')
        for frame in ('t-1', 't+1'):
            principled = load_mask_png(out / f'mask_principled_{frame}_r0.png')
            self.assertTrue(principled.all(), frame)
            self.assertTrue((out / f'mask_combined_{frame}_r0.png').exists())
            self.assertTrue((out / f'error_{frame}_r2.png').exists())
        report = read_json(out / 'masks.json')['data']
        self.assertEqual(len(report['rows']), 3 * 2)
        self.assertEqual(report['rows'][0]['principled_fraction'], 1.0)


class EvaluateCommandTests(CommandTestCase):
    def test_same_depths_score_perfectly(self):
        scene = self.simulate()
        out = self.tmp / 'eval'
        run(
            'evaluate', '--out', str(out), '--pred', str(scene), '--gt', str(scene),
            '--labels', str(scene / 'labels.png'), '--benchmark',
        )
        data = read_json(out / 'evaluation.json')['data']
        self.assertEqual([row['file'] for row in data['files']], ['depth_t+1.pfm', 'depth_t-1.pfm', 'depth_t.pfm'])
        overall = data['overall']
        self.assertAlmostEqual(overall['abs_rel'], 0.0, places=12)
        self.assertAlmostEqual(overall['rmse'], 0.0, places=12)
        self.assertEqual(overall['delta1'], 1.0)
        self.assertIn('background', data['regions']['regions'])
        self.assertEqual(len(data['benchmark']), 3)

    def test_trajectory_against_itself(self):
        scene = self.simulate()
        out = self.tmp / 'eval'
        poses = str(scene / 'poses.txt')
        run(
            'evaluate', '--out', str(out), '--pred', str(scene / 'depth_t.pfm'), '--gt', str(scene / 'depth_t.pfm'),
            '--pred-traj', poses, '--gt-traj', poses, '--snippet', '2',
        )
        ate = read_json(out / 'evaluation.json')['data']['ate']
        self.assertAlmostEqual(ate['mean'], 0.0, places=12)

    def test_scaled_prediction_without_median_scaling(self):
        gt = np.linspace(2.0, 20.0, 48).reshape(6, 8)
        save_pfm(self.tmp / 'gt' / 'a.pfm', gt)
        save_pfm(self.tmp / 'pred' / 'a.pfm', 1.2 * gt)
        out = self.tmp / 'eval'
        run(
            'evaluate', '--out', str(out), '--pred', str(self.tmp / 'pred'), '--gt', str(self.tmp / 'gt'),
            '--no-median-scaling', '--format', 'csv',
        )
        overall = read_json(out / 'evaluation.json')['data']['overall']
        self.assertAlmostEqual(overall['abs_rel'], 0.2, places=6)
        self.assertEqual(overall['delta1'], 1.0)
        self.assertTrue((out / 'evaluation.csv').read_text().startswith('file,'))

    def test_shape_mismatch_names_file(self):
        save_pfm(self.tmp / 'gt' / 'a.pfm', np.full((6, 8), 5.0))
        save_pfm(self.tmp / 'pred' / 'a.pfm', np.full((4, 8), 5.0))
        with self.assertRaises(CommandError) as ctx:
            run('evaluate', '--out', str(self.tmp / 'eval'), '--pred', str(self.tmp / 'pred'), '--gt', str(self.tmp / 'gt'))
        self.assertEqual(ctx.exception.returncode, 2)
        self.assertIn('a.pfm', str(ctx.exception))

    def test_prediction_subset_skips_other_frames(self):
        scene = self.simulate()
        pred = self.tmp / 'pred'
        pred.mkdir()
        shutil.copy(scene / 'depth_t.pfm', pred / 'depth_t.pfm')
        out = self.tmp / 'eval'
        run('evaluate', '--out', str(out), '--pred', str(pred), '--gt', str(scene))
        files = read_json(out / 'evaluation.json')['data']['files']
        self.assertEqual([row['file'] for row in files], ['depth_t.pfm'])

    def test_missing_ground_truth_is_input_error(self):
        scene = self.simulate()
        pred = self.tmp / 'pred'
        pred.mkdir()
        shutil.copy(scene / 'depth_t.pfm', pred / 'depth_t.pfm')
        shutil.copy(scene / 'depth_t.pfm', pred / 'depth_t+2.pfm')
        with self.assertRaises(CommandError) as ctx:
            run('evaluate', '--out', str(self.tmp / 'eval'), '--pred', str(pred), '--gt', str(scene))
        self.assertEqual(ctx.exception.returncode, 2)
        self.assertIn('depth_t+2.pfm', str(ctx.exception))

    def test_optimized_scene_evaluates_against_scene_dir(self):
        scene = self.simulate()
        opt = self.tmp / 'opt'
        run('optimize', '--scene', str(scene), '--out', str(opt), '--scales', '3', '--iters', '2', '--log-every', '0')
        out = self.tmp / 'eval'
        run(
            'evaluate', '--out', str(out), '--pred', str(opt), '--gt', str(scene),
            '--labels', str(scene / 'labels.png'),
        )
        data = read_json(out / 'evaluation.json')['data']
        self.assertEqual([row['file'] for row in data['files']], ['depth_t.pfm'])
        self.assertTrue(np.isfinite(data['overall']['abs_rel']))
        self.assertEqual(read_json(out / 'manifest.json')['status'], 'success')


class ReplayCommandTests(CommandTestCase):
    def test_replay_reproduces_outputs(self):
        first = self.simulate('first', '--seed', '7')
        second = self.tmp / 'second'
        run('replay', str(first / 'manifest.json'), '--out', str(second))
        for name in ('image_t.png', 'depth_t.pfm', 'labels.png', 'poses.txt'):
            self.assertEqual((first / name).read_bytes(), (second / name).read_bytes(), name)
        self.assertEqual(read_json(second / 'manifest.json')['seed'], 7)

    def test_missing_manifest(self):
        with self.assertRaises(CommandError) as ctx:
            run('replay', str(self.tmp / 'nothing.json'))
        self.assertEqual(ctx.exception.returncode, 2)


@tag('acceptance')
class MaskAcceptanceTests(CommandTestCase):
    def test_static_ground_truth_keeps_in_bounds_pixels(self):
        out = self.tmp / 'masks'
        run('masks', '--out', str(out), '--preset', 'static')
        for frame in ('t-1', 't+1'):
            in_bounds = load_mask_png(out / f'mask_principled_{frame}_r0.png')
            combined = load_mask_png(out / f'mask_combined_{frame}_r0.png')
            self.assertGreater((combined & in_bounds).sum() / in_bounds.sum(), 0.95, frame)

    def test_contra_object_is_outlier_under_background_depth(self):
        sample = render(preset('contra_dir'))
        background_depth = self.tmp / 'background.pfm'
        save_pfm(background_depth, np.full(sample.labels.shape, sample.spec.background.distance))
        out = self.tmp / 'masks'
        run('masks', '--out', str(out), '--preset', 'contra_dir', '--depth', str(background_depth))
        contra = sample.label_mask('contra_dir')
        excluded = [~load_mask_png(out / f'mask_outlier_{frame}_r0.png')[contra] for frame in ('t-1', 't+1')]
        self.assertGreater(np.concatenate(excluded).mean(), 0.5)


@tag('acceptance')
class ContraOptimizeAcceptanceTests(CommandTestCase):
    def test_outlier_mask_lowers_contra_error(self):
        scores = {}
        for name, extra in (('default', []), ('no_outlier', ['--no-outlier-mask'])):
            out = self.tmp / name
            run('optimize', '--out', str(out), '--preset', 'contra_dir', '--iters', '300', '--log-every', '0', *extra)
            scores[name] = read_json(out / 'metrics.json')['data']['regions']['regions']['contra_dir']['abs_rel']
        self.assertLess(scores['default'], scores['no_outlier'])
