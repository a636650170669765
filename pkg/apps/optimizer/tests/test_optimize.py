from dataclasses import replace
from unittest import mock

import numpy as np
from django.test import SimpleTestCase

from apps.masking import loss as masking_loss
from apps.masking.config import LossConfig, MaskFlags
from apps.optimizer.ablate import AblationVariant, GroundTruth, ablate, comparison_rows, standard_variants
from apps.optimizer.config import OptimConfig
from apps.optimizer.objective import inverse_depth_pyramid
from apps.optimizer.optimize import optimize
from apps.scenesim.presets import preset
from apps.scenesim.render import render
from apps.system.exceptions import BadShapeError, ConfigError, DivergedError


def small_bundle(name='static', seed=0):
    sample = render(preset(name, seed=seed, width=64, height=48))
    return sample, sample.to_bundle(scales=3)


def quick_config(**overrides):
    params = dict(max_iters=6, loss=LossConfig(scales=3), log_every=0)
    params.update(overrides)
    return OptimConfig(**params)


class OptimConfigTests(SimpleTestCase):
    def test_invalid(self):
        with self.assertRaises(ConfigError):
            OptimConfig(step_size=0)
        with self.assertRaises(ConfigError):
            OptimConfig(max_iters=-1)
        with self.assertRaises(ConfigError):
            OptimConfig(decay_points=(1.5,))
        with self.assertRaises(ConfigError):
            OptimConfig(coarse_fraction=1.0)

    def test_step_decay(self):
        cfg = OptimConfig(max_iters=100)
        self.assertEqual(cfg.decay_iterations(), [75, 90])
        self.assertEqual(cfg.step_scale(0), 1.0)
        self.assertEqual(cfg.step_scale(74), 1.0)
        self.assertAlmostEqual(cfg.step_scale(75), 0.2, places=15)
        self.assertAlmostEqual(cfg.step_scale(90), 0.04, places=15)

    def test_stage_plan(self):
        cfg = OptimConfig(max_iters=100)
        self.assertEqual(cfg.stage_plan(), [(3, 13), (2, 13), (1, 13), (None, 61)])
        self.assertEqual(replace(cfg, coarse_to_fine=False).stage_plan(), [(None, 100)])
        self.assertEqual(sum(n for _, n in OptimConfig(max_iters=7).stage_plan()), 7)


class OptimizeTests(SimpleTestCase):
    def setUp(self):
        self.sample, self.bundle = small_bundle()

    def test_zero_iterations_returns_initialization(self):
        cfg = quick_config(max_iters=0)
        state = optimize(self.bundle, cfg)
        self.assertEqual(state.iteration, 0)
        self.assertEqual(len(state.loss_history), 1)
        for r, rho in enumerate(state.log_inv_depths):
            np.testing.assert_array_equal(rho, np.full(self.bundle.level_shape(r), np.log(cfg.init_inv_depth)))
        for pose in state.poses:
            np.testing.assert_array_equal(pose.matrix, np.eye(4))

    def test_zero_iterations_keeps_given_depth(self):
        inv = inverse_depth_pyramid(self.sample.depths[0], 3)
        state = optimize(self.bundle, quick_config(max_iters=0), inv_depths=inv)
        for r in range(3):
            np.testing.assert_allclose(state.inv_depths[r], inv[r], rtol=1e-15)

    def test_history_length_and_determinism(self):
        cfg = quick_config(init_jitter=0.05, seed=3)
        a = optimize(self.bundle, cfg)
        b = optimize(self.bundle, cfg)
        self.assertEqual(a.iteration, 6)
        self.assertEqual(len(a.loss_history), 7)
        self.assertEqual(a.loss_history, b.loss_history)
        for x, y in zip(a.log_inv_depths, b.log_inv_depths):
            np.testing.assert_array_equal(x, y)
        for x, y in zip(a.poses, b.poses):
            np.testing.assert_array_equal(x.matrix, y.matrix)

    def test_threads_do_not_change_result(self):
        cfg = quick_config(max_iters=3)
        a = optimize(self.bundle, cfg)
        b = optimize(self.bundle, replace(cfg, workers=4))
        self.assertEqual(a.loss_history, b.loss_history)

    def test_depth_only_descends_without_masks(self):
        cfg = quick_config(
            max_iters=10, step_size=0.5, coarse_to_fine=False, optimize_pose=False,
            pose_init=tuple(self.sample.gt_poses()), flags=MaskFlags.none(),
        )
        state = optimize(self.bundle, cfg)
        self.assertLess(state.loss_history[-1], state.loss_history[0])
        for pose, gt in zip(state.poses, self.sample.gt_poses()):
            np.testing.assert_array_equal(pose.matrix, gt.matrix)

    def test_ground_truth_beats_constant_initialization(self):
        gt_cfg = quick_config(max_iters=0, pose_init=tuple(self.sample.gt_poses()))
        at_truth = optimize(self.bundle, gt_cfg, inv_depths=inverse_depth_pyramid(self.sample.depths[0], 3))
        constant = optimize(self.bundle, gt_cfg)
        self.assertLess(at_truth.loss_history[0], constant.loss_history[0])
        self.assertLess(at_truth.loss_history[0], 0.01)

    def test_bad_pose_init(self):
        with self.assertRaises(BadShapeError):
            optimize(self.bundle, quick_config(pose_init=(self.sample.gt_poses()[0],)))

    def test_divergence_returns_last_finite_state(self):
        calls = {'n': 0}

        def flaky(*args, **kwargs):
            calls['n'] += 1
            result = masking_loss.total_loss(*args, **kwargs)
            if calls['n'] == 3:
                return replace(result, loss=float('nan'))
            return result

        with mock.patch('apps.optimizer.optimize.total_loss', side_effect=flaky):
            with self.assertRaises(DivergedError) as ctx:
                optimize(self.bundle, quick_config(coarse_to_fine=False))
        self.assertEqual(ctx.exception.exit_code, 3)
        self.assertEqual(ctx.exception.state.iteration, 1)
        self.assertEqual(len(ctx.exception.state.loss_history), 1)

    def test_callback_sees_every_iteration(self):
        seen = []
        optimize(self.bundle, quick_config(max_iters=4), callback=lambda state, result: seen.append(state.iteration))
        self.assertEqual(seen, [0, 1, 2, 3])


class AblateTests(SimpleTestCase):
    def setUp(self):
        self.sample, self.bundle = small_bundle('contra_dir')
        self.truth = GroundTruth(depth=self.sample.depths[0], labels=self.sample.labels)

    def test_duplicate_variants_identical(self):
        variant = AblationVariant('outlier', flags=MaskFlags())
        results = ablate(self.bundle, [variant, variant], quick_config(max_iters=3), self.truth)
        self.assertEqual(results[0].final_loss, results[1].final_loss)
        self.assertEqual(results[0].regions, results[1].regions)
        self.assertIn('contra_dir', results[0].regions['regions'])
        rows = comparison_rows(results)
        self.assertEqual({row['variant'] for row in rows}, {'outlier'})

    def test_standard_variants(self):
        variants = standard_variants(quick_config())
        self.assertEqual([v.name for v in variants], ['baseline', 'outlier_mask', 'weighted_multiscale', 'both'])
        self.assertEqual([v.loss.f for v in variants], [1.0, 1.0, 0.25, 0.25])
        self.assertEqual([v.flags.outlier for v in variants], [False, True, False, True])

    def test_needs_a_variant(self):
        with self.assertRaises(ConfigError):
            ablate(self.bundle, [], quick_config())
