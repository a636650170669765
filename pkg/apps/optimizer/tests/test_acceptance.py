"""
完整分辨率、数百次迭代的验收测试；运行方式: python manage.py test --tag acceptance
"""
import numpy as np
from django.test import SimpleTestCase, tag

from apps.masking.config import LossConfig, MaskFlags
from apps.masking.loss import total_loss
from apps.optimizer.ablate import AblationVariant, GroundTruth, ablate, weighting_variants
from apps.optimizer.config import OptimConfig
from apps.optimizer.objective import inverse_depth_pyramid
from apps.optimizer.optimize import optimize
from apps.scenesim.presets import preset
from apps.scenesim.render import render


def interior(shape, border=8):
    mask = np.zeros(shape, dtype=bool)
    mask[border:-border, border:-border] = True
    return mask


@tag('acceptance')
class StaticRecoveryTests(SimpleTestCase):
    def setUp(self):
        self.sample = render(preset('static'))
        self.bundle = self.sample.to_bundle(scales=4)

    def test_null_parameters(self):
        inv = inverse_depth_pyramid(self.sample.depths[0], 4)
        result = total_loss(self.bundle, inv, self.sample.gt_poses(), LossConfig(lambda_=0.0))
        self.assertLess(result.photometric, 1e-4)
        for s in range(self.bundle.num_sources):
            in_bounds = result.masks[0][s].principled
            kept = result.masks[0][s].combined & in_bounds
            self.assertGreaterEqual(kept.sum() / in_bounds.sum(), 0.95)

    def test_near_stationary_at_optimum(self):
        inv = inverse_depth_pyramid(self.sample.depths[0], 4)
        cfg = OptimConfig(max_iters=10, coarse_to_fine=False, pose_init=tuple(self.sample.gt_poses()))
        state = optimize(self.bundle, cfg, inv_depths=inv)
        self.assertLess(state.loss_history[0], 1e-4)
        relative = np.abs(state.inv_depths[0] - inv[0]) / inv[0]
        self.assertLess(relative.max(), 1e-3)
        for pose, gt in zip(state.poses, self.sample.gt_poses()):
            self.assertLess(np.linalg.norm(pose.translation - gt.translation), 1e-3 * np.linalg.norm(gt.translation))

    def test_depth_recovery_with_fixed_pose(self):
        cfg = OptimConfig(max_iters=500, optimize_pose=False, pose_init=tuple(self.sample.gt_poses()))
        state = optimize(self.bundle, cfg)
        self.assertLess(state.loss_history[-1], state.loss_history[0])
        gt = self.sample.depths[0].values
        region = interior(gt.shape) & self.sample.label_mask('background')
        error = np.abs(state.depth(0).values - gt) / gt
        self.assertLess(np.median(error[region]), 0.05)

    def test_pose_recovery_with_fixed_depth(self):
        inv = inverse_depth_pyramid(self.sample.depths[0], 4)
        cfg = OptimConfig(max_iters=500, optimize_depth=False)
        state = optimize(self.bundle, cfg, inv_depths=inv)
        for pose, gt in zip(state.poses, self.sample.gt_poses()):
            error = np.linalg.norm(pose.translation - gt.translation)
            self.assertLess(error, 0.05 * np.linalg.norm(gt.translation))


@tag('acceptance')
class ContraDirectionalAblationTests(SimpleTestCase):
    def test_outlier_mask_helps_contra_region(self):
        cfg = OptimConfig(max_iters=300)
        variants = [
            AblationVariant('with_outlier', flags=MaskFlags(outlier=True)),
            AblationVariant('without_outlier', flags=MaskFlags(outlier=False)),
        ]
        for seed in range(3):
            sample = render(preset('contra_dir', seed=seed))
            truth = GroundTruth(depth=sample.depths[0], labels=sample.labels)
            results = ablate(sample.to_bundle(), variants, cfg, truth)
            masked, unmasked = (r.regions['regions']['contra_dir']['abs_rel'] for r in results)
            self.assertLess(masked, unmasked)


@tag('acceptance')
class StaticWeightingAblationTests(SimpleTestCase):
    def test_weighted_multiscale_does_not_hurt_background(self):
        sample = render(preset('static'))
        cfg = OptimConfig(max_iters=300)
        truth = GroundTruth(depth=sample.depths[0], labels=sample.labels)
        weighted, uniform = ablate(sample.to_bundle(), weighting_variants(cfg), cfg, truth)
        self.assertEqual((weighted.name, uniform.name), ('weighted', 'uniform'))
        weighted_rmse = weighted.regions['regions']['background']['rmse']
        uniform_rmse = uniform.regions['regions']['background']['rmse']
        self.assertLessEqual(weighted_rmse, 1.05 * uniform_rmse)
