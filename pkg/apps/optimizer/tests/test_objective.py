import numpy as np
from django.test import SimpleTestCase

from apps.geometry.camera import DepthMap
from apps.masking.config import LossConfig
from apps.masking.loss import total_loss
from apps.optimizer.gradcheck import central_difference, pose_gradient_check, relative_error
from apps.optimizer.objective import frozen_mask_loss, inverse_depth_pyramid, objective_gradient
from apps.optimizer.config import OptimConfig
from apps.optimizer.state import OptimState
from apps.scenesim.presets import preset
from apps.scenesim.render import render


def small_sample(name='static', seed=0):
    return render(preset(name, seed=seed, width=64, height=48))


def near_truth(sample, scales, rng, depth_noise=0.05, pose_noise=0.01):
    """真值附近的随机状态：逆深度与位姿都加噪声，避免 |·| 的零点"""
    inv = inverse_depth_pyramid(sample.depths[0], scales)
    inv = [x * np.exp(depth_noise * rng.standard_normal(x.shape)) for x in inv]
    poses = [pose.perturbed(pose_noise * rng.standard_normal(6)) for pose in sample.gt_poses()]
    return inv, poses


class CentralDifferenceTests(SimpleTestCase):
    def test_quadratic(self):
        a = np.array([[2.0, 0.5], [0.5, 1.0]])
        x0 = np.array([0.3, -1.2])
        grad = central_difference(lambda x: 0.5 * x @ a @ x, x0, eps=1e-4)
        np.testing.assert_allclose(grad, a @ x0, rtol=1e-9)

    def test_indices_and_input_untouched(self):
        x0 = np.arange(6, dtype=np.float64).reshape(2, 3)
        before = x0.copy()
        grad = central_difference(lambda x: float(np.sum(x ** 2)), x0, eps=1e-3, indices=[1, 5])
        np.testing.assert_allclose(grad, [2.0, 10.0], rtol=1e-9)
        np.testing.assert_array_equal(x0, before)

    def test_relative_error(self):
        self.assertEqual(relative_error([1.0, 2.0], [1.0, 2.0]), 0.0)
        self.assertAlmostEqual(relative_error([1.0, 2.0], [1.0, 2.2]), 0.2 / 2.2, places=12)


class InverseDepthPyramidTests(SimpleTestCase):
    def test_constant(self):
        depth = DepthMap.from_values(np.full((8, 12), 2.0))
        pyramid = inverse_depth_pyramid(depth, 3)
        self.assertEqual([p.shape for p in pyramid], [(8, 12), (4, 6), (2, 3)])
        for level in pyramid:
            np.testing.assert_allclose(level, 0.5)


class ObjectiveGradientTests(SimpleTestCase):
    def setUp(self):
        self.sample = small_sample()
        self.bundle = self.sample.to_bundle(scales=3)
        self.cfg = LossConfig(scales=3, lambda_=0.01)

    def _frozen(self, inv, poses, cfg):
        result = total_loss(self.bundle, inv, poses, cfg, with_jacobians=True)
        masks = [[m.combined for m in row] for row in result.masks]
        return result, masks

    def test_frozen_loss_matches_total_loss(self):
        rng = np.random.default_rng(1)
        inv, poses = near_truth(self.sample, 3, rng)
        result, masks = self._frozen(inv, poses, self.cfg)
        self.assertAlmostEqual(frozen_mask_loss(self.bundle, inv, poses, masks, self.cfg), result.loss, places=12)

    def test_pose_gradient_matches_central_difference(self):
        for seed in range(3):
            rng = np.random.default_rng(seed)
            inv, poses = near_truth(self.sample, 3, rng)
            result, masks = self._frozen(inv, poses, self.cfg)
            _, analytic = objective_gradient(result, self.bundle, inv, self.cfg).total()
            for s, pose in enumerate(poses):
                def loss_at(delta, s=s, pose=pose):
                    moved = list(poses)
                    moved[s] = pose.perturbed(delta)
                    return frozen_mask_loss(self.bundle, inv, moved, masks, self.cfg)

                numeric = central_difference(loss_at, np.zeros(6), eps=1e-7)
                self.assertLess(relative_error(analytic[s], numeric), 1e-3)

    def _check_depth_gradient(self, cfg, scale, seed, count=25):
        rng = np.random.default_rng(seed)
        inv, poses = near_truth(self.sample, 3, rng)
        result, masks = self._frozen(inv, poses, cfg)
        d_rho, _ = objective_gradient(result, self.bundle, inv, cfg).total()
        rho = np.log(inv[scale])
        indices = rng.choice(rho.size, size=count, replace=False)

        def loss_at(x):
            moved = list(inv)
            moved[scale] = np.exp(x)
            return frozen_mask_loss(self.bundle, moved, poses, masks, cfg)

        numeric = central_difference(loss_at, rho, eps=1e-6, indices=indices)
        analytic = d_rho[scale].reshape(-1)[indices]
        self.assertLess(relative_error(analytic, numeric), 1e-3)

    def test_depth_gradient_native(self):
        for scale in range(3):
            self._check_depth_gradient(self.cfg, scale, seed=10 + scale)

    def test_depth_gradient_full_resolution(self):
        cfg = LossConfig(scales=3, lambda_=0.01, multiscale_mode='full_resolution')
        self._check_depth_gradient(cfg, 1, seed=20)

    def test_stage_gradient_removes_scale_weight(self):
        rng = np.random.default_rng(4)
        inv, poses = near_truth(self.sample, 3, rng)
        result, _ = self._frozen(inv, poses, self.cfg)
        gradient = objective_gradient(result, self.bundle, inv, self.cfg)
        d_rho, d_pose = gradient.stage(2)
        np.testing.assert_allclose(
            d_rho, gradient.photometric_rho[2] / 0.25 ** 2 + gradient.smoothness_rho[2] / 0.5 ** 2,
        )
        np.testing.assert_allclose(d_pose, gradient.photometric_pose[2] / 0.25 ** 2)

    def test_pose_gradient_check_report(self):
        rng = np.random.default_rng(5)
        inv, poses = near_truth(self.sample, 3, rng)
        cfg = OptimConfig(loss=self.cfg)
        state = OptimState(log_inv_depths=tuple(np.log(x) for x in inv), poses=tuple(poses))
        result = total_loss(self.bundle, state.inv_depths, state.poses, self.cfg, with_jacobians=True)
        rows = pose_gradient_check(self.bundle, state, result, cfg, eps=1e-7)
        self.assertEqual([row['source'] for row in rows], [-1, 1])
        for row in rows:
            self.assertLess(row['relative_error'], 1e-3)


class SeededScenesGradientTests(SimpleTestCase):
    """五个不同预置与种子的场景，每个场景 20 个对数逆深度像素加全部位姿分量"""

    SCENES = [('static', 0), ('contra_dir', 1), ('occlusion', 2), ('co_dir', 3), ('mixed', 4)]

    def test_total_loss_gradient_on_each_scene(self):
        cfg = LossConfig(scales=3, lambda_=0.01)
        checked = 0
        for name, seed in self.SCENES:
            sample = small_sample(name, seed)
            bundle = sample.to_bundle(scales=3)
            rng = np.random.default_rng(100 + seed)
            inv, poses = near_truth(sample, 3, rng)
            result = total_loss(bundle, inv, poses, cfg, with_jacobians=True)
            masks = [[m.combined for m in row] for row in result.masks]
            d_rho, d_pose = objective_gradient(result, bundle, inv, cfg).total()

            indices = rng.choice(inv[0].size, size=20, replace=False)

            def depth_loss(x):
                moved = list(inv)
                moved[0] = np.exp(x)
                return frozen_mask_loss(bundle, moved, poses, masks, cfg)

            numeric = central_difference(depth_loss, np.log(inv[0]), eps=1e-6, indices=indices)
            self.assertLess(relative_error(d_rho[0].reshape(-1)[indices], numeric), 1e-3, name)

            for s, pose in enumerate(poses):
                def pose_loss(delta, s=s, pose=pose):
                    moved = list(poses)
                    moved[s] = pose.perturbed(delta)
                    return frozen_mask_loss(bundle, inv, moved, masks, cfg)

                numeric = central_difference(pose_loss, np.zeros(6), eps=1e-7)
                self.assertLess(relative_error(d_pose[s], numeric), 1e-3, (name, s))
            checked += indices.size
        self.assertGreaterEqual(checked, 100)
