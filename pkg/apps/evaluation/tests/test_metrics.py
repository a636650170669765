import math

import numpy as np
from django.test import SimpleTestCase

from apps.evaluation.benchmark import benchmark_metrics, disparity_to_depth
from apps.evaluation.config import DepthEvalConfig
from apps.evaluation.metrics import depth_metrics
from apps.geometry.camera import DepthMap
from apps.system.exceptions import BadShapeError, ConfigError, DegenerateDepthError, EmptyRegionError

NO_SCALING = DepthEvalConfig(median_scaling=False)


def depth(values):
    return DepthMap.from_values(np.asarray(values, dtype=np.float64), d_min=0.0, d_max=np.inf)


def brute_force(pred, gt, cap, min_depth, scale):
    """逐像素循环的独立实现"""
    pairs = []
    for p, g in zip(pred.reshape(-1), gt.reshape(-1)):
        if min_depth <= g <= cap:
            pairs.append((min(max(scale * p, min_depth), cap), g))
    n = len(pairs)
    abs_rel = sum(abs(p - g) / g for p, g in pairs) / n
    sq_rel = sum((p - g) ** 2 / g for p, g in pairs) / n
    rmse = math.sqrt(sum((p - g) ** 2 for p, g in pairs) / n)
    rmse_log = math.sqrt(sum((math.log(p) - math.log(g)) ** 2 for p, g in pairs) / n)
    deltas = [sum(1 for p, g in pairs if max(p / g, g / p) < 1.25 ** k) / n for k in (1, 2, 3)]
    return [abs_rel, sq_rel, rmse, rmse_log] + deltas


def as_list(report):
    return [report.abs_rel, report.sq_rel, report.rmse, report.rmse_log, report.delta1, report.delta2, report.delta3]


class DepthEvalConfigTests(SimpleTestCase):
    def test_invalid(self):
        with self.assertRaises(ConfigError):
            DepthEvalConfig(min_depth=0.0)
        with self.assertRaises(ConfigError):
            DepthEvalConfig(min_depth=90.0)
        with self.assertRaises(ConfigError):
            DepthEvalConfig(scaling_region='objects')
        with self.assertRaises(ConfigError):
            DepthEvalConfig(crop=(0.5, 0.4, 0.0, 1.0))
        with self.assertRaises(ConfigError):
            DepthEvalConfig(fixed_scale=-1.0)

    def test_crop_mask(self):
        mask = DepthEvalConfig(crop=(0.5, 1.0, 0.25, 0.75)).crop_mask((4, 8))
        expected = np.zeros((4, 8), dtype=bool)
        expected[2:4, 2:6] = True
        np.testing.assert_array_equal(mask, expected)


class DepthMetricsTests(SimpleTestCase):
    def setUp(self):
        self.rng = np.random.default_rng(0)
        self.gt = self.rng.uniform(1.0, 50.0, (8, 8))

    def test_perfect_prediction(self):
        report = depth_metrics(depth(self.gt), depth(self.gt), cfg=NO_SCALING)
        self.assertEqual(as_list(report), [0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0])
        self.assertEqual(report.pixel_count, 64)

    def test_median_scaling_cancels_global_factor(self):
        report = depth_metrics(depth(0.5 * self.gt), depth(self.gt))
        self.assertEqual(report.scale, 2.0)
        self.assertEqual(as_list(report), [0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0])

    def test_twenty_percent_overestimate(self):
        report = depth_metrics(depth(1.2 * self.gt), depth(self.gt), cfg=NO_SCALING)
        self.assertAlmostEqual(report.abs_rel, 0.2, places=12)
        self.assertEqual(report.delta1, 1.0)
        self.assertAlmostEqual(report.rmse_log, math.log(1.2), places=12)

    def test_delta_is_strict(self):
        gt = np.full((2, 2), 4.0)
        report = depth_metrics(depth(1.25 * gt), depth(gt), cfg=NO_SCALING)
        self.assertEqual(report.delta1, 0.0)
        self.assertEqual(report.delta2, 1.0)

    def test_gt_outside_cap_excluded(self):
        gt = self.gt.copy()
        gt[0, 0] = 100.0
        gt[0, 1] = 0.0
        report = depth_metrics(depth(gt), depth(gt), cfg=NO_SCALING)
        self.assertEqual(report.pixel_count, 62)

    def test_prediction_clamped_after_scaling(self):
        pred = self.gt.copy()
        pred[0, 0] = 1e6
        clamped = pred.copy()
        clamped[0, 0] = 80.0
        a = depth_metrics(depth(pred), depth(self.gt), cfg=NO_SCALING)
        b = depth_metrics(depth(clamped), depth(self.gt), cfg=NO_SCALING)
        self.assertEqual(a, b)

    def test_brute_force_oracle(self):
        for _ in range(50):
            gt = self.rng.uniform(0.5, 100.0, (8, 8))
            pred = gt * self.rng.uniform(0.5, 1.5, (8, 8))
            for cfg in (NO_SCALING, DepthEvalConfig()):
                report = depth_metrics(depth(pred), depth(gt), cfg=cfg)
                expected = brute_force(pred, gt, cfg.cap, cfg.min_depth, report.scale)
                np.testing.assert_allclose(as_list(report), expected, rtol=1e-12, atol=1e-12)

    def test_median_scaling_invariance(self):
        pred = self.gt * self.rng.uniform(0.7, 1.3, (8, 8))
        base = depth_metrics(depth(pred), depth(self.gt))
        for s in (0.1, 3.0, 42.0):
            scaled = depth_metrics(depth(s * pred), depth(self.gt))
            np.testing.assert_allclose(as_list(scaled), as_list(base), rtol=1e-12, atol=1e-12)

    def test_properties(self):
        pred = self.gt * self.rng.uniform(0.3, 1.5, (8, 8))
        forward = depth_metrics(depth(pred), depth(self.gt), cfg=NO_SCALING)
        backward = depth_metrics(depth(self.gt), depth(pred), cfg=NO_SCALING)
        self.assertLessEqual(forward.delta1, forward.delta2)
        self.assertLessEqual(forward.delta2, forward.delta3)
        self.assertEqual(forward.rmse_log, backward.rmse_log)
        self.assertNotEqual(forward.abs_rel, backward.abs_rel)

    def test_fixed_scale_overrides_median(self):
        report = depth_metrics(depth(0.5 * self.gt), depth(self.gt), cfg=DepthEvalConfig(fixed_scale=3.0))
        self.assertEqual(report.scale, 3.0)
        self.assertAlmostEqual(report.abs_rel, 0.5, places=12)

    def test_background_scaling(self):
        labels = np.zeros((8, 8), dtype=bool)
        labels[:, :4] = True
        pred = self.gt.copy()
        pred[:, 4:] *= 2.0
        cfg = DepthEvalConfig(scaling_region='background_only')
        report = depth_metrics(depth(pred), depth(self.gt), mask=labels, cfg=cfg, background=labels)
        self.assertEqual(report.scale, 1.0)
        with self.assertRaises(ConfigError):
            depth_metrics(depth(pred), depth(self.gt), cfg=cfg)

    def test_errors(self):
        with self.assertRaises(EmptyRegionError):
            depth_metrics(depth(self.gt), depth(self.gt), mask=np.zeros((8, 8), dtype=bool))
        with self.assertRaises(BadShapeError):
            depth_metrics(depth(self.gt), depth(self.gt[:4]))

    def test_zero_median_prediction_is_degenerate(self):
        pred = self.gt.copy()
        pred[:6] = 0.0
        with self.assertRaises(DegenerateDepthError) as ctx:
            depth_metrics(depth(pred), depth(self.gt))
        self.assertEqual(ctx.exception.exit_code, 3)
        report = depth_metrics(depth(pred), depth(self.gt), cfg=DepthEvalConfig(fixed_scale=1.0))
        self.assertTrue(math.isfinite(report.abs_rel))

    def test_invalid_prediction_pixels_excluded(self):
        pred = DepthMap(values=self.gt.copy(), valid=np.ones((8, 8), dtype=bool))
        pred.values[0, :2] = np.nan
        pred.valid[0, :2] = False
        report = depth_metrics(pred, depth(self.gt))
        self.assertEqual(report.pixel_count, 62)
        self.assertEqual(as_list(report), [0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0])
        keep = np.ones((8, 8), dtype=bool)
        keep[0, :2] = False
        self.assertEqual(report, depth_metrics(depth(self.gt), depth(self.gt), mask=keep))


class BenchmarkMetricsTests(SimpleTestCase):
    def test_perfect(self):
        gt = np.random.default_rng(1).uniform(2.0, 60.0, (6, 6))
        report = benchmark_metrics(depth(gt), depth(gt), cfg=NO_SCALING)
        self.assertEqual(report.silog, 0.0)
        self.assertEqual(report.abs_error_rel, 0.0)
        self.assertEqual(report.irmse, 0.0)

    def test_global_factor(self):
        gt = np.full((4, 4), 4.0)
        gt[0] = 8.0
        report = benchmark_metrics(depth(2 * gt), depth(gt), cfg=NO_SCALING)
        self.assertLess(report.silog, 1e-5)
        self.assertAlmostEqual(report.abs_error_rel, 100.0, places=12)
        self.assertAlmostEqual(report.sq_error_rel, 100.0, places=12)
        expected = math.sqrt((4 * 62.5 ** 2 + 12 * 125.0 ** 2) / 16)
        self.assertAlmostEqual(report.irmse, expected, places=9)

    def test_disparity_to_depth(self):
        disparity = np.array([[10.0, 0.0], [20.0, -1.0]])
        result = disparity_to_depth(disparity, baseline=0.5, fx=100.0)
        np.testing.assert_array_equal(result.valid, [[True, False], [True, False]])
        self.assertEqual(result.values[0, 0], 5.0)
        self.assertEqual(result.values[1, 0], 2.5)
        with self.assertRaises(ConfigError):
            disparity_to_depth(disparity, baseline=0.0, fx=100.0)
