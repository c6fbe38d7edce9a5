# -*- coding: utf-8 -*-
"""
End-to-end study test facilities.
"""

import math
import unittest

from tubespectra.harness import study
from tubespectra.harness.schema import load_config
from tubespectra.harness.study import InadmissibleEpsilon, OutOfHypothesis


EPSILONS = [0.1, 0.05, 0.025, 0.0125]
SMALL_EPSILONS = [0.05, 0.025, 0.0125, 0.00625]


def config(geometry=None, section=None, **kwargs):
    data = {
        'name': 'study-test',
        'geometry': geometry or {'h': 'parabola_cap{2}',
                                 'k': 'poly{0.3,0,-0.3}',
                                 'tau': 'const{0.5}',
                                 'interval': [-1, 1]},
        'section': section or {'shape': 'disk', 'radius': 1., 'n': 48},
        'epsilons': EPSILONS,
        'j_max': 2,
    }
    data.update(kwargs)
    return load_config(data)


# -----------------------------------------------------------------------------
class DirichletSweepTestCase(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.report = study.dirichlet_sweep(config())

    def test_rows(self):
        self.assertTrue(self.report.completed)
        self.assertEqual(self.report.kind, 'dirichlet')
        self.assertEqual(len(self.report.rows), 12)
        self.assertEqual(self.report.epsilons(), EPSILONS)
        for row in self.report.rows:
            self.assertEqual(row.status, 'ok')
            self.assertIsNone(row.dirichlet_value)

    def test_limits(self):
        mu = self.report.metadata['mu']
        for j in range(3):
            self.assertLess(self.report.deviations[j], 0.02)
            self.assertAlmostEqual(self.report.limits[j] / mu[j], 1.,
                                   delta=0.02)
        self.assertAlmostEqual(mu[1] / mu[0], 3.)

    def test_rates(self):
        self.assertEqual(sorted(self.report.rates), [0, 1, 2])

    def test_metadata(self):
        meta = self.report.metadata
        self.assertEqual(meta['name'], 'study-test')
        self.assertEqual(meta['M'], 2.)
        self.assertGreater(meta['spectral_gap'], 0.)
        self.assertAlmostEqual(meta['kappa'],
                               2. * meta['section']['lambda0'] / 8.)
        self.assertGreater(meta['lower_bound_witness'], 0.)


class NeumannVariantTestCase(unittest.TestCase):

    def test_below_dirichlet(self):
        report = study.neumann_variant(config(j_max=1))
        self.assertEqual(report.kind, 'neumann')
        self.assertNotIn('neumann-above-dirichlet', report.flags)
        self.assertEqual(report.metadata['neumann_violations'], 0)
        for row in report.rows:
            self.assertLessEqual(row.scaled_eigenvalue,
                                 row.dirichlet_value + 1e-9)

    def test_limits(self):
        report = study.neumann_variant(config(epsilons=SMALL_EPSILONS))
        self.assertTrue(report.completed)
        for j in range(3):
            self.assertLess(report.deviations[j], 0.02)

    def test_out_of_hypothesis_flagged(self):
        report = study.neumann_variant(config(
            geometry={'h': '2 - s^4', 'interval': [-1, 1]}, j_max=0))
        self.assertIn('out-of-hypothesis', report.flags)
        for row in report.rows:
            self.assertEqual(row.status, 'out-of-hypothesis')


class GeometryIndependenceTestCase(unittest.TestCase):

    def test_limits_agree(self):
        straight = study.dirichlet_sweep(config(
            geometry={'h': 'parabola_cap{2}', 'interval': [-1, 1]},
            epsilons=SMALL_EPSILONS))
        curved = study.dirichlet_sweep(config(epsilons=SMALL_EPSILONS))
        deviations = study.compare_limits(straight, curved)
        self.assertEqual(sorted(deviations), [0, 1, 2])
        for j, deviation in deviations.items():
            self.assertLess(deviation, 0.02)


class UnboundedSweepTestCase(unittest.TestCase):

    def test_whole_line(self):
        cfg = config(geometry={'h': 'rational_cap{2}', 'unbounded': True,
                               'k': 'gauss_bump{0.3}'},
                     epsilons=SMALL_EPSILONS)
        report = study.dirichlet_sweep(cfg)
        self.assertTrue(report.completed)
        for j in range(3):
            self.assertLess(report.deviations[j], 0.02)
        self.assertEqual(report.metadata['N'], 1.)
        tails = report.metadata['curvature_at_window']
        self.assertEqual(len(tails), 4)
        for eps, L, k_end in tails:
            self.assertLess(k_end, 0.3)
        windows = [r.window_L for r in report.rows_for(0)]
        self.assertEqual(windows, sorted(windows, reverse=True))


class HypothesisTestCase(unittest.TestCase):

    def test_constant_deformation(self):
        with self.assertRaises(OutOfHypothesis) as cm:
            study.dirichlet_sweep(config(
                geometry={'h': 'const{1}', 'interval': [-1, 1]}))
        self.assertIn('maximum', str(cm.exception))

    def test_epsilon_too_large(self):
        cfg = config(geometry={'h': 'parabola_cap{2}', 'k': 'const{5}',
                               'interval': [-1, 1]},
                     section={'shape': 'disk', 'n': 16},
                     epsilons=[0.2, 0.1, 0.05, 0.025])
        with self.assertRaises(InadmissibleEpsilon) as cm:
            study.dirichlet_sweep(cfg)
        self.assertEqual(cm.exception.exit_code, 2)


class EssentialSpectrumTestCase(unittest.TestCase):

    def test_certified(self):
        cfg = config(geometry={'h': 'rational_cap{2}', 'unbounded': True},
                     epsilons=[0.05, 0.025, 0.0125, 0.00625], j_max=0)
        report = study.essential_spectrum_check(cfg)
        self.assertTrue(report.completed)
        self.assertEqual(len(report.rows), 4)
        lambda0 = report.metadata['section']['lambda0']
        for row in report.rows:
            self.assertEqual(row.status, 'certified')
            self.assertLess(row.stability, 1e-6)
            self.assertGreaterEqual(row.certified_count, 1)
            self.assertAlmostEqual(
                row.threshold, lambda0 / row.epsilon ** 2 * 0.75)
            self.assertLess(row.l0, row.threshold)
        self.assertNotIn('curvature-not-decaying', report.flags)

    def test_expression_deformation(self):
        cfg = config(geometry={'h': '1 + exp(-s^2)', 'unbounded': True},
                     epsilons=[0.05, 0.025, 0.0125, 0.00625], j_max=0)
        report = study.essential_spectrum_check(cfg)
        self.assertTrue(report.completed)
        self.assertEqual(report.metadata['N'], 1.)

    def test_bounded(self):
        with self.assertRaises(OutOfHypothesis):
            study.essential_spectrum_check(config())


class CompareLimitsTestCase(unittest.TestCase):

    def test_compare(self):
        a = study.ConvergenceReport('dirichlet', limits={0: 1., 1: 3.})
        b = study.ConvergenceReport('neumann', limits={0: 1.1, 2: 5.})
        deviations = study.compare_limits(a, b)
        self.assertEqual(list(deviations), [0])
        self.assertTrue(math.isclose(deviations[0], 0.1))


# -----------------------------------------------------------------------------
if __name__ == '__main__':
    unittest.main()
