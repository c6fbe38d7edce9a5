# -*- coding: utf-8 -*-
"""
Tube geometry test facilities.
"""

import math
import unittest

import numpy as np

from tubespectra.spectral import geometry
from tubespectra.spectral.numerics import ArgumentError
from tubespectra.spectral.geometry import (CatalogError, Interval,
                                           ScalarFunction, TubeGeometry)


def helix(a, b):
    c = math.sqrt(a ** 2 + b ** 2)

    def curve(s):
        return (a * math.cos(s / c), a * math.sin(s / c), b * s / c)

    return curve


# -----------------------------------------------------------------------------
class ScalarFunctionTestCase(unittest.TestCase):

    def test_parabola_cap(self):
        h = ScalarFunction.from_spec('parabola_cap{2}')
        self.assertEqual(h(0.5), 1.75)
        self.assertEqual(h.derivative(0.5), -1.)
        self.assertEqual(h.limsup, -math.inf)
        self.assertTrue(h.analytic_derivative)

    def test_rational_cap(self):
        h = ScalarFunction.from_spec('rational_cap{2}')
        self.assertEqual(h(1.), 1.5)
        self.assertEqual(h.derivative(1.), -0.5)
        self.assertEqual(h.limsup, 1.)

    def test_gauss_bump(self):
        k = ScalarFunction.from_spec('gauss_bump{0.3}')
        self.assertAlmostEqual(k(0.), 0.3)
        self.assertAlmostEqual(k(1.), 0.3 * math.exp(-1.))
        self.assertFalse(k.vanishes)

    def test_poly(self):
        p = ScalarFunction.from_spec('poly{1,2,3}')
        self.assertEqual(p(2.), 17.)
        self.assertEqual(p.derivative(2.), 14.)
        self.assertEqual(ScalarFunction.from_spec('poly{1,0,-1}').limsup,
                         -math.inf)
        self.assertTrue(ScalarFunction.from_spec('poly{0,0}').vanishes)

    def test_const(self):
        c = ScalarFunction.from_spec(3)
        np.testing.assert_array_equal(c(np.array([-1., 0., 5.])), [3.] * 3)
        self.assertTrue(ScalarFunction.from_spec('const{0}').vanishes)

    def test_vectorized(self):
        h = ScalarFunction.from_spec('rational_cap{2}')
        s = np.linspace(-1., 1., 5)
        np.testing.assert_allclose(h(s), 2. - s ** 2 / (1. + s ** 2))

    def test_expression(self):
        h = ScalarFunction.from_spec('2 - s^2')
        self.assertFalse(h.analytic_derivative)
        self.assertEqual(h(1.), 1.)
        self.assertAlmostEqual(h.derivative(1.), -2., places=6)
        self.assertEqual(h.label, '2 - s^2')

    def test_catalog_errors(self):
        for spec in ('parabola_cap{1,2}', 'unknown{1}', 'poly{}',
                     'parabola_cap{x}', 'const{}'):
            with self.assertRaises(CatalogError):
                ScalarFunction.from_spec(spec)


class IntervalTestCase(unittest.TestCase):

    def test_bounded(self):
        interval = Interval(-1., 2.)
        self.assertTrue(interval.bounded)
        self.assertEqual(interval.length, 3.)
        self.assertEqual(interval.halfwidth, 2.)

    def test_whole_line(self):
        self.assertFalse(Interval.whole_line().bounded)


class TubeGeometryTestCase(unittest.TestCase):

    def test_interval_must_contain_zero(self):
        with self.assertRaises(ArgumentError):
            TubeGeometry((0., 1.), 'parabola_cap{2}')

    def test_maximum_and_limsup(self):
        g = TubeGeometry(Interval.whole_line(), 'rational_cap{2}')
        self.assertEqual(g.M, 2.)
        self.assertEqual(g.N, 1.)
        self.assertFalse(g.bounded)
        self.assertIsNone(TubeGeometry((-1., 1.), 'parabola_cap{2}').N)

    def test_twist(self):
        g = TubeGeometry((-1., 1.), 'parabola_cap{2}', tau='const{0.5}',
                         alpha='poly{0,0.2}')
        self.assertAlmostEqual(g.twist(0.3), 0.7)

    def test_straight(self):
        self.assertTrue(TubeGeometry((-1., 1.), 'parabola_cap{2}').straight())
        self.assertTrue(
            TubeGeometry((-1., 1.), 'parabola_cap{2}', k='0*s').straight())
        self.assertFalse(
            TubeGeometry((-1., 1.), 'parabola_cap{2}',
                         k='poly{0.3}').straight())

    def test_kh_sup(self):
        g = TubeGeometry((-1., 1.), 'parabola_cap{2}', k='const{0.5}')
        self.assertAlmostEqual(g.kh_sup(), 1.)


# -----------------------------------------------------------------------------
class ValidateDeformationTestCase(unittest.TestCase):

    def test_parabola_cap(self):
        report = geometry.validate_deformation('parabola_cap{2}', (-1., 1.))
        self.assertTrue(report.valid, report.failed)
        self.assertEqual(report.M, 2.)
        self.assertEqual(report.min_h, 1.)
        self.assertAlmostEqual(report.quadratic_coefficient, 1., places=6)
        self.assertIsNone(report.N)

    def test_quartic_contact(self):
        report = geometry.validate_deformation('2 - s^4', (-1., 1.))
        self.assertFalse(report.valid)
        self.assertEqual(report.failed, ('quadratic_contact', ))
        self.assertAlmostEqual(report.contact.order_plus, 4., delta=0.05)
        self.assertAlmostEqual(report.contact.order_minus, 4., delta=0.05)
        self.assertIn('quadratic_contact', report.summary())

    def test_rational_cap_whole_line(self):
        report = geometry.validate_deformation('rational_cap{2}',
                                               Interval.whole_line())
        self.assertTrue(report.valid, report.failed)
        self.assertEqual(report.N, 1.)

    def test_parabola_cap_whole_line(self):
        report = geometry.validate_deformation('parabola_cap{2}',
                                               Interval.whole_line())
        self.assertIn('positivity', report.failed)

    def test_constant(self):
        report = geometry.validate_deformation('const{1}', (-1., 1.))
        self.assertIn('maximum', report.failed)
        self.assertIsNone(report.contact.order_plus)

    def test_asymmetric_contact(self):
        contact = geometry.contact_profile(
            ScalarFunction.from_spec('2 - 2*s^2 - s*abs(s)'))
        self.assertAlmostEqual(contact.order_plus, 2., places=4)
        self.assertAlmostEqual(contact.order_minus, 2., places=4)
        self.assertAlmostEqual(contact.coeff_plus, 3., places=4)
        self.assertAlmostEqual(contact.coeff_minus, 1., places=4)


# -----------------------------------------------------------------------------
class JacobianTestCase(unittest.TestCase):

    def setUp(self):
        self.g = TubeGeometry((-1., 1.), 'parabola_cap{2}', k='poly{0.3,0.1}',
                              tau='const{0.4}', alpha='poly{0,0.2}')

    def test_beta(self):
        g = TubeGeometry((-1., 1.), 'const{2}', k='const{0.5}')
        self.assertAlmostEqual(geometry.beta(g, 0., (1., 0.), 0.1), 0.9)
        self.assertAlmostEqual(geometry.beta(g, 0., (0., 1.), 0.1), 1.)

    def test_epsilon_max(self):
        g = TubeGeometry((-1., 1.), 'parabola_cap{2}', k='const{0.5}')
        self.assertAlmostEqual(geometry.epsilon_max(g, 0.1, 1.), 0.9)
        straight = TubeGeometry((-1., 1.), 'parabola_cap{2}')
        self.assertEqual(geometry.epsilon_max(straight, 0.1, 1.), math.inf)
        with self.assertRaises(ArgumentError):
            geometry.epsilon_max(g, 1., 1.)

    def test_determinant(self):
        s, y, eps = 0.3, (0.2, -0.1), 0.1
        J = geometry.jacobian(self.g, s, y, eps)
        b = geometry.beta(self.g, s, y, eps)
        self.assertAlmostEqual(np.linalg.det(J),
                               eps ** 2 * self.g.h(s) ** 2 * b, places=12)

    def test_inverse(self):
        s, y, eps = -0.4, (0.5, 0.3), 0.2
        J = geometry.jacobian(self.g, s, y, eps)
        Jinv = geometry.jacobian_inverse(self.g, s, y, eps)
        np.testing.assert_allclose(J @ Jinv, np.eye(3), atol=1e-12)

    def test_singular(self):
        g = TubeGeometry((-1., 1.), 'const{1}', k='const{3}')
        with self.assertRaises(geometry.SingularJacobian) as cm:
            geometry.jacobian(g, 0., (1., 0.), 0.5)
        self.assertEqual(cm.exception.exit_code, 3)


# -----------------------------------------------------------------------------
class FrenetTestCase(unittest.TestCase):

    def test_helix(self):
        frames = geometry.frenet_from_parametric(
            helix(1., 1.), np.linspace(-1., 1., 2001))
        g = TubeGeometry((-1., 1.), 'const{1}', k='const{0.5}',
                         tau='const{0.5}')
        # one-sided differences degrade the end frames
        dk, dtau = geometry.compare_frames(frames[10:-10], g)
        self.assertLess(dk, 1e-3)
        self.assertLess(dtau, 1e-3)
        self.assertEqual(geometry.torsion_gaps(frames), [])

        f = frames[1000]
        np.testing.assert_allclose(np.cross(f.T, f.N), f.B, atol=1e-12)
        self.assertAlmostEqual(float(f.T @ f.N), 0., places=6)

    def test_straight_line(self):
        s = np.linspace(0., 1., 11)
        frames = geometry.frenet_from_parametric(lambda t: (t, 0., 0.), s)
        self.assertEqual(len(geometry.torsion_gaps(frames)), 11)
        g = TubeGeometry((-1., 1.), 'const{1}')
        dk, dtau = geometry.compare_frames(frames, g)
        self.assertEqual(dk, 0.)
        self.assertIsNone(dtau)

    def test_invalid_samples(self):
        with self.assertRaises(ArgumentError):
            geometry.frenet_from_curve(
                [(s, (s, 0., 0.)) for s in (0., 0.1, 0.2, 0.3)])
        with self.assertRaises(ArgumentError):
            geometry.frenet_from_curve(
                [(s, (s, 0., 0.)) for s in (0., 0.1, 0.2, 0.4, 0.5)])


# -----------------------------------------------------------------------------
if __name__ == '__main__':
    unittest.main()
