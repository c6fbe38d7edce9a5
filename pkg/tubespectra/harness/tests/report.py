# -*- coding: utf-8 -*-
"""
Report serialization test facilities.
"""

import os
import tempfile
import unittest

from tubespectra.harness import report as hreport
from tubespectra.harness.report import (ConvergenceReport, EssentialRow,
                                        EssentialSpectrumReport, Failure,
                                        ReportError, ReportRow)
from tubespectra.spectral.numerics import RateFit
from tubespectra.utils.error import ConfigurationError


def convergence_report():
    report = ConvergenceReport('neumann')
    report.rows = [
        ReportRow(0.1, 0, 1.25, 1.2, 0.05, 127, 1., 'ok', 1.26),
        ReportRow(0.05, 0, 1.225, 1.2, 0.025, 179, 1., 'ok', 1.23),
        ReportRow(0.1, 1, 3.7, 3.6, 0.1, 127, 1., 'coarse-grid', None),
    ]
    report.rates[0] = RateFit(1., -2.99, 0.999)
    report.limits[0] = 1.2001
    report.deviations[0] = 0.0001
    report.flag('error-not-monotone')
    report.failures.append(Failure(0.025, 'effective1d', 'window'))
    report.metadata.update({'name': 'straight-disk', 'mu': [1.2, 3.6],
                            'N': None})
    return report


def essential_report():
    return EssentialSpectrumReport(
        rows=[EssentialRow(0.05, 1734.9, 23.5, 23.5, 1e-9, 12, 1.85,
                           'certified'),
              EssentialRow(0.025, -1., None, None, None, 0, None,
                           'no discrete eigenvalue certified at this eps')],
        metadata={'c': 2.5})


# -----------------------------------------------------------------------------
class ReportTestCase(unittest.TestCase):

    def test_flags(self):
        report = ConvergenceReport('dirichlet')
        self.assertTrue(report.completed)
        report.flag('grid-limited')
        report.flag('grid-limited')
        self.assertEqual(report.flags, ['grid-limited'])
        report.failures.append(Failure(0.1, 'tube3d', 'singular'))
        self.assertFalse(report.completed)

    def test_rows_for(self):
        report = convergence_report()
        self.assertEqual(len(report.rows_for(0)), 2)
        self.assertEqual(report.epsilons(), [0.1, 0.05])
        self.assertEqual(report.j_values(), [0, 1])

    def test_equality(self):
        self.assertEqual(convergence_report(), convergence_report())
        other = convergence_report()
        other.kind = 'dirichlet'
        self.assertNotEqual(convergence_report(), other)
        self.assertNotEqual(convergence_report(), essential_report())


class CsvTestCase(unittest.TestCase):

    def test_convergence(self):
        lines = hreport.to_csv(convergence_report()).splitlines()
        self.assertEqual(
            lines[0],
            'epsilon,j,scaled_eigenvalue,mu_j,abs_error,grid_n,window_L')
        self.assertEqual(lines[1], '0.1,0,1.25,1.2,0.05,127,1')
        self.assertEqual(len(lines), 4)

    def test_essential(self):
        lines = hreport.to_csv(essential_report()).splitlines()
        self.assertEqual(
            lines[0], 'epsilon,threshold,l0,l0_doubled,stability,'
            'certified_count,window_L')
        self.assertEqual(lines[2], '0.025,-1,,,,0,')

    def test_deterministic(self):
        self.assertEqual(hreport.to_csv(convergence_report()),
                         hreport.to_csv(convergence_report()))


class JsonTestCase(unittest.TestCase):

    def setUp(self):
        self.tmpdir = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.tmpdir.cleanup()

    def path(self, name):
        return os.path.join(self.tmpdir.name, name)

    def test_convergence_roundtrip(self):
        report = convergence_report()
        hreport.emit_report(report, 'json', self.path('report.json'))
        self.assertEqual(hreport.load_report(self.path('report.json')),
                         report)

    def test_essential_roundtrip(self):
        report = essential_report()
        hreport.emit_report(report, 'json', self.path('report.json'))
        loaded = hreport.load_report(self.path('report.json'))
        self.assertIsInstance(loaded, EssentialSpectrumReport)
        self.assertEqual(loaded, report)

    def test_csv_file(self):
        hreport.emit_report(convergence_report(), 'csv',
                            self.path('report.csv'))
        with open(self.path('report.csv')) as ifd:
            self.assertEqual(ifd.read(),
                             hreport.to_csv(convergence_report()))

    def test_unknown_format(self):
        with self.assertRaises(ConfigurationError):
            hreport.emit_report(convergence_report(), 'xml',
                                self.path('report.xml'))

    def test_unwritable(self):
        with self.assertRaises(ReportError) as cm:
            hreport.emit_report(convergence_report(), 'csv',
                                self.path('missing/report.csv'))
        self.assertEqual(cm.exception.path, self.path('missing/report.csv'))

    def test_load_errors(self):
        with self.assertRaises(ReportError):
            hreport.load_report(self.path('missing.json'))

        for content in ('{"kind": ', '[]', '{"kind": "dirichlet", "x": 1}',
                        '{"rows": []}'):
            with open(self.path('broken.json'), 'w') as ofd:
                ofd.write(content)
            with self.assertRaises(ReportError):
                hreport.load_report(self.path('broken.json'))


# -----------------------------------------------------------------------------
if __name__ == '__main__':
    unittest.main()
