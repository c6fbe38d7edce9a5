# -*- coding: utf-8 -*-
"""
Command line application test facilities.
"""

import argparse
import contextlib
import io
import json
import math
import os
import tempfile
import unittest

from tubespectra.cli.app import OVERRIDES, merge_overrides, run
from tubespectra.harness import report as hreport
from tubespectra.harness.report import ConvergenceReport, ReportRow
from tubespectra.utils.error import ConfigurationError, ExitCodes


def namespace(**kwargs):
    values = {dest: None for dest, _ in OVERRIDES}
    values.update(kwargs)
    return argparse.Namespace(**values)


def invoke(argv):
    out = io.StringIO()
    with contextlib.redirect_stderr(io.StringIO()):
        exit_code = run(argv, stdout=out)
    return exit_code, out.getvalue().splitlines()


def value_of(lines, key):
    for line in lines:
        if line.startswith(key + ': '):
            return line[len(key) + 2:]
    raise KeyError(key)


# -----------------------------------------------------------------------------
class MergeOverridesTestCase(unittest.TestCase):

    def test_flags_win(self):
        data = {'geometry': {'h': 'parabola_cap{2}', 'interval': [-1, 1]},
                'epsilons': [0.1]}
        args = namespace(h='rational_cap{2}', epsilons=[0.2, 0.1],
                         grid_n=101)
        reference_result = {
            'geometry': {'h': 'rational_cap{2}', 'interval': [-1, 1]},
            'epsilons': [0.2, 0.1],
            'grid': {'n': 101}}
        self.assertEqual(merge_overrides(data, args), reference_result)

    def test_missing_flags_keep_document(self):
        data = {'name': 'study', 'section': {'shape': 'disk'}}
        self.assertEqual(merge_overrides(dict(data), namespace()), data)

    def test_unbounded_drops_interval(self):
        data = {'geometry': {'h': 'parabola_cap{2}', 'interval': [-1, 1]}}
        merged = merge_overrides(data, namespace(unbounded=True))
        self.assertEqual(merged['geometry'],
                         {'h': 'parabola_cap{2}', 'unbounded': True})

    def test_interval_clears_unbounded(self):
        data = {'geometry': {'h': 'rational_cap{2}', 'unbounded': True}}
        merged = merge_overrides(data, namespace(interval=[0., 2.]))
        self.assertEqual(merged['geometry'],
                         {'h': 'rational_cap{2}', 'interval': [0., 2.],
                          'unbounded': False})

    def test_not_an_object(self):
        with self.assertRaises(ConfigurationError):
            merge_overrides({'geometry': 'disk'}, namespace(h='1'))


class UsageTestCase(unittest.TestCase):

    def test_help(self):
        with contextlib.redirect_stdout(io.StringIO()) as out:
            self.assertEqual(run(['--help']), ExitCodes.EXIT_SUCCESS)
        self.assertIn('tubespectra', out.getvalue())

    def test_subcommand_help(self):
        table = (('section', ('--shape', '--n', '--out', '--extrapolate')),
                 ('sweep', ('--config', '--h', '--eps', '--j-max',
                            '--section-n', '--window-cap')),
                 ('tube3d', ('--study', '--n-s', '--n-y', '--export-matrix')),
                 ('report', ('--in', '--format', '--out')))
        for command, flags in table:
            with self.subTest(command=command):
                with contextlib.redirect_stdout(io.StringIO()) as out:
                    self.assertEqual(run([command, '--help']),
                                     ExitCodes.EXIT_SUCCESS)
                for flag in flags:
                    self.assertIn(flag, out.getvalue())

    def test_unknown_flag(self):
        exit_code, _ = invoke(['section', '--bogus'])
        self.assertEqual(exit_code, ExitCodes.EXIT_ERROR)

    def test_missing_command(self):
        exit_code, _ = invoke([])
        self.assertEqual(exit_code, ExitCodes.EXIT_ERROR)

    def test_missing_config_file(self):
        exit_code, _ = invoke(['sweep', '--config', '/nonexistent/x.json'])
        self.assertEqual(exit_code, ExitCodes.EXIT_ERROR)


class InvalidConfigurationTestCase(unittest.TestCase):

    def setUp(self):
        self.tmpdir = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.tmpdir.cleanup()

    def write(self, data):
        path = os.path.join(self.tmpdir.name, 'study.json')
        with open(path, 'w') as ofd:
            json.dump(data, ofd)
        return path

    def test_missing_section(self):
        path = self.write({'geometry': {'h': 'parabola_cap{2}'}})
        exit_code, _ = invoke(['sweep', '--config', path])
        self.assertEqual(exit_code, ExitCodes.EXIT_ERROR)

    def test_increasing_epsilons(self):
        path = self.write({'geometry': {'h': 'parabola_cap{2}'},
                           'section': {'shape': 'disk', 'n': 16}})
        exit_code, _ = invoke(['sweep', '--config', path,
                               '--eps', '0.05', '0.1'])
        self.assertEqual(exit_code, ExitCodes.EXIT_ERROR)

    def test_invalid_section(self):
        exit_code, _ = invoke(['section', '--shape', 'rectangle',
                               '--x-range', '0', '1'])
        self.assertEqual(exit_code, ExitCodes.EXIT_ERROR)

    def test_invalid_json(self):
        path = os.path.join(self.tmpdir.name, 'broken.json')
        with open(path, 'w') as ofd:
            ofd.write('{"geometry": ')
        exit_code, _ = invoke(['sweep', '--config', path])
        self.assertEqual(exit_code, ExitCodes.EXIT_ERROR)


class SectionCommandTestCase(unittest.TestCase):

    ARGV = ['section', '--shape', 'rectangle', '--x-range', '0', '1',
            '--y-range', '0', '1', '--n', '16']

    def setUp(self):
        self.tmpdir = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.tmpdir.cleanup()

    def test_section(self):
        path = os.path.join(self.tmpdir.name, 'square.json')
        exit_code, lines = invoke(self.ARGV + ['--out', path])
        self.assertEqual(exit_code, ExitCodes.EXIT_SUCCESS)
        lambda0 = float(value_of(lines, 'lambda0'))
        self.assertAlmostEqual(lambda0, 2 * math.pi ** 2,
                               delta=0.01 * 2 * math.pi ** 2)
        self.assertTrue(os.path.isfile(path))
        self.assertTrue(os.path.isfile(
            os.path.join(self.tmpdir.name, 'square.bin')))
        with open(path) as ifd:
            meta = json.load(ifd)
        self.assertEqual(meta['n'], 16)
        self.assertAlmostEqual(meta['lambda0'], lambda0, places=4)

    def test_unit_disk(self):
        path = os.path.join(self.tmpdir.name, 'disk.json')
        exit_code, lines = invoke(['section', '--shape', 'disk',
                                   '--radius', '1', '--n', '96',
                                   '--out', path])
        self.assertEqual(exit_code, ExitCodes.EXIT_SUCCESS)
        # first zero of J0 squared
        self.assertAlmostEqual(float(value_of(lines, 'lambda0')),
                               5.783185962946784, delta=0.058)
        self.assertGreater(float(value_of(lines, 'lambda1')),
                           float(value_of(lines, 'lambda0')))
        self.assertLess(abs(float(value_of(lines, 'C3'))), 1e-3)

    def test_deterministic(self):
        outputs = []
        dumps = []
        for i in range(2):
            path = os.path.join(self.tmpdir.name, 'run{}.json'.format(i))
            exit_code, lines = invoke(self.ARGV + ['--out', path])
            self.assertEqual(exit_code, ExitCodes.EXIT_SUCCESS)
            outputs.append([line for line in lines
                            if not line.startswith('modes:')])
            with open(os.path.join(self.tmpdir.name,
                                   'run{}.bin'.format(i)), 'rb') as ifd:
                dumps.append(ifd.read())
        self.assertEqual(outputs[0], outputs[1])
        self.assertEqual(dumps[0], dumps[1])


class GeometryCommandTestCase(unittest.TestCase):

    def test_valid(self):
        exit_code, lines = invoke(['geometry', '--h', 'parabola_cap{2}',
                                   '--interval', '-1', '1'])
        self.assertEqual(exit_code, ExitCodes.EXIT_SUCCESS)
        self.assertAlmostEqual(float(value_of(lines, 'M')), 2., places=6)

    def test_no_maximum(self):
        exit_code, _ = invoke(['geometry', '--h', 'const{1}',
                               '--interval', '-1', '1'])
        self.assertEqual(exit_code, ExitCodes.EXIT_ERROR)

    def test_invalid_expression(self):
        exit_code, _ = invoke(['geometry', '--h', '2 - foo(s)'])
        self.assertEqual(exit_code, ExitCodes.EXIT_ERROR)


class ReportCommandTestCase(unittest.TestCase):

    def setUp(self):
        self.tmpdir = tempfile.TemporaryDirectory()
        self.report = ConvergenceReport('dirichlet')
        self.report.rows = [
            ReportRow(0.1, 0, 1.25, 1.2, 0.05, 127, 1., 'ok', None),
            ReportRow(0.05, 0, 1.225, 1.2, 0.025, 179, 1., 'ok', None)]
        self.path = os.path.join(self.tmpdir.name, 'report.json')
        hreport.emit_report(self.report, 'json', self.path)

    def tearDown(self):
        self.tmpdir.cleanup()

    def test_to_stdout(self):
        out = io.StringIO()
        with contextlib.redirect_stderr(io.StringIO()):
            exit_code = run(['report', '--in', self.path], stdout=out)
        self.assertEqual(exit_code, ExitCodes.EXIT_SUCCESS)
        self.assertEqual(out.getvalue(), hreport.to_csv(self.report))

    def test_to_file(self):
        path = os.path.join(self.tmpdir.name, 'report.csv')
        exit_code, lines = invoke(['report', '--in', self.path,
                                   '--out', path])
        self.assertEqual(exit_code, ExitCodes.EXIT_SUCCESS)
        self.assertEqual(lines, ['report: {}'.format(path)])
        with open(path) as ifd:
            self.assertEqual(ifd.read(), hreport.to_csv(self.report))

    def test_missing_report(self):
        exit_code, _ = invoke(['report', '--in',
                               os.path.join(self.tmpdir.name, 'none.json')])
        self.assertEqual(exit_code, ExitCodes.EXIT_ERROR)


# -----------------------------------------------------------------------------
if __name__ == '__main__':
    unittest.main()
