# -*- coding: utf-8 -*-
"""
Application facilities test facilities.
"""

import logging
import os
import tempfile
import unittest

from tubespectra.utils import app, thread_count, ordered_map, fmt_float
from tubespectra import settings


# -----------------------------------------------------------------------------
class EchoApp(app.App):

    def build_parser(self, parents=[]):
        parser = app.CustomParser(prog='echo', parents=parents)
        parser.add_argument('word')
        return parser

    def run(self):
        return self.args.word


class AppTestCase(unittest.TestCase):

    def test_configure_fallback_logger(self):
        a = EchoApp()
        args = a.configure(['foo'])
        self.assertEqual(args.word, 'foo')
        self.assertIsNone(args.path_logging_conf)
        self.assertTrue(a.logger_configured)
        self.assertIn(app.App.FALLBACK_HANDLER_NAME,
                      [h.get_name() for h in logging.getLogger().handlers])
        self.assertEqual(a.run(), 'foo')

    def test_fallback_handler_installed_once(self):
        EchoApp().configure(['foo'])
        EchoApp().configure(['bar'])
        names = [h.get_name() for h in logging.getLogger().handlers]
        self.assertEqual(names.count(app.App.FALLBACK_HANDLER_NAME), 1)

    def test_invalid_logging_conf_falls_back(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            path = os.path.join(tmpdir, 'logging.conf')
            with open(path, 'w') as ofd:
                ofd.write('not a logging configuration\n')
            a = EchoApp()
            with self.assertLogs(level='WARNING'):
                a.configure(['foo', '--logging-conf', path])
            self.assertTrue(a.logger_configured)

    def test_usage_error(self):
        with self.assertRaises(SystemExit) as cm:
            EchoApp().configure([])
        self.assertEqual(cm.exception.code, 2)

    def test_abstract(self):
        with self.assertRaises(NotImplementedError):
            app.App().build_parser()


class UtilsTestCase(unittest.TestCase):

    def test_fmt_float(self):
        self.assertEqual(fmt_float(1. / 3.), '0.333333333333')
        self.assertEqual(fmt_float(1e-20), '1e-20')
        self.assertEqual(fmt_float(None), '')

    def test_thread_count(self):
        env = settings.TUBESPECTRA_ENV_THREADS
        saved = os.environ.pop(env, None)
        try:
            self.assertEqual(thread_count(),
                             settings.TUBESPECTRA_DEFAULT_THREADS)
            os.environ[env] = '3'
            self.assertEqual(thread_count(), 3)
            self.assertEqual(thread_count(2), 2)
            os.environ[env] = 'many'
            self.assertEqual(thread_count(),
                             settings.TUBESPECTRA_DEFAULT_THREADS)
        finally:
            os.environ.pop(env, None)
            if saved is not None:
                os.environ[env] = saved

    def test_ordered_map(self):
        items = list(range(20))
        reference_result = [i * i for i in items]
        self.assertEqual(ordered_map(lambda i: i * i, items),
                         reference_result)
        self.assertEqual(ordered_map(lambda i: i * i, items, threads=4),
                         reference_result)


# -----------------------------------------------------------------------------
if __name__ == '__main__':
    unittest.main()
