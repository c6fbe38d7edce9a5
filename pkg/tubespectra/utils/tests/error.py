# -*- coding: utf-8 -*-
"""
Error facilities test facilities.
"""

import unittest

from tubespectra.utils import error


# -----------------------------------------------------------------------------
class ErrorTestCase(unittest.TestCase):

    class MyError(error.Error):
        """My error ({}, {})."""

    def test_message_from_docstring(self):
        err = self.MyError('foo', 42)
        self.assertEqual(str(err), 'My error (foo, 42).')

    def test_defaults(self):
        err = error.Error()
        self.assertEqual(err.exit_code, error.ExitCodes.EXIT_ERROR)
        self.assertFalse(err.traceback)
        self.assertTrue(error.ErrorWithTraceback().traceback)

    def test_numerical_exit_code(self):
        err = error.NumericalError('diverged')
        self.assertEqual(err.exit_code, error.ExitCodes.EXIT_NUMERICAL)
        self.assertEqual(str(err), 'Numerical failure (diverged).')

    def test_configuration_error(self):
        err = error.ConfigurationError({'j_max': ['missing']})
        self.assertEqual(err.exit_code, 2)
        self.assertIn('j_max', str(err))


# -----------------------------------------------------------------------------
if __name__ == '__main__':
    unittest.main()
