# -*- coding: utf-8 -*-
"""
Expression parser test facilities.
"""

import unittest

import numpy as np

from tubespectra.cli.expression import (ExpressionSyntaxError,
                                        UnknownIdentifier, parse_expression,
                                        tokenize)
from tubespectra.utils.error import ExitCodes


# -----------------------------------------------------------------------------
class TokenizeTestCase(unittest.TestCase):

    def test_tokens(self):
        tokens = tokenize('2.5e-1 * sqrt(s)')
        self.assertEqual([t.kind for t in tokens],
                         ['number', 'op', 'name', 'op', 'name', 'op', 'end'])
        self.assertEqual([t.offset for t in tokens], [0, 7, 9, 13, 14, 15,
                                                      16])

    def test_invalid_character(self):
        with self.assertRaises(ExpressionSyntaxError) as cm:
            tokenize('2 $ s')
        self.assertEqual(cm.exception.offset, 2)


class ParseExpressionTestCase(unittest.TestCase):

    def test_oracle_table(self):
        table = (('2 - s^2', 1., 1.),
                 ('2 - s^2/(1+s^2)', 0., 2.),
                 ('1 + exp(-s^2)', 0., 2.),
                 ('sqrt(4) * cos(0) + abs(-1)', 5., 3.),
                 ('(1 + s) * (1 - s)', 0.5, 0.75),
                 ('tanh(0) + sin(s)', 0., 0.))
        for text, s, reference_result in table:
            with self.subTest(text=text):
                self.assertAlmostEqual(float(parse_expression(text)(s)),
                                       reference_result, delta=1e-12)

    def test_underflow(self):
        self.assertLess(float(parse_expression('0.3*exp(-s^2)')(10.)),
                        1e-40)

    def test_power_right_associative(self):
        self.assertEqual(float(parse_expression('2^3^2')(0.)), 512.)
        self.assertEqual(float(parse_expression('2^-1')(0.)), 0.5)

    def test_unary_minus_below_power(self):
        self.assertEqual(float(parse_expression('-s^2')(3.)), -9.)
        self.assertEqual(float(parse_expression('-2^2')(0.)), -4.)
        self.assertEqual(float(parse_expression('(-2)^2')(0.)), 4.)

    def test_precedence(self):
        self.assertEqual(float(parse_expression('1 + 2 * 3')(0.)), 7.)
        self.assertEqual(float(parse_expression('8 / 2 / 2')(0.)), 2.)
        self.assertEqual(float(parse_expression('1 - 2 - 3')(0.)), -4.)

    def test_vectorized(self):
        s = np.linspace(-2., 2., 9)
        np.testing.assert_allclose(parse_expression('2 - s^2')(s), 2 - s**2)
        constant = parse_expression('3')(s)
        self.assertEqual(constant.shape, s.shape)
        self.assertTrue(np.all(constant == 3.))

    def test_repr(self):
        self.assertEqual(repr(parse_expression('s')), "<Expression('s')>")


class ExpressionErrorTestCase(unittest.TestCase):

    def test_syntax_errors(self):
        table = (('2 +', 3),
                 ('(s', 2),
                 ('s s', 2),
                 ('sin s', 4),
                 ('*s', 0),
                 ('', 0))
        for text, reference_result in table:
            with self.subTest(text=text):
                with self.assertRaises(ExpressionSyntaxError) as cm:
                    parse_expression(text)
                self.assertEqual(cm.exception.offset, reference_result)

    def test_byte_offset(self):
        # U+00A0 is whitespace and two bytes long in UTF-8
        with self.assertRaises(ExpressionSyntaxError) as cm:
            parse_expression('s\u00a0+ $')
        self.assertEqual(cm.exception.offset, 5)

    def test_unknown_identifier(self):
        with self.assertRaises(UnknownIdentifier) as cm:
            parse_expression('2*bar(s)')
        self.assertEqual(cm.exception.name, 'bar')
        self.assertEqual(cm.exception.offset, 2)
        self.assertEqual(str(cm.exception),
                         "Unknown identifier 'bar' at byte offset 2.")

    def test_message_and_exit_code(self):
        with self.assertRaises(ExpressionSyntaxError) as cm:
            parse_expression('2 +')
        self.assertEqual(str(cm.exception),
                         'Syntax error at byte offset 3: unexpected end of '
                         'input.')
        self.assertEqual(cm.exception.exit_code, ExitCodes.EXIT_ERROR)


# -----------------------------------------------------------------------------
if __name__ == '__main__':
    unittest.main()
