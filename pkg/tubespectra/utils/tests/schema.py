# -*- coding: utf-8 -*-
"""
Field and validator test facilities.
"""

import unittest

import marshmallow as ma

from tubespectra.utils import schema


# -----------------------------------------------------------------------------
class FieldTestCase(unittest.TestCase):
    """
    Base class for all field test cases.
    """

    class TestSchema:
        pass

    def setUp(self):
        self.schema = self.TestSchema()

    def tearDown(self):
        self.schema = None

    def _valid(self, data, reference_result, method=None):
        if not method:
            method = self.schema.load
        for v in data:
            result = method(v)
            self.assertEqual(reference_result, result)

    def _invalid(self, data, method=None):
        if not method:
            method = self.schema.load
        for v in data:
            with self.assertRaises(ma.ValidationError):
                method(v)


class PositiveFloatFieldTestCase(FieldTestCase):

    class TestSchema(ma.Schema):
        f = schema.PositiveFloat()

    def test_field_valid(self):
        self._valid([dict(f=2), dict(f=2.), dict(f='2')], {'f': 2.})

    def test_field_invalid(self):
        self._invalid([dict(f=0), dict(f=-1.), dict(f='foo')])


class FractionFieldTestCase(FieldTestCase):

    class TestSchema(ma.Schema):
        f = schema.Fraction()

    def test_field_valid(self):
        self._valid([dict(f=0.1)], {'f': 0.1})

    def test_field_invalid(self):
        self._invalid([dict(f=0), dict(f=1), dict(f=1.5)])


class NotEmptyStringFieldTestCase(FieldTestCase):

    class TestSchema(ma.Schema):
        f = schema.NotEmptyString()

    def test_field_valid(self):
        self._valid([dict(f='foo')], {'f': 'foo'})

    def test_field_invalid(self):
        self._invalid([dict(f=1), dict(f='')])


class EpsilonListFieldTestCase(FieldTestCase):

    class TestSchema(ma.Schema):
        f = schema.EpsilonList()

    def test_field_valid(self):
        self._valid([dict(f=[0.1, 0.05, 0.025])], {'f': [0.1, 0.05, 0.025]})

    def test_field_invalid(self):
        self._invalid([dict(f=[]), dict(f=[0.1, 0.1]),
                       dict(f=[0.05, 0.1]), dict(f=[0.1, -0.05]),
                       dict(f='0.1')])


class IntervalFieldTestCase(FieldTestCase):

    class TestSchema(ma.Schema):
        f = schema.Interval()

    def test_field_valid(self):
        self._valid([dict(f=[-1, 2])], {'f': [-1., 2.]})

    def test_field_invalid(self):
        self._invalid([dict(f=[0, 1]), dict(f=[-1, 0]), dict(f=[1, -1]),
                       dict(f=[-1, 0, 1]), dict(f=[-1])])

    def test_validator_length(self):
        for values in ([-1., 0., 1.], [-1.], []):
            with self.subTest(values=values):
                with self.assertRaises(ma.ValidationError):
                    schema.validate_interval(values)


# -----------------------------------------------------------------------------
if __name__ == '__main__':
    unittest.main()
