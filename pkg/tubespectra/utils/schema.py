# -*- coding: utf-8 -*-
"""
General marshmallow field and validator definitions for *tubespectra*.
"""

import functools
import math

from marshmallow import fields, validate, ValidationError


validate_positive = validate.Range(min=0., min_inclusive=False)
validate_fraction = validate.Range(min=0., max=1., min_inclusive=False,
                                   max_inclusive=False)
validate_non_negative = validate.Range(min=0)
not_empty = validate.NoneOf([None, ''])


def NotEmptyField(field_type, **kwargs):
    return functools.partial(field_type, validate=not_empty, **kwargs)


NotEmptyString = NotEmptyField(fields.Str)
PositiveFloat = functools.partial(fields.Float, validate=validate_positive)
Fraction = functools.partial(fields.Float, validate=validate_fraction)
NonNegativeInt = functools.partial(fields.Int, validate=validate_non_negative)
PositiveInt = functools.partial(fields.Int, validate=validate.Range(min=1))

Vector2 = functools.partial(fields.List, fields.Float(),
                            validate=validate.Length(equal=2))


# -----------------------------------------------------------------------------
def validate_strictly_decreasing(values):
    """
    Validate a sequence of positive, finite and strictly decreasing floats.

    :param values: Sequence to be validated
    :raises marshmallow.ValidationError: if the validation fails
    """
    if not values:
        raise ValidationError('At least one value required.')
    for v in values:
        if not (math.isfinite(v) and v > 0):
            raise ValidationError(
                'Values must be positive and finite: {!r}.'.format(v))
    for prev, cur in zip(values, values[1:]):
        if not cur < prev:
            raise ValidationError(
                'Values must be strictly decreasing: {!r} >= {!r}.'.format(
                    cur, prev))


def validate_interval(values):
    """
    Validate a bounded interval :code:`[a, b]` with :code:`a < 0 < b`.

    :param values: Interval end points
    :raises marshmallow.ValidationError: if the validation fails
    """
    if len(values) != 2:
        raise ValidationError(
            'Interval requires two end points: {!r}.'.format(values))
    a, b = values
    if not (math.isfinite(a) and math.isfinite(b) and a < 0 < b):
        raise ValidationError(
            'Interval must satisfy a < 0 < b: [{!r}, {!r}].'.format(a, b))


EpsilonList = functools.partial(fields.List, fields.Float(),
                                validate=validate_strictly_decreasing)
Interval = functools.partial(Vector2, validate=[validate.Length(equal=2),
                                                validate_interval])
