# -*- coding: utf-8 -*-
"""
Study configuration schemas.

A study is a single JSON document, e.g.

.. code::

    {
      "name": "straight-disk",
      "geometry": {"h": "parabola_cap{2}", "interval": [-1, 1]},
      "section": {"shape": "disk", "radius": 1.0, "n": 64},
      "epsilons": [0.1, 0.05, 0.025, 0.0125],
      "j_max": 2
    }

Unknown keys are rejected.
"""

import json

from marshmallow import (Schema, fields, validate, ValidationError, RAISE,
                         post_load, validates_schema)

from tubespectra import settings
from tubespectra.spectral.cross_section import DomainError, domain_from_dict
from tubespectra.spectral.geometry import (Interval, ScalarFunction,
                                           TubeGeometry)
from tubespectra.utils.error import ConfigurationError, Error
from tubespectra.utils.schema import (EpsilonList, Fraction,
                                      Interval as IntervalField,
                                      NonNegativeInt, NotEmptyString,
                                      PositiveFloat, PositiveInt, Vector2)


# -----------------------------------------------------------------------------
class SectionConfig:

    def __init__(self, domain, n, boundary):
        self.domain = domain
        self.n = n
        self.boundary = boundary

    def __repr__(self):
        return '<SectionConfig({}, n={}, boundary={})>'.format(
            self.domain.shape, self.n, self.boundary)


class GridConfig:

    def __init__(self, n=None, resolution=settings.EFFECTIVE_RESOLUTION,
                 window_cap=settings.EFFECTIVE_WINDOW_CAP):
        self.n = n
        self.resolution = resolution
        self.window_cap = window_cap


class Tube3DConfig:

    def __init__(self, n_s=None, n_y=settings.TUBE3D_N_Y,
                 refinement_ratio=settings.TUBE3D_REFINEMENT_RATIO):
        self.n_s = n_s
        self.n_y = n_y
        self.refinement_ratio = refinement_ratio


class OutputConfig:

    def __init__(self, path=None, format='csv'):
        self.path = path
        self.format = format


class StudyConfig:
    """
    Validated study configuration.
    """

    def __init__(self, geometry, section, name='study', epsilons=None,
                 j_max=settings.HARNESS_DEFAULT_J_MAX, bc='dirichlet',
                 delta=settings.EFFECTIVE_ZETA_GUARD, grid=None, tube3d=None,
                 output=None, threads=None):
        self.name = name
        self.geometry = geometry
        self.section = section
        if epsilons is None:
            epsilons = (settings.HARNESS_DEFAULT_EPSILONS
                        if geometry.bounded else
                        settings.HARNESS_UNBOUNDED_EPSILONS)
        self.epsilons = list(epsilons)
        self.j_max = j_max
        self.bc = bc
        self.delta = delta
        self.grid = grid or GridConfig()
        self.tube3d = tube3d or Tube3DConfig()
        self.output = output or OutputConfig()
        self.threads = threads

    def __repr__(self):
        return '<StudyConfig({!r}, {!r}, {!r}, eps={}, j_max={})>'.format(
            self.name, self.geometry, self.section, self.epsilons,
            self.j_max)


# -----------------------------------------------------------------------------
class ScalarFunctionField(fields.Field):
    """
    A scalar function given either as number, catalog identifier
    :code:`name{p1,...}` or expression in :code:`s`.
    """

    default_error_messages = {'invalid': 'Invalid scalar function: {error}'}

    def _deserialize(self, value, attr, data, **kwargs):
        if isinstance(value, bool) or not isinstance(value,
                                                     (str, int, float)):
            raise self.make_error('invalid', error='string or number expected')
        try:
            return ScalarFunction.from_spec(value)
        except Error as err:
            raise self.make_error('invalid', error=str(err))

    def _serialize(self, value, attr, obj, **kwargs):
        if value is None:
            return None
        return value.label


class GeometrySchema(Schema):
    h = ScalarFunctionField(required=True)
    k = ScalarFunctionField(load_default='const{0}')
    tau = ScalarFunctionField(load_default='const{0}')
    alpha = ScalarFunctionField(load_default='const{0}')
    interval = IntervalField()
    unbounded = fields.Bool(load_default=False)

    @validates_schema
    def validate_interval(self, data, **kwargs):
        if data.get('unbounded') and data.get('interval'):
            raise ValidationError(
                'either an interval or unbounded=true, not both',
                field_name='interval')

    @post_load
    def make_geometry(self, data, **kwargs):
        if data['unbounded']:
            interval = Interval.whole_line()
        else:
            interval = Interval(*data.get('interval', (-1., 1.)))
        try:
            return TubeGeometry(interval, data['h'],
                                k=ScalarFunction.from_spec(data['k']),
                                tau=ScalarFunction.from_spec(data['tau']),
                                alpha=ScalarFunction.from_spec(data['alpha']))
        except Error as err:
            raise ValidationError(str(err))

    class Meta:
        unknown = RAISE


class SectionSchema(Schema):
    shape = fields.Str(
        required=True,
        validate=validate.OneOf(('disk', 'rectangle', 'polygon')))
    radius = PositiveFloat(load_default=1.)
    center = Vector2(load_default=lambda: [0., 0.])
    x_range = Vector2()
    y_range = Vector2()
    vertices = fields.List(Vector2(), validate=validate.Length(min=3))
    n = PositiveInt(load_default=64,
                    validate=validate.Range(min=settings.SECTION_N_MIN))
    boundary = fields.Str(
        load_default=settings.SECTION_BOUNDARY_DEFAULT,
        validate=validate.OneOf(settings.SECTION_BOUNDARY_CHOICES))

    @validates_schema
    def validate_shape(self, data, **kwargs):
        shape = data.get('shape')
        required = {'rectangle': ('x_range', 'y_range'),
                    'polygon': ('vertices', )}.get(shape, ())
        for key in required:
            if key not in data:
                raise ValidationError(
                    'required for shape {!r}'.format(shape), field_name=key)

    @post_load
    def make_section(self, data, **kwargs):
        shape = data['shape']
        if shape == 'disk':
            spec = {'shape': shape, 'radius': data['radius'],
                    'center': data['center']}
        elif shape == 'rectangle':
            spec = {'shape': shape, 'x_range': data['x_range'],
                    'y_range': data['y_range']}
        else:
            spec = {'shape': shape, 'vertices': data['vertices']}
        try:
            domain = domain_from_dict(spec)
        except DomainError as err:
            raise ValidationError(str(err))
        return SectionConfig(domain, data['n'], data['boundary'])

    class Meta:
        unknown = RAISE


class GridSchema(Schema):
    n = fields.Int(allow_none=True, load_default=None,
                   validate=validate.Range(min=settings.EFFECTIVE_N_MIN))
    resolution = PositiveFloat(load_default=settings.EFFECTIVE_RESOLUTION)
    window_cap = PositiveFloat(load_default=settings.EFFECTIVE_WINDOW_CAP)

    @post_load
    def make_grid(self, data, **kwargs):
        return GridConfig(**data)

    class Meta:
        unknown = RAISE


class Tube3DSchema(Schema):
    # None: sized from the grid rule at the smallest eps
    n_s = fields.Int(load_default=None, allow_none=True,
                     validate=validate.Range(min=8))
    n_y = fields.Int(load_default=settings.TUBE3D_N_Y,
                     validate=validate.Range(min=settings.SECTION_N_MIN))
    refinement_ratio = Fraction(
        load_default=settings.TUBE3D_REFINEMENT_RATIO)

    @post_load
    def make_tube3d(self, data, **kwargs):
        return Tube3DConfig(**data)

    class Meta:
        unknown = RAISE


class OutputSchema(Schema):
    path = NotEmptyString(allow_none=True, load_default=None)
    format = fields.Str(load_default='csv',
                        validate=validate.OneOf(
                            settings.HARNESS_REPORT_FORMATS))

    @post_load
    def make_output(self, data, **kwargs):
        return OutputConfig(**data)

    class Meta:
        unknown = RAISE


class StudyConfigSchema(Schema):
    name = NotEmptyString(load_default='study')
    geometry = fields.Nested(GeometrySchema, required=True)
    section = fields.Nested(SectionSchema, required=True)
    epsilons = EpsilonList()
    j_max = NonNegativeInt(load_default=settings.HARNESS_DEFAULT_J_MAX)
    bc = fields.Str(load_default='dirichlet',
                    validate=validate.OneOf(settings.EFFECTIVE_BC_CHOICES))
    delta = Fraction(load_default=settings.EFFECTIVE_ZETA_GUARD)
    grid = fields.Nested(GridSchema)
    tube3d = fields.Nested(Tube3DSchema)
    output = fields.Nested(OutputSchema)
    threads = PositiveInt(allow_none=True, load_default=None)

    @post_load
    def make_config(self, data, **kwargs):
        return StudyConfig(**data)

    class Meta:
        unknown = RAISE


# -----------------------------------------------------------------------------
def load_config(source):
    """
    Load and validate a study configuration.

    :param source: Path to a JSON document or an already parsed mapping
    :rtype: :py:class:`StudyConfig`
    :raises ConfigurationError: if the document cannot be read or is
        invalid
    """
    if isinstance(source, dict):
        data = source
    else:
        data = read_document(source)
    try:
        return StudyConfigSchema().load(data)
    except ValidationError as err:
        raise ConfigurationError(err.messages)


def read_document(path):
    """Read a JSON study document."""
    try:
        with open(path) as ifd:
            data = json.load(ifd)
    except OSError as err:
        raise ConfigurationError('{}: {}'.format(path, err.strerror or err))
    except ValueError as err:
        raise ConfigurationError('{}: invalid JSON ({})'.format(path, err))
    if not isinstance(data, dict):
        raise ConfigurationError('{}: top level object expected'.format(path))
    return data
