# -*- coding: utf-8 -*-
"""
Convergence and essential spectrum reports and their (de)serialization.

JSON documents are produced by marshmallow schemas and reproduce a report
exactly when loaded again; CSV output is a deterministic projection on the
columns listed in :py:data:`settings.HARNESS_CSV_COLUMNS`.
"""

import collections
import csv
import functools
import io
import json

from marshmallow import (Schema, fields, post_load, validate, RAISE,
                         ValidationError)

from tubespectra import settings
from tubespectra.spectral.numerics import RateFit
from tubespectra.utils import fmt_float
from tubespectra.utils.error import ConfigurationError, Error, ExitCodes


ReportRow = collections.namedtuple(
    'ReportRow', ['epsilon', 'j', 'scaled_eigenvalue', 'mu_j', 'abs_error',
                  'grid_n', 'window_L', 'status', 'dirichlet_value',
                  'spread'])
ReportRow.__new__.__defaults__ = ('ok', None, None)

EssentialRow = collections.namedtuple(
    'EssentialRow', ['epsilon', 'threshold', 'l0', 'l0_doubled', 'stability',
                     'certified_count', 'window_L', 'status'])

Failure = collections.namedtuple('Failure', ['epsilon', 'stage', 'reason'])


# -----------------------------------------------------------------------------
class ReportError(Error):
    """Cannot access report {!r}: {}."""
    exit_code = ExitCodes.EXIT_ERROR

    @property
    def path(self):
        return self.args[0]


# -----------------------------------------------------------------------------
class _Report:

    kind = None

    def __init__(self, rows=None, flags=None, failures=None, metadata=None):
        self.rows = list(rows or [])
        self.flags = list(flags or [])
        self.failures = list(failures or [])
        self.metadata = dict(metadata or {})

    @property
    def completed(self):
        """All requested rows were computed."""
        return not self.failures

    def flag(self, name):
        if name not in self.flags:
            self.flags.append(name)

    def __eq__(self, other):
        return type(self) is type(other) and vars(self) == vars(other)

    def __repr__(self):
        return '<{}(kind={!r}, rows={}, failures={})>'.format(
            type(self).__name__, self.kind, len(self.rows),
            len(self.failures))


class ConvergenceReport(_Report):
    """
    Rows :math:`(\\varepsilon, j)` of a study together with fitted rates,
    extrapolated limits and their relative deviation from the reference
    values.

    :param str kind: Study identifier (:code:`dirichlet`, :code:`neumann`,
        :code:`reduction`, :code:`forms`)
    """

    def __init__(self, kind, rows=None, rates=None, limits=None,
                 deviations=None, flags=None, failures=None, metadata=None):
        super().__init__(rows=rows, flags=flags, failures=failures,
                         metadata=metadata)
        self.kind = kind
        self.rates = dict(rates or {})
        self.limits = dict(limits or {})
        self.deviations = dict(deviations or {})

    def rows_for(self, j):
        return [r for r in self.rows if r.j == j]

    def epsilons(self):
        return sorted({r.epsilon for r in self.rows}, reverse=True)

    def j_values(self):
        return sorted({r.j for r in self.rows})


class EssentialSpectrumReport(_Report):
    """
    Per :math:`\\varepsilon`: the essential spectrum threshold, the lowest
    eigenvalue of :math:`T_\\varepsilon` on a window and on the doubled
    window and the number of certified discrete eigenvalues.
    """

    kind = 'essential'

    def __init__(self, rows=None, flags=None, failures=None, metadata=None,
                 kind='essential'):
        super().__init__(rows=rows, flags=flags, failures=failures,
                         metadata=metadata)


# -----------------------------------------------------------------------------
Float = functools.partial(fields.Float, allow_nan=True)


class RateSchema(Schema):
    slope = Float(required=True)
    intercept = Float(required=True)
    r_squared = Float(required=True)

    @post_load
    def make_rate(self, data, **kwargs):
        return RateFit(**data)

    class Meta:
        unknown = RAISE


class FailureSchema(Schema):
    epsilon = Float(required=True)
    stage = fields.Str(required=True)
    reason = fields.Str(required=True)

    @post_load
    def make_failure(self, data, **kwargs):
        return Failure(**data)

    class Meta:
        unknown = RAISE


class ReportRowSchema(Schema):
    epsilon = Float(required=True)
    j = fields.Int(required=True)
    scaled_eigenvalue = Float(required=True)
    mu_j = Float(required=True)
    abs_error = Float(required=True)
    grid_n = fields.Int(required=True)
    window_L = Float(required=True)
    status = fields.Str(load_default='ok')
    dirichlet_value = Float(allow_none=True, load_default=None)
    spread = Float(allow_none=True, load_default=None)

    @post_load
    def make_row(self, data, **kwargs):
        return ReportRow(**data)

    class Meta:
        unknown = RAISE


class EssentialRowSchema(Schema):
    epsilon = Float(required=True)
    threshold = Float(required=True)
    l0 = Float(allow_none=True, required=True)
    l0_doubled = Float(allow_none=True, required=True)
    stability = Float(allow_none=True, required=True)
    certified_count = fields.Int(required=True)
    window_L = Float(allow_none=True, required=True)
    status = fields.Str(required=True)

    @post_load
    def make_row(self, data, **kwargs):
        return EssentialRow(**data)

    class Meta:
        unknown = RAISE


class ConvergenceReportSchema(Schema):
    kind = fields.Str(required=True)
    rows = fields.List(fields.Nested(ReportRowSchema), load_default=list)
    rates = fields.Dict(keys=fields.Int(), values=fields.Nested(RateSchema),
                        load_default=dict)
    limits = fields.Dict(keys=fields.Int(), values=Float(),
                         load_default=dict)
    deviations = fields.Dict(keys=fields.Int(), values=Float(),
                             load_default=dict)
    flags = fields.List(fields.Str(), load_default=list)
    failures = fields.List(fields.Nested(FailureSchema), load_default=list)
    metadata = fields.Dict(load_default=dict)

    @post_load
    def make_report(self, data, **kwargs):
        return ConvergenceReport(**data)

    class Meta:
        unknown = RAISE


class EssentialSpectrumReportSchema(Schema):
    kind = fields.Str(validate=validate.Equal('essential'), required=True)
    rows = fields.List(fields.Nested(EssentialRowSchema), load_default=list)
    flags = fields.List(fields.Str(), load_default=list)
    failures = fields.List(fields.Nested(FailureSchema), load_default=list)
    metadata = fields.Dict(load_default=dict)

    @post_load
    def make_report(self, data, **kwargs):
        return EssentialSpectrumReport(**data)

    class Meta:
        unknown = RAISE


def _schema_for(report):
    if isinstance(report, EssentialSpectrumReport):
        return EssentialSpectrumReportSchema()
    return ConvergenceReportSchema()


# -----------------------------------------------------------------------------
def _csv_value(value):
    if isinstance(value, float):
        return fmt_float(value)
    if value is None:
        return ''
    return str(value)


def to_csv(report):
    """
    Render the CSV projection of a report.

    :rtype: str
    """
    if isinstance(report, EssentialSpectrumReport):
        columns = settings.HARNESS_ESSENTIAL_CSV_COLUMNS
    else:
        columns = settings.HARNESS_CSV_COLUMNS

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator='\n')
    writer.writerow(columns)
    for row in report.rows:
        writer.writerow([_csv_value(getattr(row, c)) for c in columns])
    return buf.getvalue()


def to_json(report):
    """
    Render the JSON document of a report.

    :rtype: str
    """
    return json.dumps(_schema_for(report).dump(report), indent=2,
                      sort_keys=True) + '\n'


def emit_report(report, fmt, path):
    """
    Serialize a report to :code:`path`.

    :param report: Report
    :param str fmt: :code:`'csv'` or :code:`'json'`
    :param str path: Output path; :code:`'-'` is not supported
    :raises ReportError: if the file cannot be written
    """
    if fmt not in settings.HARNESS_REPORT_FORMATS:
        raise ConfigurationError('unknown report format {!r}'.format(fmt))
    content = to_csv(report) if fmt == 'csv' else to_json(report)
    try:
        with open(path, 'w', newline='') as ofd:
            ofd.write(content)
    except OSError as err:
        raise ReportError(path, err.strerror or err)


def load_report(path):
    """
    Load a JSON report written by :py:func:`emit_report`.

    :raises ReportError: if the file cannot be read or parsed
    """
    try:
        with open(path) as ifd:
            data = json.load(ifd)
    except OSError as err:
        raise ReportError(path, err.strerror or err)
    except ValueError as err:
        raise ReportError(path, 'invalid JSON ({})'.format(err))

    if not isinstance(data, dict):
        raise ReportError(path, 'not a report document')
    schema = (EssentialSpectrumReportSchema() if data.get('kind') ==
              'essential' else ConvergenceReportSchema())
    try:
        return schema.load(data)
    except ValidationError as err:
        raise ReportError(path, err.messages)
