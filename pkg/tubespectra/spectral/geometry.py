# -*- coding: utf-8 -*-
"""
Tube geometry: the scalar functions :math:`k, \\tau, \\alpha, h` over the
interval :math:`I`, validation of the hypotheses on the deformation
:math:`h`, the Jacobian density :math:`\\beta_\\varepsilon`, the Jacobian
of the straightening map and Frenet frames of sampled curves.

Sampled checks can falsify the hypotheses on :math:`h` but never prove
them; reports therefore speak of *consistency*.
"""

import collections
import math
import re

import numpy as np

from tubespectra import settings
from tubespectra.spectral.numerics import ArgumentError, fit_rate
from tubespectra.utils.error import Error, ExitCodes, NumericalError


FrameSample = collections.namedtuple('FrameSample',
                                     ['s', 'T', 'N', 'B', 'k', 'tau'])

ContactProfile = collections.namedtuple('ContactProfile',
                                        ['order_plus', 'coeff_plus',
                                         'order_minus', 'coeff_minus'])


# -----------------------------------------------------------------------------
class GeometryError(Error):
    """Geometry error ({})."""


class CatalogError(GeometryError):
    """Invalid catalog function {!r}: {}."""
    exit_code = ExitCodes.EXIT_ERROR


class SingularJacobian(NumericalError):
    """Singular Jacobian: beta={} <= 0 at s={}, y={}."""


# -----------------------------------------------------------------------------
class ScalarFunction:
    """
    A real function of the arc length :math:`s` with its derivative.

    Evaluation is vectorized over :py:mod:`numpy` arrays. The derivative is
    analytic for catalog functions; otherwise a central difference with
    step :code:`1e-6 * max(1, |s|)` is used.
    """

    CATALOG_PATTERN = re.compile(r'^\s*([a-z_]+)\s*\{([^{}]*)\}\s*$')

    def __init__(self, func, derivative=None, label=None, limsup=None,
                 vanishes=False):
        """
        :param func: Vectorized evaluator
        :param derivative: Vectorized analytic derivative, if available
        :param str label: Human readable specification
        :param limsup: Known :math:`\\limsup_{|s|\\to\\infty}`, if available
        :param bool vanishes: The function vanishes identically
        """
        self._func = func
        self._derivative = derivative
        self.label = label or repr(func)
        self.limsup = limsup
        self.vanishes = vanishes

    def __call__(self, s):
        s_arr = np.asarray(s, dtype=float)
        values = np.asarray(self._func(s_arr), dtype=float)
        if values.shape != s_arr.shape:
            values = np.broadcast_to(values, s_arr.shape).copy()
        if s_arr.ndim == 0:
            return float(values)
        return values

    def derivative(self, s):
        if self._derivative is not None:
            s_arr = np.asarray(s, dtype=float)
            values = np.asarray(self._derivative(s_arr), dtype=float)
            if values.shape != s_arr.shape:
                values = np.broadcast_to(values, s_arr.shape).copy()
            return float(values) if s_arr.ndim == 0 else values
        return self.central_difference(s)

    def central_difference(self, s):
        s_arr = np.asarray(s, dtype=float)
        step = settings.GEOMETRY_FD_STEP * np.maximum(1., np.abs(s_arr))
        values = (np.asarray(self._func(s_arr + step), dtype=float) -
                  np.asarray(self._func(s_arr - step), dtype=float)) / (
                      2. * step)
        if s_arr.ndim == 0:
            return float(values)
        return values

    @property
    def analytic_derivative(self):
        return self._derivative is not None

    # -------------------------------------------------------------------------
    @classmethod
    def from_catalog(cls, name, params):
        """
        Build a catalog function.

        :param str name: One of :code:`parabola_cap`, :code:`rational_cap`,
            :code:`gauss_bump`, :code:`const` or :code:`poly`
        :param params: Parameters of the catalog entry
        :rtype: :py:class:`ScalarFunction`
        """
        params = [float(p) for p in params]
        label = '{}{{{}}}'.format(name, ','.join(repr(p) for p in params))

        def expect(num):
            if len(params) != num:
                raise CatalogError(label, 'expected {} parameter(s)'.format(
                    num))

        if name == 'parabola_cap':
            expect(1)
            M = params[0]
            return cls(lambda s: M - s ** 2, lambda s: -2. * s, label=label,
                       limsup=-math.inf)
        elif name == 'rational_cap':
            expect(1)
            M = params[0]
            return cls(lambda s: M - s ** 2 / (1. + s ** 2),
                       lambda s: -2. * s / (1. + s ** 2) ** 2,
                       label=label, limsup=M - 1.)
        elif name == 'gauss_bump':
            expect(1)
            k0 = params[0]
            return cls(lambda s: k0 * np.exp(-s ** 2),
                       lambda s: -2. * s * k0 * np.exp(-s ** 2),
                       label=label, limsup=0., vanishes=(k0 == 0.))
        elif name == 'const':
            expect(1)
            v = params[0]
            return cls(lambda s: np.full_like(s, v),
                       lambda s: np.zeros_like(s), label=label, limsup=v,
                       vanishes=(v == 0.))
        elif name == 'poly':
            if not params:
                raise CatalogError(label, 'at least one coefficient needed')
            coeffs = np.trim_zeros(np.asarray(params), 'b')
            if not len(coeffs):
                coeffs = np.zeros(1)
            dcoeffs = np.polynomial.polynomial.polyder(coeffs)
            limsup = (float(coeffs[0]) if len(coeffs) == 1 else
                      (math.inf if len(coeffs) % 2 == 0 or coeffs[-1] > 0
                       else -math.inf))
            return cls(
                lambda s: np.polynomial.polynomial.polyval(s, coeffs),
                lambda s: np.polynomial.polynomial.polyval(s, dcoeffs),
                label=label, limsup=limsup,
                vanishes=not np.any(coeffs))

        raise CatalogError(label, 'unknown catalog entry')

    @classmethod
    def from_spec(cls, spec):
        """
        Build a function either from a catalog identifier
        :code:`name{p1,p2,...}` or from an expression in the variable
        :code:`s`.

        :param spec: Specification string or number
        :rtype: :py:class:`ScalarFunction`
        """
        if isinstance(spec, ScalarFunction):
            return spec
        if isinstance(spec, (int, float)):
            return cls.from_catalog('const', [spec])

        m = cls.CATALOG_PATTERN.match(spec)
        if m:
            name, raw = m.groups()
            params = [p for p in raw.split(',') if p.strip()]
            try:
                return cls.from_catalog(name, params)
            except ValueError as err:
                raise CatalogError(spec, err)

        from tubespectra.cli.expression import parse_expression
        expr = parse_expression(spec)
        return cls(expr, label=spec)

    def __repr__(self):
        return '<ScalarFunction({})>'.format(self.label)


ZERO = ScalarFunction.from_catalog('const', [0.])


# -----------------------------------------------------------------------------
class Interval(collections.namedtuple('Interval', ['a', 'b'])):
    """
    The interval :math:`I`; either bounded :math:`[a, b]` with
    :math:`a < 0 < b` or the whole real line.
    """

    __slots__ = ()

    @classmethod
    def whole_line(cls):
        return cls(-math.inf, math.inf)

    @property
    def bounded(self):
        return math.isfinite(self.a) and math.isfinite(self.b)

    @property
    def length(self):
        return self.b - self.a

    @property
    def halfwidth(self):
        return max(abs(self.a), abs(self.b))


class TubeGeometry:
    """
    Immutable tube data: curvature :math:`k`, torsion :math:`\\tau`,
    rotation angle :math:`\\alpha` and deformation :math:`h` over the
    interval :math:`I`.
    """

    def __init__(self, interval, h, k=ZERO, tau=ZERO, alpha=ZERO):
        if not isinstance(interval, Interval):
            interval = Interval(*interval)
        if not interval.a < 0 < interval.b:
            raise ArgumentError(
                'interval must contain 0 in its interior: {}'.format(
                    tuple(interval)))
        self.interval = interval
        self.h = ScalarFunction.from_spec(h)
        self.k = ScalarFunction.from_spec(k)
        self.tau = ScalarFunction.from_spec(tau)
        self.alpha = ScalarFunction.from_spec(alpha)

        self.M = float(self.h(0.))
        self.N = None if interval.bounded else estimate_limsup(self.h)

    @property
    def bounded(self):
        return self.interval.bounded

    def twist(self, s):
        """:math:`\\tau(s) + \\alpha'(s)`"""
        return self.tau(s) + self.alpha.derivative(s)

    def log_derivative(self, s):
        """:math:`h'(s) / h(s)`"""
        return self.h.derivative(s) / self.h(s)

    def z_alpha(self, s):
        """:math:`z_\\alpha = (\\cos\\alpha, -\\sin\\alpha)`"""
        a = self.alpha(s)
        return np.cos(a), -np.sin(a)

    def z_alpha_perp(self, s):
        """:math:`z_\\alpha^\\perp = (\\sin\\alpha, \\cos\\alpha)`"""
        a = self.alpha(s)
        return np.sin(a), np.cos(a)

    def straight(self, samples=None):
        """
        Whether the curvature vanishes identically (on the sampling grid
        unless known from the catalog).
        """
        if self.k.vanishes:
            return True
        s = sampling_grid(self.interval, samples)
        return bool(np.all(self.k(s) == 0.))

    def kh_sup(self, samples=None):
        """:math:`\\|k h\\|_\\infty` on the sampling grid."""
        s = sampling_grid(self.interval, samples)
        return float(np.max(np.abs(self.k(s) * self.h(s))))

    def __repr__(self):
        return ('<TubeGeometry(I={}, h={}, k={}, tau={}, alpha={})>'.format(
            tuple(self.interval), self.h.label, self.k.label,
            self.tau.label, self.alpha.label))


# -----------------------------------------------------------------------------
def sampling_grid(interval, samples=None):
    """
    Uniform sampling grid over :code:`interval` with geometric refinement
    towards :math:`s = 0`. The whole line is sampled on a wide window
    completed by far samples.
    """
    samples = samples or settings.GEOMETRY_VALIDATION_SAMPLES
    if interval.bounded:
        a, b = interval.a, interval.b
    else:
        a = -settings.GEOMETRY_UNBOUNDED_HALFWIDTH
        b = settings.GEOMETRY_UNBOUNDED_HALFWIDTH

    lo = settings.GEOMETRY_CONTACT_RANGE[0]
    refine = settings.GEOMETRY_REFINEMENT_SAMPLES
    parts = [np.linspace(a, b, samples),
             np.geomspace(lo, -a, refine) * -1.,
             np.geomspace(lo, b, refine),
             [0.]]
    if not interval.bounded:
        far = np.asarray(settings.GEOMETRY_LIMSUP_SAMPLES)
        parts.extend([far, -far])
    return np.unique(np.concatenate(parts))


def estimate_limsup(h):
    """
    Estimate :math:`N = \\limsup_{|s|\\to\\infty} h(s)`.

    The catalog value is used if known; otherwise :code:`h` is sampled at
    large :math:`|s|` and the maximum over the last two decades is taken.
    """
    if h.limsup is not None:
        return float(h.limsup)
    far = np.asarray(settings.GEOMETRY_LIMSUP_SAMPLES)
    values = np.concatenate([h(far[-2:]), h(-far[-2:])])
    return float(np.max(values))


def contact_profile(h, interval=None):
    """
    Estimate separately for :math:`s > 0` and :math:`s < 0` the contact
    order :math:`m` and coefficient :math:`c_\\pm` of the deformation at its
    maximum, :math:`M - h(s) \\approx c_\\pm |s|^m`, by log-log fits over
    small :math:`|s|`.

    :rtype: :py:class:`ContactProfile`
    """
    lo, hi = settings.GEOMETRY_CONTACT_RANGE
    if interval is not None:
        hi = min(hi, abs(interval.a), abs(interval.b))
    r = np.geomspace(lo, hi, 32)
    M = h(0.)
    retval = []
    for sign in (1., -1.):
        gap = M - h(sign * r)
        if np.all(gap > 0):
            fit = fit_rate(zip(r, gap))
            retval.extend([fit.slope, math.exp(fit.intercept)])
        else:
            retval.extend([None, None])
    return ContactProfile(*retval)


class ValidationReport(collections.namedtuple(
        'ValidationReport', ['valid', 'failed', 'M', 'N', 'min_h',
                             'log_derivative_sup', 'quadratic_coefficient',
                             'contact'])):
    """
    Outcome of :py:func:`validate_deformation`. :code:`failed` names the
    violated clauses (:code:`positivity`, :code:`maximum`,
    :code:`log_derivative`, :code:`quadratic_contact`, :code:`limsup`).
    """

    __slots__ = ()

    def summary(self):
        if self.valid:
            return 'deformation consistent with the hypotheses on h'
        return 'deformation violates: {}'.format(', '.join(self.failed))


def validate_deformation(h, interval, samples=None):
    """
    Check the hypotheses on the deformation :math:`h` on a sampling grid:
    positivity, a single global maximum at :math:`s = 0`, boundedness of
    :math:`h'/h`, quadratic contact :math:`M - s^2 + O(|s|^3)` and, for the
    whole line, :math:`\\limsup h < M`.

    :param h: Deformation
    :type h: :py:class:`ScalarFunction`
    :param interval: Interval
    :type interval: :py:class:`Interval`
    :param samples: Number of uniform samples
    :rtype: :py:class:`ValidationReport`
    """
    h = ScalarFunction.from_spec(h)
    if not isinstance(interval, Interval):
        interval = Interval(*interval)

    failed = []
    s = sampling_grid(interval, samples)
    values = h(s)
    M = float(h(0.))

    min_h = float(np.min(values))
    if not (np.all(np.isfinite(values)) and min_h > 0):
        failed.append('positivity')

    off = s != 0.
    if not np.all(values[off] < M):
        failed.append('maximum')

    with np.errstate(divide='ignore', invalid='ignore'):
        log_der = np.abs(h.derivative(s) / values)
    log_derivative_sup = float(np.max(log_der))
    if not math.isfinite(log_derivative_sup):
        failed.append('log_derivative')

    # (M - h(s)) / s^2 must tend to one; fitted by a quadratic in |s|
    lo, hi = settings.GEOMETRY_CONTACT_RANGE
    hi = min(hi, abs(interval.a), abs(interval.b))
    r = np.geomspace(lo, hi, 64)
    r_all = np.concatenate([r, -r])
    q = (M - h(r_all)) / r_all ** 2
    coeffs = np.polynomial.polynomial.polyfit(np.abs(r_all), q, 2)
    quadratic_coefficient = float(coeffs[0])
    if not abs(quadratic_coefficient - 1.) <= settings.GEOMETRY_QUADRATIC_TOL:
        failed.append('quadratic_contact')

    N = None
    if not interval.bounded:
        N = estimate_limsup(h)
        if not N < M:
            failed.append('limsup')

    try:
        contact = contact_profile(h, interval)
    except ArgumentError:
        contact = ContactProfile(None, None, None, None)

    return ValidationReport(not failed, tuple(failed), M, N, min_h,
                            log_derivative_sup, quadratic_coefficient,
                            contact)


# -----------------------------------------------------------------------------
def beta(g, s, y, eps):
    """
    Jacobian density
    :math:`\\beta_\\varepsilon(s, y) = 1 - \\varepsilon h(s) k(s)
    \\langle z_\\alpha(s), y \\rangle`.

    :param g: Geometry
    :type g: :py:class:`TubeGeometry`
    :param s: Arc length (scalar or array)
    :param y: Cross-section point; the last axis holds the two components
    :param float eps: Thickness parameter
    """
    y = np.asarray(y, dtype=float)
    c, sn = g.z_alpha(s)
    return 1. - eps * g.h(s) * g.k(s) * (c * y[..., 0] + sn * y[..., 1])


def epsilon_max(g, delta, rho_s, samples=None):
    """
    Largest :math:`\\varepsilon` with :math:`\\beta_\\varepsilon > \\delta`
    on :math:`I \\times S`: :math:`(1 - \\delta) / (\\|kh\\|_\\infty
    \\rho_S)`; :code:`math.inf` for a straight tube.

    :raises ArgumentError: if :code:`delta` is not in :math:`(0, 1)`
    """
    if not 0. < delta < 1.:
        raise ArgumentError('delta={} not in (0, 1)'.format(delta))
    if rho_s <= 0:
        raise ArgumentError('rho_S={} must be positive'.format(rho_s))
    if g.k.vanishes:
        return math.inf
    kh = g.kh_sup(samples)
    if kh == 0.:
        return math.inf
    return (1. - delta) / (kh * rho_s)


def jacobian(g, s, y, eps):
    """
    Jacobian :math:`J` of the straightening map in the Frenet frame.

    :raises SingularJacobian: if :math:`\\beta_\\varepsilon \\le 0`
    """
    y1, y2 = float(y[0]), float(y[1])
    b = float(beta(g, s, (y1, y2), eps))
    if b <= 0:
        raise SingularJacobian(b, s, (y1, y2))

    h, dh, twist = g.h(s), g.h.derivative(s), g.twist(s)
    za = g.z_alpha(s)
    zp = g.z_alpha_perp(s)
    za_y = za[0] * y1 + za[1] * y2
    zp_y = zp[0] * y1 + zp[1] * y2
    a = g.alpha(s)
    ca, sa = math.cos(a), math.sin(a)

    return np.array([
        [b, -eps * h * twist * zp_y + eps * dh * za_y,
         eps * h * twist * za_y + eps * dh * zp_y],
        [0., eps * h * ca, eps * h * sa],
        [0., -eps * h * sa, eps * h * ca]])


def jacobian_inverse(g, s, y, eps):
    """
    Inverse of :py:func:`jacobian` in closed form.

    :raises SingularJacobian: if :math:`\\beta_\\varepsilon \\le 0`
    """
    y1, y2 = float(y[0]), float(y[1])
    b = float(beta(g, s, (y1, y2), eps))
    if b <= 0:
        raise SingularJacobian(b, s, (y1, y2))

    h, twist = g.h(s), g.twist(s)
    ld = g.log_derivative(s)
    a = g.alpha(s)
    ca, sa = math.cos(a), math.sin(a)

    return np.array([
        [1. / b, (twist * y2 - ld * y1) / b, (-twist * y1 - ld * y2) / b],
        [0., ca / (eps * h), -sa / (eps * h)],
        [0., sa / (eps * h), ca / (eps * h)]])


# -----------------------------------------------------------------------------
def frenet_from_curve(r_samples):
    """
    Frenet frames of a curve sampled on a uniform arc length grid, by
    finite differences.

    Where the curvature falls below
    :py:data:`settings.GEOMETRY_CURVATURE_FLOOR` the normal, binormal and
    torsion are undefined and reported as :code:`None`.

    :param r_samples: Sequence of :code:`(s, r(s))` tuples
    :rtype: list of :py:class:`FrameSample`
    """
    s = np.array([p[0] for p in r_samples], dtype=float)
    r = np.array([p[1] for p in r_samples], dtype=float)
    if len(s) < 5:
        raise ArgumentError('at least 5 curve samples required')
    steps = np.diff(s)
    ds = float(steps.mean())
    if not np.allclose(steps, ds, rtol=1e-8, atol=0):
        raise ArgumentError('curve samples must be uniform in arc length')

    dr = np.gradient(r, ds, axis=0, edge_order=2)
    T = dr / np.linalg.norm(dr, axis=1)[:, None]
    dT = np.gradient(T, ds, axis=0, edge_order=2)
    k = np.linalg.norm(dT, axis=1)

    defined = k >= settings.GEOMETRY_CURVATURE_FLOOR
    N = np.zeros_like(T)
    N[defined] = dT[defined] / k[defined, None]
    B = np.cross(T, N)
    dB = np.gradient(B, ds, axis=0, edge_order=2)
    # B' = -tau N
    tau = -np.einsum('ij,ij->i', dB, N)

    frames = []
    for i in range(len(s)):
        if defined[i]:
            frames.append(FrameSample(s[i], T[i], N[i], B[i], float(k[i]),
                                      float(tau[i])))
        else:
            frames.append(FrameSample(s[i], T[i], None, None, float(k[i]),
                                      None))
    return frames


def frenet_from_parametric(curve, s_grid):
    """
    Sample a unit speed curve :code:`curve(s) -> 3-vector` on
    :code:`s_grid` and delegate to :py:func:`frenet_from_curve`.
    """
    return frenet_from_curve([(s, np.asarray(curve(s), dtype=float))
                              for s in s_grid])


def torsion_gaps(frames):
    """Arc lengths at which the torsion is undefined."""
    return [f.s for f in frames if f.tau is None]


def compare_frames(frames, g):
    """
    Maximum deviation of sampled curvature and torsion from the declared
    scalar functions of :code:`g`.

    :returns: :code:`(max |k - g.k|, max |tau - g.tau|)`; the torsion
        deviation is :code:`None` if it is undefined everywhere
    """
    dk = max(abs(f.k - g.k(f.s)) for f in frames)
    dtau = [abs(f.tau - g.tau(f.s)) for f in frames if f.tau is not None]
    return dk, (max(dtau) if dtau else None)
