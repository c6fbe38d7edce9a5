# -*- coding: utf-8 -*-
"""
The effective one dimensional operators: the potential :math:`W_\\varepsilon`,
:math:`T_{\\varepsilon,c} = -d^2/ds^2 + W_\\varepsilon` with Dirichlet or
Neumann ends, its dilation :math:`\\hat{T}_{\\varepsilon,c}` and the weakly
effective operator :math:`T = -d^2/ds^2 + (2\\lambda_0/M^3) s^2`.

Reported quantities have the shift :math:`c` removed; it only enters to keep
the operators positive.
"""

import collections
import csv
import logging
import math
import warnings

import numpy as np

from tubespectra import settings
from tubespectra.spectral.geometry import Interval, sampling_grid
from tubespectra.spectral.numerics import (ArgumentError, TridiagonalMatrix,
                                           richardson_limit, tridiag_smallest)
from tubespectra.utils.error import Error, ExitCodes


logger = logging.getLogger('tubespectra.spectral.effective1d')


# -----------------------------------------------------------------------------
class Effective1DError(Error):
    """Effective operator error ({})."""


class GuardViolation(Effective1DError):
    """Guard on zeta violated: min zeta={} <= delta={} at eps={}."""
    exit_code = ExitCodes.EXIT_ERROR


class WindowError(Effective1DError):
    """No truncation window up to L={} for eps={}, j={}; raise the cap."""
    exit_code = ExitCodes.EXIT_ERROR


class CoarseGridWarning(UserWarning):
    """The s-grid does not resolve the potential well."""


class DomainTooSmallWarning(UserWarning):
    """Eigenfunction tails do not decay inside the truncation window."""


# -----------------------------------------------------------------------------
class WEOSpec(collections.namedtuple('WEOSpec', ['lambda0', 'M'])):
    """
    Weakly effective operator :math:`-u'' + \\kappa s^2 u` with spring
    constant :math:`\\kappa = 2 \\lambda_0 / M^3`.
    """

    __slots__ = ()

    @property
    def kappa(self):
        return 2. * self.lambda0 / self.M ** 3

    def mu(self, j):
        return (2 * j + 1) * math.sqrt(self.kappa)


class EffectivePotential:
    """
    Samples of :math:`\\vartheta`, :math:`\\zeta_\\varepsilon` and
    :math:`W_\\varepsilon` on a uniform s-grid.
    """

    def __init__(self, s, theta, zeta, W, c, eps, window):
        self.s = s
        self.theta = theta
        self.zeta = zeta
        self.W = W
        self.c = float(c)
        self.eps = float(eps)
        self.window = window

    @property
    def step(self):
        return float(self.s[1] - self.s[0])

    def __len__(self):
        return len(self.s)


class Operator1D:
    """
    Symmetric tridiagonal discretization of :math:`T_{\\varepsilon,c}` (or
    of :math:`\\hat{T}_{\\varepsilon,c}` if :code:`dilated`).
    """

    def __init__(self, potential, bc, matrix, step, dilated=False,
                 warnings=()):
        self.potential = potential
        self.bc = bc
        self.matrix = matrix
        self.step = step
        self.dilated = dilated
        self.warnings = list(warnings)

    @property
    def n(self):
        return self.matrix.n

    @property
    def c(self):
        return self.potential.c

    @property
    def eps(self):
        return self.potential.eps

    def __repr__(self):
        return '<Operator1D(n={}, bc={}, eps={!r}, dilated={})>'.format(
            self.n, self.bc, self.eps, self.dilated)


# -----------------------------------------------------------------------------
def theta(g, consts, s):
    """
    :math:`\\vartheta = C_1 (\\tau + \\alpha')^2 + (C_2 - 1)(h'/h)^2 -
    2 C_3 (\\tau + \\alpha') h'/h`
    """
    t = g.twist(s)
    ld = g.log_derivative(s)
    return consts.C1 * t ** 2 + (consts.C2 - 1.) * ld ** 2 - \
        2. * consts.C3 * t * ld


def zeta(g, consts, s, eps):
    """
    :math:`\\zeta_\\varepsilon = 1 - \\varepsilon k h \\langle z_\\alpha,
    F \\rangle`; independent of :math:`y`.
    """
    c, sn = g.z_alpha(s)
    F1, F2 = consts.F
    return 1. - eps * g.k(s) * g.h(s) * (c * F1 + sn * F2)


def c_constant(g, consts, s_grid):
    """
    :math:`c = \\max|\\vartheta| + \\max(k^2/4) / M^2 + 1` over the grid.
    """
    s_grid = np.asarray(s_grid, dtype=float)
    th = np.abs(theta(g, consts, s_grid))
    k2 = np.asarray(g.k(s_grid)) ** 2 / 4.
    return float(np.max(th) + np.max(k2) / g.M ** 2 + 1.)


def potential_W(g, consts, lambda0, s, eps, c):
    """
    :math:`W_\\varepsilon = \\vartheta + c + \\zeta_\\varepsilon
    (\\lambda_0 / (\\varepsilon^2 h^2) - \\lambda_0 / (\\varepsilon^2 M^2))`
    """
    h = g.h(s)
    well = lambda0 / eps ** 2 * (1. / h ** 2 - 1. / g.M ** 2)
    return theta(g, consts, s) + c + zeta(g, consts, s, eps) * well


def check_guard(g, consts, eps, delta=settings.EFFECTIVE_ZETA_GUARD,
                s_grid=None):
    """
    :raises GuardViolation: if :math:`\\zeta_\\varepsilon \\le \\delta`
        somewhere on the grid
    """
    if s_grid is None:
        s_grid = sampling_grid(g.interval)
    z = np.asarray(zeta(g, consts, np.asarray(s_grid), eps))
    z_min = float(np.min(z))
    if not z_min > delta:
        raise GuardViolation(z_min, delta, eps)
    return z_min


# -----------------------------------------------------------------------------
def grid_size(length, eps, resolution=settings.EFFECTIVE_RESOLUTION):
    """
    Odd number of interior nodes with :math:`\\Delta s \\le
    \\sqrt{\\varepsilon} / \\mathrm{resolution}` and at least
    :py:data:`settings.EFFECTIVE_N_MIN` nodes.
    """
    n = int(math.ceil(length * resolution / math.sqrt(eps))) - 1
    n = max(n, settings.EFFECTIVE_N_MIN)
    return n if n % 2 else n + 1


def s_nodes(window, n, bc):
    """
    Nodes of the uniform s-grid: :code:`n` interior nodes with
    :math:`\\Delta s = |I| / (n + 1)`; Neumann grids add both end points.
    """
    a, b = window
    step = (b - a) / (n + 1)
    if bc == 'dirichlet':
        return a + step * np.arange(1, n + 1), step
    return a + step * np.arange(0, n + 2), step


def _laplacian(size, step, bc):
    diag = np.full(size, 2. / step ** 2)
    off = np.full(size - 1, -1. / step ** 2)
    if bc == 'neumann':
        # mirror ghost nodes, symmetrized with the half end weights
        off[0] = off[-1] = -math.sqrt(2.) / step ** 2
    return diag, off


def _resolve_window(g, window):
    if window is None:
        if not g.bounded:
            raise ArgumentError('unbounded interval needs a window')
        window = g.interval
    if not isinstance(window, Interval):
        window = Interval(*window)
    if not window.bounded or not window.a < 0 < window.b:
        raise ArgumentError('invalid window {}'.format(tuple(window)))
    return window


def _potential(g, consts, lambda0, eps, window, n, bc, c, delta,
               n_min=settings.EFFECTIVE_N_MIN):
    if bc not in settings.EFFECTIVE_BC_CHOICES:
        raise ArgumentError('unknown boundary condition {!r}'.format(bc))
    if n < n_min:
        raise ArgumentError('n={} below {}'.format(n, n_min))
    s, step = s_nodes(window, n, bc)
    z = np.asarray(zeta(g, consts, s, eps))
    z_min = float(np.min(z))
    if not z_min > delta:
        raise GuardViolation(z_min, delta, eps)
    if c is None:
        c = c_constant(g, consts, s)
    th = np.asarray(theta(g, consts, s))
    W = np.asarray(potential_W(g, consts, lambda0, s, eps, c))
    return EffectivePotential(s, th, z, W, c, eps, window), step


def _coarse_check(step, eps):
    limit = math.sqrt(eps) / settings.EFFECTIVE_COARSE
    if step > limit:
        msg = ('s-grid step {:.6g} exceeds sqrt(eps)/{} = {:.6g}'.format(
            step, settings.EFFECTIVE_COARSE, limit))
        warnings.warn(msg, CoarseGridWarning)
        return [msg]
    return []


def assemble_T(g, consts, lambda0, eps, window=None, n=None,
               bc='dirichlet', c=None, delta=settings.EFFECTIVE_ZETA_GUARD,
               n_min=settings.EFFECTIVE_N_MIN):
    """
    Assemble :math:`T_{\\varepsilon,c}` by 3-point finite differences.

    :param g: Geometry
    :type g: :py:class:`tubespectra.spectral.geometry.TubeGeometry`
    :param consts: Section constants
    :param float lambda0: Lowest section eigenvalue
    :param float eps: Thickness parameter
    :param window: Bounded window; the interval of :code:`g` if
        :code:`None`
    :param n: Number of interior nodes; chosen by :py:func:`grid_size` if
        :code:`None`
    :param str bc: :code:`'dirichlet'` or :code:`'neumann'`
    :param c: Positivity shift; :py:func:`c_constant` on the grid if
        :code:`None`
    :param float delta: Guard on :math:`\\zeta_\\varepsilon`
    :param int n_min: Smallest admissible :code:`n`; comparisons on a
        given 3D s-grid lower it
    :rtype: :py:class:`Operator1D`
    :raises GuardViolation: if :math:`\\zeta_\\varepsilon \\le \\delta`
    """
    window = _resolve_window(g, window)
    if n is None:
        n = grid_size(window.length, eps)
    pot, step = _potential(g, consts, lambda0, eps, window, n, bc, c, delta,
                           n_min=n_min)
    diag, off = _laplacian(len(pot), step, bc)
    matrix = TridiagonalMatrix(diag + pot.W, off)
    op = Operator1D(pot, bc, matrix, step,
                    warnings=_coarse_check(step, eps))
    logger.debug('Assembled %r (c=%r, step=%r).', op, pot.c, step)
    return op


def assemble_scaled(g, consts, lambda0, eps, window=None, n=None,
                    bc='dirichlet', c=None,
                    delta=settings.EFFECTIVE_ZETA_GUARD):
    """
    Assemble :math:`\\hat{T}_{\\varepsilon,c} = -d^2/d\\sigma^2 +
    \\varepsilon W_\\varepsilon(\\sqrt{\\varepsilon}\\sigma)` on the dilated
    window :math:`I_\\varepsilon = \\varepsilon^{-1/2} I`.

    The nodes are the images of the nodes of :py:func:`assemble_T` with the
    same arguments.
    """
    window = _resolve_window(g, window)
    if n is None:
        n = grid_size(window.length, eps)
    pot, step = _potential(g, consts, lambda0, eps, window, n, bc, c, delta)
    sigma_step = step / math.sqrt(eps)
    diag, off = _laplacian(len(pot), sigma_step, bc)
    matrix = TridiagonalMatrix(diag + eps * pot.W, off)
    return Operator1D(pot, bc, matrix, sigma_step, dilated=True,
                      warnings=_coarse_check(step, eps))


def spectrum(op, j_max, tol=settings.NUMERICS_EIGEN_TOL):
    """
    The eigenpairs :math:`j = 0, \\ldots, j_{max}` of the assembled matrix.

    :raises ArgumentError: if :code:`j_max` exceeds the dimension
    """
    if j_max < 0 or j_max + 1 > op.n:
        raise ArgumentError('j_max={} out of range for dimension {}'.format(
            j_max, op.n))
    return tridiag_smallest(op.matrix, j_max + 1, tol=tol)


def scaled_spectrum(op, j_max, tol=settings.NUMERICS_EIGEN_TOL):
    """
    :math:`\\varepsilon (l_j(T_{\\varepsilon,c}) - c) =
    l_j(\\hat{T}_{\\varepsilon,c}) - \\varepsilon c` for
    :math:`j \\le j_{max}`.

    :rtype: list of float
    """
    values = [p.value for p in spectrum(op, j_max, tol=tol)]
    if op.dilated:
        return [v - op.eps * op.c for v in values]
    return [op.eps * (v - op.c) for v in values]


# -----------------------------------------------------------------------------
def weo_spectrum_exact(spec, j_max):
    """:math:`\\mu_j = (2j + 1) \\sqrt{2 \\lambda_0 / M^3}`"""
    return [spec.mu(j) for j in range(j_max + 1)]


def weo_spectrum_numeric(spec, L, n, j_max, tol=settings.NUMERICS_EIGEN_TOL):
    """
    Finite difference eigenvalues of :math:`-u'' + \\kappa \\sigma^2 u` on
    :math:`[-L, L]` with Dirichlet ends and :code:`n` interior nodes.

    A :py:class:`DomainTooSmallWarning` is issued if an eigenvector is not
    negligible (relative :code:`1e-8`) at the ends.

    :raises ArgumentError: if :math:`\\kappa L^2 \\le 10 \\mu_{j_{max}}`
    """
    kappa = spec.kappa
    if not kappa * L ** 2 > 10. * spec.mu(j_max):
        raise ArgumentError(
            'window L={} too small: kappa*L^2={:.6g} <= 10*mu_{}'.format(
                L, kappa * L ** 2, j_max))
    s, step = s_nodes((-L, L), n, 'dirichlet')
    diag, off = _laplacian(n, step, 'dirichlet')
    pairs = tridiag_smallest(TridiagonalMatrix(diag + kappa * s ** 2, off),
                             j_max + 1, tol=tol)
    for j, p in enumerate(pairs):
        v = np.abs(p.vector)
        tail = max(v[0], v[-1]) / v.max()
        if tail > settings.EFFECTIVE_TAIL_TOL:
            warnings.warn('eigenvector {} has relative tail {:.3g} at '
                          'L={}'.format(j, tail, L), DomainTooSmallWarning)
    return [p.value for p in pairs]


def weo_spectrum_extrapolated(spec, L, n, j_max,
                              tol=settings.NUMERICS_EIGEN_TOL):
    """
    Richardson extrapolation (order two) of
    :py:func:`weo_spectrum_numeric` over the grids with :code:`n` and
    :code:`2n + 1` interior nodes (halved step).
    """
    coarse = weo_spectrum_numeric(spec, L, n, j_max, tol=tol)
    fine = weo_spectrum_numeric(spec, L, 2 * n + 1, j_max, tol=tol)
    return [richardson_limit([2., 1.], [lc, lf], order=2.)
            for lc, lf in zip(coarse, fine)]


# -----------------------------------------------------------------------------
def auto_window(g, consts, lambda0, eps, target_j, c=None,
                cap=settings.EFFECTIVE_WINDOW_CAP,
                margin=settings.EFFECTIVE_WINDOW_MARGIN):
    """
    Smallest symmetric window :math:`[-L, L]` (on a geometric scan) with
    :math:`\\varepsilon (W_\\varepsilon(\\pm L) - c) > m \\mu_{target}` for the
    margin :math:`m`. Bounded intervals are returned unchanged.

    :raises WindowError: if no window up to :code:`cap` qualifies
    """
    if g.bounded:
        return g.interval
    if c is None:
        c = c_constant(g, consts, sampling_grid(g.interval))
    target = margin * WEOSpec(lambda0, g.M).mu(target_j)

    L = settings.EFFECTIVE_WINDOW_START
    while L <= cap:
        ends = np.array([-L, L])
        W = np.asarray(potential_W(g, consts, lambda0, ends, eps, c))
        # measured above the positivity shift; the window ignores c
        if np.min(eps * (W - c)) > target:
            logger.debug('Window L=%r for eps=%r, j=%d.', L, eps, target_j)
            return Interval(-L, L)
        L *= settings.EFFECTIVE_WINDOW_GROWTH
    raise WindowError(cap, eps, target_j)


def doubled_window(window):
    return Interval(2. * window.a, 2. * window.b)


# -----------------------------------------------------------------------------
def export_potential(potential, path):
    """
    Write the potential samples as CSV with the columns
    :code:`s, theta, zeta, W`.
    """
    fmt = settings.TUBESPECTRA_FLOAT_FORMAT
    try:
        with open(path, 'w', newline='') as ofd:
            writer = csv.writer(ofd, lineterminator='\n')
            writer.writerow(['s', 'theta', 'zeta', 'W'])
            for row in zip(potential.s, potential.theta, potential.zeta,
                           potential.W):
                writer.writerow([fmt % v for v in row])
    except OSError as err:
        raise Effective1DError('cannot write {!r}: {}'.format(path, err))
