# -*- coding: utf-8 -*-
"""
The straightened quadratic forms :math:`g_\\varepsilon` and
:math:`\\hat{g}_\\varepsilon` on a tensor grid over :math:`I \\times S`, their
low eigenvalues and the resolvent witnesses comparing them with each other
and with the effective one dimensional operator.

The longitudinal part is assembled as :math:`D^T Q D` where

.. math::

    Dv = v' - \\frac{h'}{h}(v + \\nabla_y v \\cdot y) +
    (\\tau + \\alpha') \\nabla_y v \\cdot Ry

is evaluated at the midpoints of the s-grid links and :math:`Q` holds the
link quadrature weights (divided by :math:`\\beta_\\varepsilon` for
:math:`\\hat{g}_\\varepsilon`). Transverse blocks reuse the weighted section
assembly slab by slab.
"""

import logging

import numpy as np
import scipy.sparse as sp

from tubespectra import settings
from tubespectra.harness.report import ConvergenceReport, Failure, ReportRow
from tubespectra.spectral import effective1d
from tubespectra.spectral.cross_section import (SectionGrid, SectionSolver,
                                                constants, rotation_operators,
                                                weighted_form)
from tubespectra.spectral.geometry import Interval, SingularJacobian
from tubespectra.spectral.numerics import (ArgumentError, SparseSymmetric,
                                           fit_rate, quadrature_weights,
                                           sparse_smallest)
from tubespectra.utils import ordered_map, thread_count
from tubespectra.utils.error import Error


# -----------------------------------------------------------------------------
class Tube3DError(Error):
    """Three-dimensional form error ({})."""


# -----------------------------------------------------------------------------
class Grid3D:
    """
    Tensor grid of a uniform s-grid and a section grid. Unknowns are
    numbered :code:`i * P + p` for s-node :code:`i` and section node
    :code:`p`.
    """

    def __init__(self, window, n_s, section, bc='dirichlet'):
        if not isinstance(window, Interval):
            window = Interval(*window)
        if not window.bounded:
            raise ArgumentError('3D grids need a bounded window')
        if bc not in settings.EFFECTIVE_BC_CHOICES:
            raise ArgumentError('unknown boundary condition {!r}'.format(bc))
        if n_s < 2:
            raise ArgumentError('n_s={} too small'.format(n_s))

        self.window = window
        self.n_s = int(n_s)
        self.bc = bc
        self.section = section
        self.s, self.step = effective1d.s_nodes(window, n_s, bc)
        self.weights = quadrature_weights(len(self.s), self.step,
                                          closed=(bc == 'neumann'))
        # n_s + 1 links in both cases; Dirichlet links touch the ends
        self.s_mid = window.a + self.step * (0.5 + np.arange(n_s + 1))

    @property
    def n_nodes(self):
        return len(self.s)

    @property
    def size(self):
        return self.n_nodes * self.section.size

    def index(self, i, p):
        return i * self.section.size + p

    def link_operators(self):
        """
        Forward difference and average from nodes to link midpoints;
        Dirichlet end values are zero.
        """
        n_links = self.n_s + 1
        offset = 1 if self.bc == 'dirichlet' else 0
        rows, cols, diff, avg = [], [], [], []
        for link in range(n_links):
            for node, sign in ((link - offset, -1.), (link + 1 - offset, 1.)):
                if 0 <= node < self.n_nodes:
                    rows.append(link)
                    cols.append(node)
                    diff.append(sign / self.step)
                    avg.append(.5)
        shape = (n_links, self.n_nodes)
        return (sp.csr_matrix((diff, (rows, cols)), shape=shape),
                sp.csr_matrix((avg, (rows, cols)), shape=shape))

    def __repr__(self):
        return '<Grid3D(n_s={}, bc={}, section={!r}, size={})>'.format(
            self.n_s, self.bc, self.section, self.size)


class AssembledForm:
    """
    A discretized quadratic form with its diagonal mass.

    :param str kind: :code:`'g'` or :code:`'ghat'`
    """

    def __init__(self, kind, stiffness, grid, modes, g, eps, c, d):
        self.kind = kind
        self.stiffness = stiffness
        self.grid = grid
        self.modes = modes
        self.geometry = g
        self.eps = eps
        self.c = c
        self.d = d

    @property
    def mass_diag(self):
        return self.stiffness.mass_diag

    @property
    def n(self):
        return self.stiffness.n

    def __repr__(self):
        return '<AssembledForm({}, n={}, nnz={}, eps={!r}, c={!r})>'.format(
            self.kind, self.n, self.stiffness.nnz, self.eps, self.c)


# -----------------------------------------------------------------------------
class FormAssembler:
    """
    Assembles :math:`g_\\varepsilon` and :math:`\\hat{g}_\\varepsilon`.
    """

    LOGGER = 'tubespectra.spectral.tube3d.assembler'

    def __init__(self, g, modes, grid):
        self.logger = logging.getLogger(self.LOGGER)
        if modes.grid is not grid.section:
            raise ArgumentError('modes must live on the section grid')
        self.g = g
        self.modes = modes
        self.grid = grid

    def _beta(self, s, eps):
        g = self.g
        sec = self.grid.section
        c, sn = g.z_alpha(s)
        scale = eps * np.asarray(g.h(s)) * np.asarray(g.k(s))
        return (1. - np.outer(scale * c, sec.y1) -
                np.outer(scale * sn, sec.y2))

    def _check_beta(self, values, s, eps):
        if values.min() <= 0:
            i, p = np.unravel_index(np.argmin(values), values.shape)
            sec = self.grid.section
            raise SingularJacobian(float(values[i, p]), float(s[i]),
                                   (float(sec.y1[p]), float(sec.y2[p])))

    def assemble(self, eps, c, curved):
        g, grid, modes = self.g, self.grid, self.modes
        sec = grid.section
        P = sec.size
        cell = sec.cell

        beta_nodes = self._beta(grid.s, eps)
        beta_mid = self._beta(grid.s_mid, eps)
        self._check_beta(beta_nodes, grid.s, eps)
        self._check_beta(beta_mid, grid.s_mid, eps)
        w_nodes = beta_nodes if curved else np.ones_like(beta_nodes)
        w_mid = beta_mid if curved else np.ones_like(beta_mid)

        # longitudinal D^T Q D
        s_diff, s_avg = grid.link_operators()
        rot, radial = rotation_operators(sec)
        eye = sp.identity(P, format='csr')
        ld = np.asarray(g.log_derivative(grid.s_mid))
        twist = np.asarray(g.twist(grid.s_mid))
        D = (sp.kron(s_diff, eye) +
             sp.kron(sp.diags(-ld) @ s_avg, eye + radial) +
             sp.kron(sp.diags(twist) @ s_avg, rot)).tocsr()
        q = (grid.step * cell / w_mid).ravel()
        A = (D.T @ sp.diags(q) @ D).tocsr()

        # transverse blocks beta / (eps^2 h^2) |grad_y v|^2
        h_nodes = np.asarray(g.h(grid.s))
        za1, za2 = g.z_alpha(grid.s)
        scale = eps * h_nodes * np.asarray(g.k(grid.s))
        blocks = []
        for i in range(grid.n_nodes):
            a1, a2 = scale[i] * za1[i], scale[i] * za2[i]

            def weight(y1, y2, a1=a1, a2=a2):
                return 1. - (a1 * y1 + a2 * y2)

            upper, _ = weighted_form(sec, weight)
            full = upper + sp.triu(upper, k=1).T
            blocks.append(full * (grid.weights[i] /
                                  (eps ** 2 * h_nodes[i] ** 2)))
        A = A + sp.block_diag(blocks, format='csr')

        # zeroth order terms and mass
        nodal = grid.weights[:, None] * cell
        lam = modes.lambda0 / (eps ** 2 * g.M ** 2)
        zeroth = nodal * (-lam * beta_nodes + c * w_nodes)
        A = A + sp.diags(zeroth.ravel())
        mass = (nodal * w_nodes).ravel()

        stiffness = SparseSymmetric.from_matrix(A, mass_diag=mass)
        consts = constants(modes)
        d = c - coercivity_offset(g, consts, grid.s)
        form = AssembledForm('ghat' if curved else 'g', stiffness, grid,
                             modes, g, eps, c, d)
        self.logger.debug('Assembled %r.', form)
        return form


def coercivity_offset(g, consts, s):
    """:math:`\\max|\\vartheta| + \\max k^2 / (4 M^2)` over :code:`s`."""
    th = np.abs(np.asarray(effective1d.theta(g, consts, s)))
    k2 = np.asarray(g.k(s)) ** 2 / 4.
    return float(th.max() + k2.max() / g.M ** 2)


def assemble_g(g, modes, grid, eps, c):
    """
    Assemble :math:`g_\\varepsilon`: unit longitudinal weight, transverse
    weight :math:`\\beta_\\varepsilon / (\\varepsilon^2 h^2)`, zeroth order
    term :math:`-\\lambda_0 \\beta_\\varepsilon / (\\varepsilon^2 M^2) + c`
    and plain cell masses.

    :param g: Geometry
    :param modes: Section modes on :code:`grid.section`
    :param grid: Tensor grid
    :type grid: :py:class:`Grid3D`
    :param float eps: Thickness parameter
    :param float c: Positivity shift
    :rtype: :py:class:`AssembledForm`
    :raises SingularJacobian: if :math:`\\beta_\\varepsilon \\le 0` at a
        node
    """
    return FormAssembler(g, modes, grid).assemble(eps, c, curved=False)


def assemble_ghat(g, modes, grid, eps, c):
    """
    Assemble :math:`\\hat{g}_\\varepsilon` in
    :math:`L^2(I \\times S, \\beta_\\varepsilon)`: longitudinal weight
    :math:`1/\\beta_\\varepsilon`, zeroth order term
    :math:`(-\\lambda_0 / (\\varepsilon^2 M^2) + c) \\beta_\\varepsilon` and
    :math:`\\beta_\\varepsilon` weighted masses.
    """
    return FormAssembler(g, modes, grid).assemble(eps, c, curved=True)


def spectrum3d(form, count, tol=settings.NUMERICS_EIGEN_TOL):
    """Smallest eigenpairs of the generalized problem of a form."""
    return sparse_smallest(form.stiffness, count, tol=tol)


# -----------------------------------------------------------------------------
def export_coordinate(form, path, mass_path=None):
    """
    Write the stiffness in coordinate text format: a header line
    :code:`n nnz` followed by one :code:`row col value` line per stored
    upper triangle entry (0-based indices, 17 significant digits). The mass
    diagonal is optionally written in the same format.
    """
    def dump(fpath, n, entries):
        entries = list(entries)
        with open(fpath, 'w') as ofd:
            ofd.write('{} {}\n'.format(n, len(entries)))
            for row, col, value in entries:
                ofd.write('{} {} {}\n'.format(row, col, '%.17g' % value))

    try:
        dump(path, form.n, form.stiffness.entries())
        if mass_path:
            dump(mass_path, form.n,
                 ((i, i, float(m)) for i, m in enumerate(form.mass_diag)))
    except OSError as err:
        raise Tube3DError('cannot write {!r}: {}'.format(path, err))


def subspace_form_value(form, w):
    """
    Evaluate the assembled form at :math:`v = w(s) u_0(y)` and the
    quadratic form of :math:`T_{\\varepsilon,c}` at :math:`w` on the same
    s-grid.

    :param form: Form assembled by :py:func:`assemble_g`
    :param w: Nodal values on :code:`form.grid.s`
    :returns: :code:`(value_3d, value_1d)`
    """
    grid = form.grid
    w = np.asarray(w, dtype=float)
    if w.shape != (grid.n_nodes,):
        raise ArgumentError('w must have {} entries'.format(grid.n_nodes))
    v = np.kron(w, form.modes.u0)
    value_3d = float(v @ (form.stiffness.matrix @ v))

    consts = constants(form.modes)
    op = effective1d.assemble_T(form.geometry, consts, form.modes.lambda0,
                                form.eps, window=grid.window, n=grid.n_s,
                                bc=grid.bc, c=form.c, delta=0.,
                                n_min=2)
    ws = np.sqrt(grid.weights) * w
    value_1d = float(ws @ op.matrix.matvec(ws))
    return value_3d, value_1d


# -----------------------------------------------------------------------------
class ResolventStudy:
    """
    Eigenvalue witnesses of the resolvent bounds: for every
    :math:`\\varepsilon` the differences
    :math:`|l_j(\\hat{G}_\\varepsilon)^{-1} - l_j(X)^{-1}|` with :math:`X`
    either :math:`T_{\\varepsilon,c}` (:code:`'reduction'`) or
    :math:`G_\\varepsilon` (:code:`'forms'`), each recomputed on a coarser
    grid to estimate the discretization spread. Without :code:`n_s` the
    s-grid is sized per sweep by :py:meth:`auto_n_s`.

    The witnesses bound the resolvent norm differences from below; they do
    not prove the norm inequalities.
    """

    LOGGER = 'tubespectra.spectral.tube3d.study'

    KINDS = ('reduction', 'forms')

    def __init__(self, g, domain, n_s=None, n_y=settings.TUBE3D_N_Y,
                 boundary=settings.SECTION_BOUNDARY_DEFAULT,
                 bc='dirichlet', delta=settings.EFFECTIVE_ZETA_GUARD,
                 ratio=settings.TUBE3D_REFINEMENT_RATIO, threads=1,
                 tol=settings.NUMERICS_EIGEN_TOL):
        self.logger = logging.getLogger(self.LOGGER)
        if not g.bounded:
            raise ArgumentError('3D studies need a bounded interval')
        self.g = g
        self.domain = domain
        self.boundary = boundary
        self.bc = bc
        self.delta = delta
        self.threads = threads
        self.tol = tol
        self.n_s = n_s
        self.n_y = n_y
        self.ratio = ratio
        self.resolutions = None
        if n_s is not None:
            self.resolutions = self.resolutions_for(n_s)
        self._setups = {}

    def resolutions_for(self, n_s):
        """
        Primary and coarse :code:`(n_s, n_y)` pairs.
        """
        return [(n_s, self.n_y), (
            max(2, int(round(self.ratio * n_s))),
            max(settings.SECTION_N_MIN, int(round(self.ratio * self.n_y))))]

    def auto_n_s(self, epsilons):
        """
        Number of s-nodes keeping :math:`\\Delta s \\le
        \\sqrt{\\varepsilon_{min}} / \\mathrm{resolution}` for the smallest
        :math:`\\varepsilon` of the sweep, at least
        :py:data:`settings.TUBE3D_N_S`.
        """
        return max(settings.TUBE3D_N_S, effective1d.grid_size(
            self.g.interval.length, min(epsilons),
            resolution=settings.TUBE3D_RESOLUTION))

    @classmethod
    def from_config(cls, cfg):
        return cls(cfg.geometry, cfg.section.domain, n_s=cfg.tube3d.n_s,
                   n_y=cfg.tube3d.n_y, boundary=cfg.section.boundary,
                   bc=cfg.bc, delta=cfg.delta,
                   ratio=cfg.tube3d.refinement_ratio,
                   threads=thread_count(cfg.threads))

    def setup(self, n_s, n_y):
        key = (n_s, n_y)
        if key not in self._setups:
            section = SectionGrid(self.domain, n_y, boundary=self.boundary)
            modes = SectionSolver(tol=self.tol).modes_on(section)
            grid = Grid3D(self.g.interval, n_s, section, bc=self.bc)
            consts = constants(modes)
            c = effective1d.c_constant(self.g, consts, grid.s)
            self._setups[key] = (grid, modes, consts, c)
        return self._setups[key]

    def differences(self, kind, eps, j_max, n_s, n_y):
        """
        :returns: :code:`(values_ghat, values_other, differences)` for
            :math:`j \\le j_{max}`
        """
        grid, modes, consts, c = self.setup(n_s, n_y)
        count = j_max + 1
        ghat = assemble_ghat(self.g, modes, grid, eps, c)
        values = [p.value for p in spectrum3d(ghat, count, tol=self.tol)]

        if kind == 'reduction':
            op = effective1d.assemble_T(
                self.g, consts, modes.lambda0, eps, window=grid.window,
                n=grid.n_s, bc=self.bc, c=c, delta=self.delta,
                n_min=2)
            other = [p.value for p in effective1d.spectrum(op, j_max,
                                                           tol=self.tol)]
        else:
            form = assemble_g(self.g, modes, grid, eps, c)
            other = [p.value for p in spectrum3d(form, count, tol=self.tol)]

        diffs = [abs(1. / a - 1. / b) for a, b in zip(values, other)]
        if min(values) < ghat.d:
            self.logger.warning(
                'Smallest eigenvalue %r below coercivity bound %r (eps=%r).',
                min(values), ghat.d, eps)
        return values, other, diffs

    def _row_task(self, kind, j_max):
        def task(eps):
            try:
                primary = self.differences(kind, eps, j_max,
                                           *self.resolutions[0])
                coarse = self.differences(kind, eps, j_max,
                                          *self.resolutions[1])
            except Error as err:
                self.logger.warning('%s check failed at eps=%r: %s', kind,
                                    eps, err)
                return None, Failure(eps, 'tube3d', str(err))
            return (primary, coarse), None
        return task

    def run(self, kind, epsilons, j_max):
        """
        :param str kind: :code:`'reduction'` or :code:`'forms'`
        :param epsilons: Strictly decreasing sequence of at least four
            values
        :param int j_max: Largest eigenvalue index
        :rtype: :py:class:`tubespectra.harness.report.ConvergenceReport`
        """
        if kind not in self.KINDS:
            raise ArgumentError('unknown study {!r}'.format(kind))
        epsilons = list(epsilons)
        if len(epsilons) < 4:
            raise ArgumentError('at least four eps values required')
        if self.n_s is None:
            self.resolutions = self.resolutions_for(
                self.auto_n_s(epsilons))
            self.logger.debug('Resolutions from the grid rule: %r.',
                              self.resolutions)

        # shared setups are built before the workers start
        for n_s, n_y in self.resolutions:
            self.setup(n_s, n_y)

        results = ordered_map(self._row_task(kind, j_max), epsilons,
                              threads=self.threads)

        n_s, n_y = self.resolutions[0]
        grid, modes, consts, c = self.setup(n_s, n_y)
        report = ConvergenceReport(kind)
        gaps = []
        for eps, (result, failure) in zip(epsilons, results):
            if failure is not None:
                report.failures.append(failure)
                continue
            (values, other, diffs), (_, _, coarse) = result
            for j in range(j_max + 1):
                spread = abs(diffs[j] - coarse[j])
                if diffs[j] < settings.HARNESS_ERROR_FLOOR:
                    status = 'converged-below-tolerance'
                elif spread > settings.TUBE3D_GRID_LIMITED_FRACTION * \
                        diffs[j]:
                    status = 'grid-limited'
                    report.flag('grid-limited')
                else:
                    status = 'ok'
                report.rows.append(ReportRow(
                    eps, j, eps * values[j], eps * other[j], diffs[j], n_s,
                    grid.window.halfwidth, status, None, spread))
            gaps.append([eps, (modes.lambda1 - modes.lambda0) /
                         (eps ** 2 * self.g.M ** 2)])

        for j in range(j_max + 1):
            points = [(r.epsilon, r.abs_error) for r in report.rows_for(j)
                      if r.abs_error >= settings.HARNESS_ERROR_FLOOR]
            if len(points) >= settings.NUMERICS_RATE_MIN_POINTS:
                report.rates[j] = fit_rate(points)

        report.metadata.update({
            'n_s': n_s, 'n_y': n_y,
            'coarse_n_s': self.resolutions[1][0],
            'coarse_n_y': self.resolutions[1][1],
            'section_nodes': int(grid.section.size),
            'unknowns': int(grid.size),
            'boundary': self.boundary, 'bc': self.bc, 'c': c,
            'lambda0': modes.lambda0, 'lambda1': modes.lambda1,
            'complement_gap': gaps, 'tol': self.tol,
        })
        self.logger.info('%s check finished: %d rows, %d failures.', kind,
                         len(report.rows), len(report.failures))
        return report


def reduction_check(cfg, epsilons=None, j_max=None):
    """
    Witness of the reduction of dimension:
    :math:`e_j = |l_j(\\hat{G}_\\varepsilon)^{-1} -
    l_j(T_{\\varepsilon,c})^{-1}|` over the :math:`\\varepsilon` sweep.
    """
    study = ResolventStudy.from_config(cfg)
    return study.run('reduction', epsilons or cfg.epsilons,
                     cfg.j_max if j_max is None else j_max)


def form_comparison_check(cfg, epsilons=None, j_max=None):
    """
    Witness of the closeness of the forms:
    :math:`e_j = |l_j(\\hat{G}_\\varepsilon)^{-1} -
    l_j(G_\\varepsilon)^{-1}|` over the :math:`\\varepsilon` sweep.
    """
    study = ResolventStudy.from_config(cfg)
    return study.run('forms', epsilons or cfg.epsilons,
                     cfg.j_max if j_max is None else j_max)


def separable_oracle(nu, section_values, lambda0, eps, M, c, count):
    """
    Smallest :code:`count` tensor sums
    :math:`\\nu_i + (\\lambda_m - \\lambda_0) / (\\varepsilon^2 M^2) + c`
    of a straight, untwisted, undeformed tube.
    """
    shift = np.asarray(section_values, dtype=float) - lambda0
    sums = np.add.outer(np.asarray(nu, dtype=float),
                        shift / (eps ** 2 * M ** 2)) + c
    return np.sort(sums.ravel())[:count]
