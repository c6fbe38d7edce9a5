# -*- coding: utf-8 -*-
"""
Cross-section eigenproblem on :math:`S`: the lowest Dirichlet modes
:math:`(\\lambda_0, u_0, \\lambda_1)`, the geometric constants
:math:`C_1, C_2, C_3, F, \\rho_S`, the perturbed weighted eigenvalue
:math:`\\lambda(\\xi)` and :math:`\\gamma_\\varepsilon(s)`.

The discretization is a 5-point finite difference scheme on the nodes of a
uniform lattice strictly inside :math:`S`. Links leaving the domain either
end at the boundary (:code:`'ghost'`, the boundary position along the link
enters the diagonal) or are treated as if the boundary were located at the
next lattice node (:code:`'omission'`). Both variants coincide on grid
aligned rectangles.

The rotation :math:`R y = (-y_2, y_1)` is used for :math:`C_1` and
:math:`C_3`; flipping it negates :math:`C_3` only.
"""

import collections
import json
import logging
import math

import numpy as np
import scipy.sparse as sp

from tubespectra import settings
from tubespectra.spectral.numerics import (ArgumentError, SparseSymmetric,
                                           sparse_smallest)
from tubespectra.utils.error import Error, ExitCodes


SectionConstants = collections.namedtuple(
    'SectionConstants', ['C1', 'C2', 'C3', 'F', 'rho_S'])

# +x, -x, +y, -y
DIRECTIONS = ((1, 0), (-1, 0), (0, 1), (0, -1))


# -----------------------------------------------------------------------------
class DomainError(Error):
    """Invalid cross-section domain: {}."""
    exit_code = ExitCodes.EXIT_ERROR


# -----------------------------------------------------------------------------
class CrossSectionDomain:
    """
    Base class of open, bounded, simply connected cross sections.
    """

    shape = None

    def contains(self, y1, y2):
        """Vectorized test for strict interior points."""
        raise NotImplementedError

    def bbox(self):
        """:code:`(xmin, xmax, ymin, ymax)`"""
        raise NotImplementedError

    def rho(self):
        """:math:`\\rho_S = \\max_{y \\in S} |y|`"""
        raise NotImplementedError

    def boundary_fraction(self, y1, y2, direction, step):
        """
        Fractions :math:`\\theta \\in (0, 1]` of the links from the points
        :code:`(y1, y2)` along :code:`direction` at which the boundary is
        crossed first.
        """
        raise NotImplementedError

    def to_dict(self):
        raise NotImplementedError


class Disk(CrossSectionDomain):

    shape = 'disk'

    def __init__(self, radius=1., center=(0., 0.)):
        if not radius > 0:
            raise DomainError('radius must be positive: {!r}'.format(radius))
        self.radius = float(radius)
        self.center = (float(center[0]), float(center[1]))

    def contains(self, y1, y2):
        return ((y1 - self.center[0]) ** 2 + (y2 - self.center[1]) ** 2 <
                self.radius ** 2)

    def bbox(self):
        cx, cy = self.center
        r = self.radius
        return cx - r, cx + r, cy - r, cy + r

    def rho(self):
        return math.hypot(*self.center) + self.radius

    def boundary_fraction(self, y1, y2, direction, step):
        dx, dy = direction
        px = y1 - self.center[0]
        py = y2 - self.center[1]
        # |p + t d|^2 = r^2, positive root
        b = px * dx + py * dy
        c = px ** 2 + py ** 2 - self.radius ** 2
        t = -b + np.sqrt(np.maximum(b ** 2 - c, 0.))
        return t / step

    def to_dict(self):
        return {'shape': self.shape, 'radius': self.radius,
                'center': list(self.center)}


class Rectangle(CrossSectionDomain):

    shape = 'rectangle'

    def __init__(self, x_range=(0., 1.), y_range=(0., 1.)):
        if not (x_range[0] < x_range[1] and y_range[0] < y_range[1]):
            raise DomainError('empty rectangle {!r} x {!r}'.format(
                x_range, y_range))
        self.x_range = (float(x_range[0]), float(x_range[1]))
        self.y_range = (float(y_range[0]), float(y_range[1]))

    def contains(self, y1, y2):
        return ((self.x_range[0] < y1) & (y1 < self.x_range[1]) &
                (self.y_range[0] < y2) & (y2 < self.y_range[1]))

    def bbox(self):
        return self.x_range + self.y_range

    def rho(self):
        return max(math.hypot(x, y) for x in self.x_range
                   for y in self.y_range)

    def boundary_fraction(self, y1, y2, direction, step):
        dx, dy = direction
        if dx > 0:
            dist = self.x_range[1] - y1
        elif dx < 0:
            dist = y1 - self.x_range[0]
        elif dy > 0:
            dist = self.y_range[1] - y2
        else:
            dist = y2 - self.y_range[0]
        return np.asarray(dist, dtype=float) / step

    def to_dict(self):
        return {'shape': self.shape, 'x_range': list(self.x_range),
                'y_range': list(self.y_range)}


class Polygon(CrossSectionDomain):
    """
    Simple polygon. Point location by crossing number; points on edges are
    treated as boundary points.
    """

    shape = 'polygon'

    def __init__(self, vertices):
        v = np.asarray(vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
            raise DomainError('polygon needs at least three 2D vertices')
        if np.allclose(v[0], v[-1]):
            v = v[:-1]
        self.vertices = v
        area = 0.5 * np.sum(v[:, 0] * np.roll(v[:, 1], -1) -
                            np.roll(v[:, 0], -1) * v[:, 1])
        if abs(area) == 0.:
            raise DomainError('degenerate polygon (zero area)')
        if not self._simple():
            raise DomainError('polygon edges intersect')

    def _edges(self):
        return self.vertices, np.roll(self.vertices, -1, axis=0)

    def _simple(self):
        p, q = self._edges()
        n = len(p)
        for i in range(n):
            for j in range(i + 1, n):
                if j == i + 1 or (i == 0 and j == n - 1):
                    continue
                if _segments_intersect(p[i], q[i], p[j], q[j]):
                    return False
        return True

    def contains(self, y1, y2):
        y1 = np.asarray(y1, dtype=float)
        y2 = np.asarray(y2, dtype=float)
        p, q = self._edges()
        inside = np.zeros(np.broadcast(y1, y2).shape, dtype=bool)
        on_edge = np.zeros_like(inside)
        for (x0, v0), (x1, v1) in zip(p, q):
            crosses = (v0 > y2) != (v1 > y2)
            with np.errstate(divide='ignore', invalid='ignore'):
                x_int = x0 + (y2 - v0) * (x1 - x0) / (v1 - v0)
            inside ^= crosses & (y1 < x_int)

            ex, ey = x1 - x0, v1 - v0
            length2 = ex ** 2 + ey ** 2
            t = np.clip(((y1 - x0) * ex + (y2 - v0) * ey) / length2, 0., 1.)
            dist2 = (y1 - x0 - t * ex) ** 2 + (y2 - v0 - t * ey) ** 2
            on_edge |= dist2 <= 1e-24 * max(1., length2)
        return inside & ~on_edge

    def bbox(self):
        v = self.vertices
        return v[:, 0].min(), v[:, 0].max(), v[:, 1].min(), v[:, 1].max()

    def rho(self):
        return float(np.max(np.hypot(self.vertices[:, 0],
                                     self.vertices[:, 1])))

    def boundary_fraction(self, y1, y2, direction, step):
        dx, dy = direction
        y1 = np.asarray(y1, dtype=float)
        y2 = np.asarray(y2, dtype=float)
        best = np.full(np.broadcast(y1, y2).shape, np.inf)
        p, q = self._edges()
        for (x0, v0), (x1, v1) in zip(p, q):
            ex, ey = x1 - x0, v1 - v0
            denom = dx * ey - dy * ex
            if denom == 0.:
                continue
            wx, wy = x0 - y1, v0 - y2
            t = (wx * ey - wy * ex) / denom
            u = (wx * dy - wy * dx) / denom
            hit = (t > 0) & (u >= 0) & (u <= 1)
            best = np.where(hit, np.minimum(best, t), best)
        return np.minimum(best, step) / step

    def to_dict(self):
        return {'shape': self.shape, 'vertices': self.vertices.tolist()}


def _segments_intersect(p1, p2, p3, p4):
    def orient(a, b, c):
        return np.sign((b[0] - a[0]) * (c[1] - a[1]) -
                       (b[1] - a[1]) * (c[0] - a[0]))

    d1, d2 = orient(p3, p4, p1), orient(p3, p4, p2)
    d3, d4 = orient(p1, p2, p3), orient(p1, p2, p4)
    return d1 * d2 < 0 and d3 * d4 < 0


def domain_from_dict(spec):
    """
    Build a domain from its configuration mapping, e.g.
    :code:`{"shape": "disk", "radius": 1.0, "center": [0, 0]}`.
    """
    spec = dict(spec)
    shape = spec.pop('shape', None)
    try:
        if shape == 'disk':
            return Disk(**spec)
        elif shape == 'rectangle':
            return Rectangle(**spec)
        elif shape == 'polygon':
            return Polygon(**spec)
    except TypeError as err:
        raise DomainError(err)
    raise DomainError('unknown shape {!r}'.format(shape))


# -----------------------------------------------------------------------------
class SectionGrid:
    """
    Uniform lattice over the bounding box of a domain restricted to the
    nodes strictly inside it.

    The step is :code:`h = (longest bounding box side) / n`. Interior nodes
    are numbered row by row; for every node and direction the grid stores
    the neighbor index (:code:`-1` for boundary links) and the fraction
    :math:`\\theta` of the link at which the boundary is met.
    """

    def __init__(self, domain, n, boundary=settings.SECTION_BOUNDARY_DEFAULT):
        if n < settings.SECTION_N_MIN:
            raise ArgumentError('grid resolution n={} below {}'.format(
                n, settings.SECTION_N_MIN))
        if boundary not in settings.SECTION_BOUNDARY_CHOICES:
            raise ArgumentError('unknown boundary treatment {!r}'.format(
                boundary))

        self.domain = domain
        self.n = int(n)
        self.boundary = boundary

        xmin, xmax, ymin, ymax = domain.bbox()
        self.step = max(xmax - xmin, ymax - ymin) / self.n
        self.origin = (xmin, ymin)
        nx = int(math.ceil((xmax - xmin) / self.step - 1e-9)) + 1
        ny = int(math.ceil((ymax - ymin) / self.step - 1e-9)) + 1
        self.shape = (ny, nx)

        X, Y = np.meshgrid(xmin + self.step * np.arange(nx),
                           ymin + self.step * np.arange(ny))
        self.mask = domain.contains(X, Y)
        if not self.mask.any():
            raise DomainError(
                'no interior grid node at resolution n={}'.format(n))

        self.index = np.full(self.shape, -1, dtype=np.int64)
        rows, cols = np.nonzero(self.mask)
        self.index[rows, cols] = np.arange(len(rows))
        self.y1 = X[rows, cols]
        self.y2 = Y[rows, cols]

        self.neighbors = np.full((self.size, 4), -1, dtype=np.int64)
        self.theta = np.ones((self.size, 4))
        for d, (dx, dy) in enumerate(DIRECTIONS):
            r, c = rows + dy, cols + dx
            inside = (r >= 0) & (r < ny) & (c >= 0) & (c < nx)
            nb = np.full(self.size, -1, dtype=np.int64)
            nb[inside] = self.index[r[inside], c[inside]]
            self.neighbors[:, d] = nb
            cut = nb < 0
            if boundary == 'ghost' and cut.any():
                theta = domain.boundary_fraction(
                    self.y1[cut], self.y2[cut], (dx, dy), self.step)
                self.theta[cut, d] = np.clip(
                    theta, settings.SECTION_THETA_MIN, 1.)

    @property
    def size(self):
        return len(self.y1)

    @property
    def cell(self):
        return self.step ** 2

    @property
    def points(self):
        return np.column_stack([self.y1, self.y2])

    def to_lattice(self, values):
        """Scatter nodal values onto the full lattice (zero outside)."""
        out = np.zeros(self.shape)
        out[self.mask] = values
        return out

    def __repr__(self):
        return '<SectionGrid({}, n={}, nodes={}, boundary={})>'.format(
            self.domain.shape, self.n, self.size, self.boundary)


def weighted_form(grid, weight=None):
    """
    Assemble the stiffness of :math:`\\int_S w |\\nabla u|^2 dy` and the
    lumped mass of :math:`\\int_S w |u|^2 dy`.

    The weight is sampled at link midpoints (at the midpoint of the cut
    part of boundary links) for the stiffness and at nodes for the mass.

    :param grid: Section grid
    :type grid: :py:class:`SectionGrid`
    :param weight: Vectorized :code:`weight(y1, y2)`; one if :code:`None`
    :returns: :code:`(stiffness, mass_diag)` with the stiffness as upper
        triangle CSR matrix
    """
    def w(y1, y2):
        if weight is None:
            return np.ones(np.broadcast(y1, y2).shape)
        return np.asarray(weight(y1, y2), dtype=float)

    h = grid.step
    P = grid.size
    diag = np.zeros(P)
    rows, cols, vals = [], [], []
    for d, (dx, dy) in enumerate(DIRECTIONS):
        nb = grid.neighbors[:, d]
        theta = grid.theta[:, d]
        link = nb >= 0
        if dx > 0 or dy > 0:
            p = np.nonzero(link)[0]
            wl = w(grid.y1[p] + 0.5 * h * dx, grid.y2[p] + 0.5 * h * dy)
            diag[p] += wl
            np.add.at(diag, nb[p], wl)
            lo = np.minimum(p, nb[p])
            hi = np.maximum(p, nb[p])
            rows.append(lo)
            cols.append(hi)
            vals.append(-wl)
        p = np.nonzero(~link)[0]
        wb = w(grid.y1[p] + 0.5 * theta[p] * h * dx,
               grid.y2[p] + 0.5 * theta[p] * h * dy)
        diag[p] += wb / theta[p]

    rows.append(np.arange(P))
    cols.append(np.arange(P))
    vals.append(diag)
    stiffness = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(P, P)).tocsr()
    mass = w(grid.y1, grid.y2) * grid.cell
    return stiffness, mass


def gradient_operators(grid):
    """
    Nodal first derivative operators :math:`(G_x, G_y)`.

    Three-point formulas on the (possibly nonuniform) stencil formed by the
    two neighbors along each axis; a boundary link contributes the
    Dirichlet value zero at distance :math:`\\theta h`.
    """
    h = grid.step
    P = grid.size
    ops = []
    for d_plus, d_minus in ((0, 1), (2, 3)):
        rows, cols, vals = [], [], []
        nb_r, nb_l = grid.neighbors[:, d_plus], grid.neighbors[:, d_minus]
        hr = grid.theta[:, d_plus] * h
        hl = grid.theta[:, d_minus] * h
        cr = hl / (hr * (hl + hr))
        cl = -hr / (hl * (hl + hr))
        c0 = (hr - hl) / (hl * hr)
        idx = np.arange(P)
        rows.append(idx)
        cols.append(idx)
        vals.append(c0)
        for nb, coef in ((nb_r, cr), (nb_l, cl)):
            has = nb >= 0
            rows.append(idx[has])
            cols.append(nb[has])
            vals.append(coef[has])
        ops.append(sp.coo_matrix(
            (np.concatenate(vals),
             (np.concatenate(rows), np.concatenate(cols))),
            shape=(P, P)).tocsr())
    return tuple(ops)


def rotation_operators(grid):
    """
    Operators :math:`u \\mapsto \\langle \\nabla u, R y \\rangle` and
    :math:`u \\mapsto \\langle \\nabla u, y \\rangle`.
    """
    gx, gy = gradient_operators(grid)
    y1 = sp.diags(grid.y1)
    y2 = sp.diags(grid.y2)
    rot = (-y2 @ gx + y1 @ gy).tocsr()
    radial = (y1 @ gx + y2 @ gy).tocsr()
    return rot, radial


# -----------------------------------------------------------------------------
class SectionModes:
    """
    The two lowest Dirichlet eigenvalues of the section and the positive,
    quadrature normalized ground state :math:`u_0`. Immutable after
    construction.
    """

    def __init__(self, grid, lambda0, u0, lambda1):
        self.grid = grid
        self.lambda0 = float(lambda0)
        self.u0 = np.asarray(u0, dtype=float)
        self.u0.setflags(write=False)
        self.lambda1 = float(lambda1)

    @property
    def domain(self):
        return self.grid.domain

    @property
    def n(self):
        return self.grid.n

    def norm(self):
        return float(np.sum(self.u0 ** 2) * self.grid.cell)

    def metadata(self):
        g = self.grid
        return {'domain': g.domain.to_dict(), 'n': g.n, 'step': g.step,
                'origin': list(g.origin), 'shape': list(g.shape),
                'boundary': g.boundary, 'nodes': g.size,
                'lambda0': self.lambda0, 'lambda1': self.lambda1}

    def __repr__(self):
        return '<SectionModes(lambda0={!r}, lambda1={!r}, {})>'.format(
            self.lambda0, self.lambda1, self.grid)


class SectionSolver:
    """
    Dirichlet eigenproblems on a cross section.
    """

    LOGGER = 'tubespectra.spectral.cross_section'

    def __init__(self, tol=settings.NUMERICS_EIGEN_TOL):
        self.logger = logging.getLogger(self.LOGGER)
        self.tol = tol

    def modes(self, domain, n, boundary=settings.SECTION_BOUNDARY_DEFAULT):
        return self.modes_on(SectionGrid(domain, n, boundary=boundary))

    def modes_on(self, grid):
        if grid.size < 2:
            raise DomainError(
                'at least two interior nodes needed, got {}'.format(
                    grid.size))
        stiffness, mass = weighted_form(grid)
        A = SparseSymmetric.from_matrix(stiffness, mass_diag=mass)
        pairs = sparse_smallest(A, 2, tol=self.tol)

        u0 = pairs[0].vector
        if u0.sum() < 0:
            u0 = -u0
        u0 = u0 / math.sqrt(np.sum(u0 ** 2) * grid.cell)
        if not np.all(u0 > 0):
            self.logger.warning(
                'Ground state not strictly positive on %s (min %g).',
                grid, u0.min())

        self.logger.debug('Section modes on %s: lambda0=%r, lambda1=%r',
                          grid, pairs[0].value, pairs[1].value)
        return SectionModes(grid, pairs[0].value, u0, pairs[1].value)

    def perturbed_lowest(self, grid, xi):
        rho = grid.domain.rho()
        if not 1. - math.hypot(xi[0], xi[1]) * rho > 0:
            raise ArgumentError(
                'weight 1 - xi.y not positive on S for xi={!r}'.format(
                    tuple(xi)))

        def weight(y1, y2):
            return 1. - (xi[0] * y1 + xi[1] * y2)

        stiffness, mass = weighted_form(grid, weight)
        A = SparseSymmetric.from_matrix(stiffness, mass_diag=mass)
        return sparse_smallest(A, 1, tol=self.tol)[0].value


def solve_modes(domain, n, boundary=settings.SECTION_BOUNDARY_DEFAULT):
    """
    Lowest two Dirichlet eigenpairs of the 5-point Laplacian on the section.

    :param domain: Cross section
    :type domain: :py:class:`CrossSectionDomain`
    :param int n: Grid resolution (lattice cells along the longest side)
    :param str boundary: :code:`'ghost'` or :code:`'omission'`
    :rtype: :py:class:`SectionModes`
    """
    return SectionSolver().modes(domain, n, boundary=boundary)


def constants(modes):
    """
    Quadrature values of :math:`C_1, C_2, C_3`, the moment vector :math:`F`
    and :math:`\\rho_S`.

    :param modes: Section modes
    :type modes: :py:class:`SectionModes`
    :rtype: :py:class:`SectionConstants`
    """
    grid = modes.grid
    rot, radial = rotation_operators(grid)
    u = modes.u0
    r_u = rot @ u
    y_u = radial @ u
    cell = grid.cell
    C1 = float(np.sum(r_u ** 2) * cell)
    C2 = float(np.sum(y_u ** 2) * cell)
    C3 = float(np.sum(r_u * y_u) * cell)
    F = (float(np.sum(grid.y1 * u ** 2) * cell),
         float(np.sum(grid.y2 * u ** 2) * cell))
    return SectionConstants(C1, C2, C3, F, grid.domain.rho())


def spectral_gap(modes):
    """:math:`\\lambda_1 - \\lambda_0`"""
    return modes.lambda1 - modes.lambda0


def perturbed_lowest(domain, xi, n, boundary=settings.SECTION_BOUNDARY_DEFAULT,
                     grid=None):
    """
    Lowest eigenvalue of
    :math:`-\\mathrm{div}[(1 - \\xi \\cdot y)\\nabla u] =
    \\lambda (1 - \\xi \\cdot y) u` with Dirichlet conditions.

    :param grid: Reuse an existing grid of the same domain
    :raises ArgumentError: if the weight is not positive on the section
    """
    grid = grid or SectionGrid(domain, n, boundary=boundary)
    return SectionSolver().perturbed_lowest(grid, xi)


def gamma(g, modes, s, eps):
    """
    :math:`\\gamma_\\varepsilon(s) = (\\lambda(\\varepsilon h(s) k(s)
    z_\\alpha(s)) - \\lambda_0) / \\varepsilon^2` on the grid of
    :code:`modes`.
    """
    scale = eps * g.h(s) * g.k(s)
    if scale == 0.:
        return 0.
    za = g.z_alpha(s)
    xi = (scale * za[0], scale * za[1])
    lam = SectionSolver().perturbed_lowest(modes.grid, xi)
    return (lam - modes.lambda0) / eps ** 2


# -----------------------------------------------------------------------------
def export_modes(modes, json_path, bin_path):
    """
    Export the ground state as JSON metadata plus a flat little-endian
    float64 dump of :math:`u_0` on the full lattice (row-major, zero
    outside the section).
    """
    meta = modes.metadata()
    meta.update({'binary': bin_path, 'dtype': '<f8', 'layout': 'row-major',
                 'constants': constants(modes)._asdict()})
    data = modes.grid.to_lattice(modes.u0).astype('<f8')
    try:
        data.tofile(bin_path)
        with open(json_path, 'w') as ofd:
            json.dump(meta, ofd, indent=2, sort_keys=True)
    except OSError as err:
        raise DomainError('export failed for {!r}: {}'.format(
            json_path, err))
