# -*- coding: utf-8 -*-
"""
Numerical kernels: symmetric tridiagonal and sparse symmetric eigensolvers
for the smallest eigenvalues, quadrature weights and convergence rate
fitting.

All routines are pure functions of their inputs. Generalized problems
:math:`Ax = \\lambda Bx` with a diagonal mass :math:`B` are reduced to the
standard problem for :math:`B^{-1/2} A B^{-1/2}`; residuals are reported in
that scaled problem, i.e. as :math:`\\|Ax - \\lambda Bx\\|_{B^{-1}}` for
:math:`B`-normalized :math:`x` (which is the plain residual when
:math:`B = I`).
"""

import collections
import logging
import math

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from tubespectra import settings
from tubespectra.utils.error import Error, ExitCodes, NumericalError


EigenPair = collections.namedtuple('EigenPair', ['value', 'vector',
                                                 'residual'])

RateFit = collections.namedtuple('RateFit', ['slope', 'intercept',
                                             'r_squared'])


# -----------------------------------------------------------------------------
class NumericsError(NumericalError):
    """Numerical kernel failure ({})."""


class ArgumentError(Error, ValueError):
    """Invalid argument: {}."""
    exit_code = ExitCodes.EXIT_ERROR


class ConvergenceError(NumericsError):
    """Eigensolver did not converge (best residual: {}; {})."""

    @property
    def best_residual(self):
        return self.args[0]


# -----------------------------------------------------------------------------
class TridiagonalMatrix:
    """
    Symmetric tridiagonal matrix given by its diagonal and off-diagonal.
    """

    def __init__(self, diag, offdiag):
        self.diag = np.array(diag, dtype=float)
        self.offdiag = np.array(offdiag, dtype=float)

        if self.diag.ndim != 1 or not len(self.diag):
            raise ArgumentError('diagonal must be a nonempty sequence')
        if len(self.offdiag) != len(self.diag) - 1:
            raise ArgumentError(
                'off-diagonal length {} does not match n-1 = {}'.format(
                    len(self.offdiag), len(self.diag) - 1))
        if not (np.all(np.isfinite(self.diag)) and
                np.all(np.isfinite(self.offdiag))):
            raise ArgumentError('matrix entries must be finite')

    @property
    def n(self):
        return len(self.diag)

    def norm_estimate(self):
        """Gershgorin bound of the spectral radius."""
        radius = np.abs(self.diag).copy()
        radius[:-1] += np.abs(self.offdiag)
        radius[1:] += np.abs(self.offdiag)
        return float(radius.max())

    def matvec(self, x):
        x = np.asarray(x, dtype=float)
        y = self.diag * x
        y[:-1] += self.offdiag * x[1:]
        y[1:] += self.offdiag * x[:-1]
        return y

    def shifted(self, sigma):
        return TridiagonalMatrix(self.diag + sigma, self.offdiag)

    def scaled(self, factor):
        return TridiagonalMatrix(self.diag * factor, self.offdiag * factor)

    def toarray(self):
        return (np.diag(self.diag) + np.diag(self.offdiag, 1) +
                np.diag(self.offdiag, -1))

    def __repr__(self):
        return '<TridiagonalMatrix(n={})>'.format(self.n)


class SparseSymmetric:
    """
    Sparse symmetric matrix assembled from upper triangle entries with an
    optional diagonal mass matrix.

    Entries are given as :code:`(row, col, value)` with :code:`row <= col`
    and are implicitly symmetrized; duplicates are summed during assembly.
    """

    def __init__(self, n, rows, cols, values, mass_diag=None):
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        values = np.asarray(values, dtype=float)

        if n < 1:
            raise ArgumentError('dimension must be positive')
        if np.any(rows > cols):
            raise ArgumentError('entries must satisfy row <= col')

        upper = sp.coo_matrix((values, (rows, cols)), shape=(n, n)).tocsr()
        upper.sum_duplicates()
        self.upper = upper
        self.mass_diag = self._check_mass(n, mass_diag)
        self._full = None

    @classmethod
    def from_matrix(cls, matrix, mass_diag=None):
        """
        Build from a (structurally) symmetric matrix; the upper triangle is
        kept.
        """
        upper = sp.triu(sp.csr_matrix(matrix, dtype=float)).tocoo()
        return cls(matrix.shape[0], upper.row, upper.col, upper.data,
                   mass_diag=mass_diag)

    @staticmethod
    def _check_mass(n, mass_diag):
        if mass_diag is None:
            return None
        mass_diag = np.asarray(mass_diag, dtype=float)
        if mass_diag.shape != (n,):
            raise ArgumentError('mass diagonal must have length {}'.format(n))
        if not np.all(mass_diag > 0):
            raise ArgumentError('mass diagonal entries must be positive')
        return mass_diag

    @property
    def n(self):
        return self.upper.shape[0]

    @property
    def nnz(self):
        return self.upper.nnz

    @property
    def matrix(self):
        """The full symmetric matrix (CSR)."""
        if self._full is None:
            strict = sp.triu(self.upper, k=1)
            self._full = (self.upper + strict.T).tocsr()
        return self._full

    def entries(self):
        """
        Iterate over the stored upper triangle entries in row-major order.
        """
        coo = self.upper.tocoo()
        order = np.lexsort((coo.col, coo.row))
        for idx in order:
            yield int(coo.row[idx]), int(coo.col[idx]), float(coo.data[idx])

    def scaled_problem(self):
        """
        Return :math:`C = B^{-1/2} A B^{-1/2}` together with the scaling
        vector :math:`B^{-1/2}`.
        """
        if self.mass_diag is None:
            return self.matrix, np.ones(self.n)
        d = 1. / np.sqrt(self.mass_diag)
        dm = sp.diags(d)
        return (dm @ self.matrix @ dm).tocsr(), d

    def __repr__(self):
        return '<SparseSymmetric(n={}, nnz={}, generalized={})>'.format(
            self.n, self.nnz, self.mass_diag is not None)


# -----------------------------------------------------------------------------
def residual_limit(norm_estimate, tol):
    """
    Residual bound accepted for a solve.

    The absolute tolerance is relative to the matrix scale once the
    Gershgorin bound exceeds one; rounding alone produces residuals of the
    order of :code:`eps * ||A||`.
    """
    return tol * max(1., norm_estimate)


def _gershgorin(matrix):
    return float(abs(matrix).sum(axis=1).max())


def sturm_count(T, x):
    """
    Number of eigenvalues of the tridiagonal matrix :code:`T` strictly below
    :code:`x`, computed from the signs of the Sturm sequence (the pivots of
    the :math:`LDL^T` factorization of :math:`T - xI`).

    :param T: Tridiagonal matrix
    :type T: :py:class:`TridiagonalMatrix`
    :param float x: Shift
    :rtype: int
    """
    tiny = np.finfo(float).tiny
    count = 0
    q = T.diag[0] - x
    e2 = T.offdiag ** 2
    for i in range(T.n):
        if i:
            q = (T.diag[i] - x) - e2[i - 1] / q
        if q == 0.:
            q = tiny
        if q < 0.:
            count += 1
    return count


def tridiag_smallest(T, count, tol=settings.NUMERICS_EIGEN_TOL):
    """
    Smallest eigenpairs of a symmetric tridiagonal matrix.

    Eigenvalues are located by bisection on Sturm counts and eigenvectors
    computed by inverse iteration (LAPACK :code:`?stebz` and
    :code:`?stein`).

    :param T: Tridiagonal matrix
    :type T: :py:class:`TridiagonalMatrix`
    :param int count: Number of eigenpairs requested
    :param float tol: Residual tolerance
    :returns: Eigenpairs in nondecreasing order of the eigenvalue
    :rtype: list of :py:class:`EigenPair`
    :raises ArgumentError: if :code:`count` is not in :code:`[1, n]`
    :raises ConvergenceError: if a residual exceeds the tolerance
    """
    if not 1 <= count <= T.n:
        raise ArgumentError(
            'count={} must be in [1, n={}]'.format(count, T.n))

    if T.n == 1:
        return [EigenPair(float(T.diag[0]), np.ones(1), 0.)]

    values, vectors = scipy.linalg.eigh_tridiagonal(
        T.diag, T.offdiag, select='i', select_range=(0, count - 1),
        lapack_driver='stebz')

    limit = residual_limit(T.norm_estimate(), tol)
    pairs = []
    for k in range(count):
        v = vectors[:, k]
        residual = float(np.linalg.norm(T.matvec(v) - values[k] * v))
        if residual > limit:
            raise ConvergenceError(
                residual, 'tridiagonal eigenpair {} above limit {}'.format(
                    k, limit))
        pairs.append(EigenPair(float(values[k]), v, residual))
    return pairs


def dense_smallest(A, count, tol=settings.NUMERICS_EIGEN_TOL):
    """
    Dense fallback: smallest eigenpairs of a (generalized) symmetric problem
    using :py:func:`scipy.linalg.eigh`.

    :param A: Matrix
    :type A: :py:class:`SparseSymmetric`
    :param int count: Number of eigenpairs requested
    :param float tol: Residual tolerance
    :rtype: list of :py:class:`EigenPair`
    """
    if not 1 <= count <= A.n:
        raise ArgumentError(
            'count={} must be in [1, n={}]'.format(count, A.n))

    C, d = A.scaled_problem()
    values, vectors = scipy.linalg.eigh(C.toarray(),
                                        subset_by_index=[0, count - 1])
    return _collect(C, d, values, vectors, residual_limit(_gershgorin(C),
                                                          tol))


def _collect(C, d, values, vectors, limit):
    pairs = []
    for k in range(len(values)):
        y = vectors[:, k]
        residual = float(np.linalg.norm(C @ y - values[k] * y))
        if residual > limit:
            raise ConvergenceError(
                residual, 'eigenpair {} above limit {}'.format(k, limit))
        pairs.append(EigenPair(float(values[k]), d * y, residual))
    return pairs


class ShiftInvertLanczos:
    """
    Lanczos iteration with full reorthogonalization on the shift-invert
    operator :math:`C^{-1}` (shift 0) of a symmetric positive definite
    matrix.

    Degenerate eigenvalues are captured by repeated passes whose Krylov
    spaces are kept orthogonal to all previously converged eigenvectors.
    """

    LOGGER = 'tubespectra.spectral.numerics.lanczos'

    def __init__(self, C, tol=settings.NUMERICS_EIGEN_TOL, iter_cap=None,
                 seed=settings.NUMERICS_LANCZOS_SEED):
        self.logger = logging.getLogger(self.LOGGER)

        self.C = sp.csc_matrix(C)
        self.n = self.C.shape[0]
        self.iter_cap = iter_cap
        self.limit = residual_limit(_gershgorin(self.C), tol)
        self._rng = np.random.default_rng(seed)
        self._lu = spla.splu(self.C, permc_spec='MMD_AT_PLUS_A')

    def smallest(self, count):
        """
        :param int count: Number of eigenpairs requested
        :returns: Eigenvalues and orthonormal eigenvectors (columns)
        :rtype: tuple
        """
        iter_cap = self.iter_cap or int(
            settings.NUMERICS_ITER_CAP_FACTOR * count * math.sqrt(self.n))
        iter_cap = max(min(iter_cap, self.n), 1)

        values = np.empty(0)
        vectors = np.empty((self.n, 0))
        for pass_no in range(settings.NUMERICS_LANCZOS_MAX_PASSES):
            want = min(count, self.n - vectors.shape[1])
            if want <= 0:
                break
            new_values, new_vectors = self._pass(vectors, want, iter_cap)
            self.logger.debug('Lanczos pass %d: %d new eigenpair(s).',
                              pass_no, len(new_values))

            if len(values) >= count:
                bound = np.sort(values)[count - 1]
                tie = self.limit + 1e-10 * abs(bound)
                if not len(new_values) or new_values.min() > bound + tie:
                    break

            values = np.concatenate([values, new_values])
            vectors = np.hstack([vectors, new_vectors])
            if not len(new_values):
                break

        if len(values) < count:
            raise ConvergenceError(
                float('nan'), 'only {} of {} eigenpairs converged'.format(
                    len(values), count))

        order = np.argsort(values, kind='stable')[:count]
        return values[order], vectors[:, order]

    def _pass(self, locked, want, iter_cap):
        n = self.n
        q = self._rng.standard_normal(n)
        q = self._orthogonalize(q, locked, None, 0)
        q /= np.linalg.norm(q)

        block = min(iter_cap + 1, settings.NUMERICS_LANCZOS_BLOCK)
        basis = np.zeros((n, block))
        basis[:, 0] = q
        alphas, betas = [], []
        best = float('inf')
        for k in range(iter_cap):
            if k + 1 >= basis.shape[1]:
                basis = np.hstack([basis, np.zeros_like(basis)])
            w = self._lu.solve(basis[:, k])
            alpha = basis[:, k] @ w
            w -= alpha * basis[:, k]
            if k:
                w -= betas[-1] * basis[:, k - 1]
            w = self._orthogonalize(w, locked, basis, k + 1)
            beta = np.linalg.norm(w)
            alphas.append(alpha)

            m = k + 1
            breakdown = beta <= 1e-13 * max(abs(a) for a in alphas)
            check = (m >= want and
                     (m % settings.NUMERICS_LANCZOS_CHECK_INTERVAL == 0 or
                      breakdown or m == iter_cap))
            if check:
                values, vectors, residuals = self._ritz(
                    alphas, betas, basis[:, :m], want)
                if len(residuals):
                    best = min(best, float(residuals.max()))
                converged = residuals <= self.limit
                if converged.all() and len(values) == want:
                    return values, vectors
                if breakdown:
                    return values[converged], vectors[:, converged]
            elif breakdown:
                values, vectors, residuals = self._ritz(
                    alphas, betas, basis[:, :m], m)
                converged = residuals <= self.limit
                return values[converged], vectors[:, converged]

            betas.append(beta)
            basis[:, k + 1] = w / beta

        raise ConvergenceError(
            best, 'iteration cap {} reached'.format(iter_cap))

    def _ritz(self, alphas, betas, basis, want):
        theta, S = scipy.linalg.eigh_tridiagonal(np.asarray(alphas),
                                                 np.asarray(betas))
        # largest theta of the inverse belong to the smallest eigenvalues
        idx = [i for i in np.argsort(theta)[::-1] if theta[i] > 0][:want]
        Y = basis @ S[:, idx]
        CY = self.C @ Y
        values = np.einsum('ij,ij->j', Y, CY)
        residuals = np.linalg.norm(CY - Y * values, axis=0)
        order = np.argsort(values, kind='stable')
        return values[order], Y[:, order], residuals[order]

    @staticmethod
    def _orthogonalize(w, locked, basis, m):
        # two rounds of classical Gram-Schmidt
        for _ in range(2):
            if locked is not None and locked.shape[1]:
                w = w - locked @ (locked.T @ w)
            if basis is not None and m:
                w = w - basis[:, :m] @ (basis[:, :m].T @ w)
        return w


def sparse_smallest(A, count, tol=settings.NUMERICS_EIGEN_TOL, iter_cap=None,
                    dense_max=settings.NUMERICS_DENSE_FALLBACK_MAX):
    """
    Smallest eigenpairs of a sparse symmetric positive definite
    (generalized) eigenproblem.

    Problems of dimension up to :code:`dense_max` are delegated to
    :py:func:`dense_smallest`; larger ones are solved by
    :py:class:`ShiftInvertLanczos`.

    :param A: Matrix with optional mass diagonal
    :type A: :py:class:`SparseSymmetric`
    :param int count: Number of eigenpairs requested
    :param float tol: Residual tolerance
    :param iter_cap: Iteration cap per Lanczos pass (default
        :code:`50 * count * sqrt(n)`)
    :type iter_cap: int or None
    :param int dense_max: Largest dimension solved densely
    :returns: Eigenpairs in nondecreasing order, :math:`B`-orthonormal
        eigenvectors
    :rtype: list of :py:class:`EigenPair`
    """
    if not 1 <= count <= A.n:
        raise ArgumentError(
            'count={} must be in [1, n={}]'.format(count, A.n))
    if A.n <= dense_max:
        return dense_smallest(A, count, tol=tol)

    C, d = A.scaled_problem()
    try:
        solver = ShiftInvertLanczos(C, tol=tol, iter_cap=iter_cap)
    except RuntimeError as err:
        # splu signals a singular factor by RuntimeError
        raise NumericsError('factorization failed: {}'.format(err))
    values, vectors = solver.smallest(count)
    return _collect(C, d, values, vectors, solver.limit)


# -----------------------------------------------------------------------------
def quadrature_weights(n, step, closed=False):
    """
    Nodal quadrature weights of a uniform grid.

    :param int n: Number of nodes
    :param float step: Grid step
    :param bool closed: The grid contains both end points (trapezoidal
        weights); otherwise the grid holds interior nodes of a Dirichlet
        problem and all weights equal :code:`step`
    :rtype: :py:class:`numpy.ndarray`
    """
    weights = np.full(n, float(step))
    if closed:
        weights[0] *= .5
        weights[-1] *= .5
    return weights


def fit_rate(points):
    """
    Least squares fit of :code:`log(err) = slope * log(eps) + intercept`.

    :param points: Sequence of :code:`(eps, err)` tuples
    :rtype: :py:class:`RateFit`
    :raises ArgumentError: if less than three points, duplicate
        :code:`eps` or nonpositive values are passed
    """
    points = list(points)
    if len(points) < settings.NUMERICS_RATE_MIN_POINTS:
        raise ArgumentError(
            'rate fit needs at least {} points, got {}'.format(
                settings.NUMERICS_RATE_MIN_POINTS, len(points)))
    eps = np.array([p[0] for p in points], dtype=float)
    err = np.array([p[1] for p in points], dtype=float)
    if np.any(eps <= 0) or np.any(err <= 0):
        raise ArgumentError('rate fit needs strictly positive values')
    if len(np.unique(eps)) != len(eps):
        raise ArgumentError('rate fit needs distinct abscissae')

    x, y = np.log(eps), np.log(err)
    slope, intercept = np.polyfit(x, y, 1)
    ss_res = float(np.sum((y - (slope * x + intercept)) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r_squared = 1. if ss_tot == 0. else 1. - ss_res / ss_tot
    return RateFit(float(slope), float(intercept),
                   float(min(1., max(0., r_squared))))


def estimate_order(eps, values):
    """
    Empirical convergence order of a sequence :code:`values(eps)` from its
    successive differences.

    :returns: The order or :code:`None` if it cannot be determined
    """
    eps = np.asarray(eps, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(values) < 3:
        return None
    diffs = np.abs(np.diff(values))
    if np.any(diffs == 0):
        return None
    if len(diffs) == 2:
        ratio = eps[1] / eps[2]
        return float(math.log(diffs[0] / diffs[1]) / math.log(ratio))
    return fit_rate(zip(eps[1:], diffs)).slope


def richardson_limit(eps, values, order=None):
    """
    Two-point Richardson extrapolation of :code:`values(eps)` to
    :code:`eps -> 0` using the last two points.

    :param eps: Strictly decreasing abscissae
    :param values: Sequence values
    :param order: Convergence order; estimated from the data if
        :code:`None`, falling back to one if the estimate is unusable
    :rtype: float
    """
    eps = np.asarray(eps, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(values) < 2:
        raise ArgumentError('extrapolation needs at least two points')
    if order is None:
        order = estimate_order(eps, values)
    if order is None or not math.isfinite(order) or order <= 0:
        order = 1.

    ratio = (eps[-2] / eps[-1]) ** order
    return float(values[-1] + (values[-1] - values[-2]) / (ratio - 1.))
