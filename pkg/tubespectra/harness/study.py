# -*- coding: utf-8 -*-
"""
End-to-end studies: the convergence sweep of
:math:`\\varepsilon (l_j(\\varepsilon) - \\lambda_0 / (\\varepsilon^2 M^2))`
towards the spectrum of the weakly effective operator (Dirichlet and
Neumann ends, bounded interval or whole line) and the check of the
essential spectrum threshold.
"""

import logging
import math

import numpy as np

from tubespectra import settings, utils
from tubespectra.harness.report import (ConvergenceReport, EssentialRow,
                                        EssentialSpectrumReport, Failure,
                                        ReportRow)
from tubespectra.spectral import effective1d
from tubespectra.spectral.cross_section import (constants, solve_modes,
                                                spectral_gap)
from tubespectra.spectral.geometry import (epsilon_max, sampling_grid,
                                           validate_deformation)
from tubespectra.spectral.numerics import (estimate_order, fit_rate,
                                           richardson_limit, sturm_count)
from tubespectra.utils.error import ConfigurationError, Error, ExitCodes


# -----------------------------------------------------------------------------
class HarnessError(Error):
    """Study error ({})."""


class OutOfHypothesis(HarnessError):
    """Input out of hypothesis: {}."""
    exit_code = ExitCodes.EXIT_ERROR


class InadmissibleEpsilon(ConfigurationError):
    """Inadmissible eps={}: {}."""


# -----------------------------------------------------------------------------
class SectionData:
    """
    Cross-section quantities shared by all rows of a study.
    """

    def __init__(self, modes):
        self.modes = modes
        self.constants = constants(modes)

    @property
    def lambda0(self):
        return self.modes.lambda0

    @property
    def lambda1(self):
        return self.modes.lambda1


class Study:
    """
    Base class of the studies driven by a
    :py:class:`tubespectra.harness.schema.StudyConfig`.
    """

    LOGGER = 'tubespectra.harness.study'

    def __init__(self, cfg):
        self.logger = logging.getLogger(self.LOGGER)
        self.cfg = cfg
        self.g = cfg.geometry
        self.threads = utils.thread_count(cfg.threads)
        self.validation = validate_deformation(self.g.h, self.g.interval)
        self._section = None

    @property
    def section(self):
        if self._section is None:
            sec = self.cfg.section
            self._section = SectionData(
                solve_modes(sec.domain, sec.n, boundary=sec.boundary))
            self.logger.debug('Section: lambda0=%r, lambda1=%r',
                              self._section.lambda0, self._section.lambda1)
        return self._section

    @property
    def c(self):
        """The shift :math:`c`, fixed for the whole study."""
        return effective1d.c_constant(self.g, self.section.constants,
                                      sampling_grid(self.g.interval))

    def check_admissible(self):
        """
        Every swept :math:`\\varepsilon` must lie below
        :math:`\\varepsilon_{max}` and satisfy the guard on
        :math:`\\zeta_\\varepsilon`.

        :raises InadmissibleEpsilon: otherwise
        """
        consts = self.section.constants
        eps_max = epsilon_max(self.g, self.cfg.delta, consts.rho_S)
        s = sampling_grid(self.g.interval)
        for eps in self.cfg.epsilons:
            if not eps < eps_max:
                raise InadmissibleEpsilon(
                    eps, 'not below epsilon_max={:.6g}'.format(eps_max))
            try:
                effective1d.check_guard(self.g, consts, eps,
                                        delta=self.cfg.delta, s_grid=s)
            except effective1d.GuardViolation as err:
                raise InadmissibleEpsilon(eps, err)
        return eps_max

    def metadata(self):
        consts = self.section.constants
        return {
            'name': self.cfg.name,
            'geometry': {'h': self.g.h.label, 'k': self.g.k.label,
                         'tau': self.g.tau.label,
                         'alpha': self.g.alpha.label,
                         'interval': [self.g.interval.a,
                                      self.g.interval.b]},
            'validation': self.validation.summary(),
            'M': self.g.M, 'N': self.g.N,
            'section': self.section.modes.metadata(),
            'constants': {'C1': consts.C1, 'C2': consts.C2,
                          'C3': consts.C3, 'F': list(consts.F),
                          'rho_S': consts.rho_S},
            'spectral_gap': spectral_gap(self.section.modes),
            'epsilons': list(self.cfg.epsilons),
            'j_max': self.cfg.j_max,
            'delta': self.cfg.delta,
            'tol': settings.NUMERICS_EIGEN_TOL,
            'threads': self.threads,
        }


# -----------------------------------------------------------------------------
class EffectiveSweep(Study):
    """
    Sweep of the scaled eigenvalues :math:`\\varepsilon\\, l_j(T_\\varepsilon)`
    over the configured :math:`\\varepsilon` and comparison with
    :math:`\\mu_j`.
    """

    def _window(self, eps, c):
        if self.g.bounded:
            return self.g.interval
        return effective1d.auto_window(
            self.g, self.section.constants, self.section.lambda0, eps,
            self.cfg.j_max, c=c, cap=self.cfg.grid.window_cap)

    def _grid_n(self, window, eps):
        if self.cfg.grid.n:
            return self.cfg.grid.n
        return effective1d.grid_size(window.length, eps,
                                     resolution=self.cfg.grid.resolution)

    def scaled_values(self, eps, bc, c):
        """
        :returns: :code:`(window, n, values, op)`
        """
        window = self._window(eps, c)
        n = self._grid_n(window, eps)
        op = effective1d.assemble_T(
            self.g, self.section.constants, self.section.lambda0, eps,
            window=window, n=n, bc=bc, c=c, delta=self.cfg.delta)
        return window, n, effective1d.scaled_spectrum(op, self.cfg.j_max), op

    def _task(self, bc, c, mu, with_dirichlet):
        def task(eps):
            try:
                window, n, values, op = self.scaled_values(eps, bc, c)
                reference = None
                if with_dirichlet:
                    _, _, reference, _ = self.scaled_values(
                        eps, 'dirichlet', c)
            except Error as err:
                self.logger.warning('Row eps=%r failed: %s', eps, err)
                return None, Failure(eps, 'effective1d', str(err))

            rows = []
            for j, value in enumerate(values):
                error = abs(value - mu[j])
                status = 'ok'
                if error < settings.HARNESS_ERROR_FLOOR:
                    status = 'converged-below-tolerance'
                elif op.warnings:
                    status = 'coarse-grid'
                rows.append(ReportRow(
                    eps, j, value, mu[j], error, n, window.halfwidth,
                    status, None if reference is None else reference[j]))
            self.logger.info('Row eps=%r: %s', eps,
                             ', '.join(utils.fmt_float(v) for v in values))
            return (rows, values[0] + eps * c), None
        return task

    def run(self, bc='dirichlet', require_hypothesis=True):
        if require_hypothesis and not self.validation.valid:
            raise OutOfHypothesis(self.validation.summary())
        self.check_admissible()

        sec = self.section
        c = self.c
        spec = effective1d.WEOSpec(sec.lambda0, self.g.M)
        mu = effective1d.weo_spectrum_exact(spec, self.cfg.j_max)

        results = utils.ordered_map(
            self._task(bc, c, mu, with_dirichlet=(bc == 'neumann')),
            self.cfg.epsilons, threads=self.threads)

        report = ConvergenceReport(bc)
        witness = []
        for eps, (result, failure) in zip(self.cfg.epsilons, results):
            if failure is not None:
                report.failures.append(failure)
                continue
            rows, lowest = result
            report.rows.extend(rows)
            witness.append(lowest)

        self.extrapolate(report, mu)
        if not self.validation.valid:
            report.flag('out-of-hypothesis')
            report.rows = [r._replace(status='out-of-hypothesis')
                           for r in report.rows]
        if bc == 'neumann':
            self._compare_dirichlet(report)
        if not self.g.bounded:
            self._curvature_tails(report)

        report.metadata.update(self.metadata())
        report.metadata.update({
            'bc': bc, 'c': c, 'kappa': spec.kappa, 'mu': mu,
            'lower_bound_witness': min(witness) if witness else None,
        })
        return report

    def extrapolate(self, report, mu):
        """
        Richardson extrapolation of every :math:`j` sequence with the
        empirically estimated order, deviations from :math:`\\mu_j`, error
        rates and a monotonicity check of the last three errors.
        """
        for j in range(self.cfg.j_max + 1):
            rows = sorted(report.rows_for(j), key=lambda r: -r.epsilon)
            if len(rows) < 2:
                continue
            eps = [r.epsilon for r in rows]
            values = [r.scaled_eigenvalue for r in rows]
            order = estimate_order(eps, values)
            limit = richardson_limit(eps, values, order=order)
            report.limits[j] = limit
            report.deviations[j] = abs(limit - mu[j]) / mu[j]

            points = [(r.epsilon, r.abs_error) for r in rows
                      if r.abs_error >= settings.HARNESS_ERROR_FLOOR]
            if len(points) >= settings.NUMERICS_RATE_MIN_POINTS:
                report.rates[j] = fit_rate(points)

            tail = [r.abs_error for r in rows[-3:]]
            if len(tail) == 3 and not tail[0] >= tail[1] >= tail[2]:
                report.flag('error-not-monotone')

    def _compare_dirichlet(self, report):
        violations = 0
        for i, r in enumerate(report.rows):
            if r.dirichlet_value is None:
                continue
            slack = settings.NUMERICS_EIGEN_TOL * max(
                1., abs(r.dirichlet_value))
            if r.scaled_eigenvalue > r.dirichlet_value + slack:
                violations += 1
                report.rows[i] = r._replace(status='neumann-above-dirichlet')
        if violations:
            report.flag('neumann-above-dirichlet')
        report.metadata['neumann_violations'] = violations

    def _curvature_tails(self, report):
        # sensitivity to the decay of k is reported, not asserted
        tails = []
        for eps in report.epsilons():
            rows = [r for r in report.rows if r.epsilon == eps]
            L = rows[0].window_L
            tails.append([eps, L, float(np.max(np.abs(self.g.k(
                np.array([-L, L])))))])
        report.metadata['curvature_at_window'] = tails


def dirichlet_sweep(cfg):
    """
    Convergence sweep with Dirichlet ends.

    :param cfg: Study configuration
    :type cfg: :py:class:`tubespectra.harness.schema.StudyConfig`
    :rtype: :py:class:`tubespectra.harness.report.ConvergenceReport`
    :raises OutOfHypothesis: if the deformation fails validation
    :raises InadmissibleEpsilon: if an :math:`\\varepsilon` is too large
    """
    return EffectiveSweep(cfg).run('dirichlet')


def neumann_variant(cfg):
    """
    Convergence sweep with Neumann ends. Every row also carries the
    Dirichlet value on the same grid; deformations failing validation are
    computed and flagged :code:`out-of-hypothesis`.
    """
    return EffectiveSweep(cfg).run('neumann', require_hypothesis=False)


def compare_limits(report_a, report_b):
    """
    Relative deviation of the extrapolated limits of two reports for every
    common :math:`j`.

    :rtype: dict
    """
    return {j: abs(report_a.limits[j] - report_b.limits[j]) /
            abs(report_a.limits[j])
            for j in sorted(set(report_a.limits) & set(report_b.limits))}


# -----------------------------------------------------------------------------
class EssentialSpectrumCheck(Study):
    """
    For every :math:`\\varepsilon` the lowest eigenvalue
    :math:`l_0(T_\\varepsilon)` on a window and on the doubled window is
    compared with the threshold
    :math:`\\lambda_0 / \\varepsilon^2 (1/N^2 - 1/M^2)`.
    """

    NOT_CERTIFIED = 'no discrete eigenvalue certified at this eps'

    def _row(self, eps, c):
        sec = self.section
        N, M = self.g.N, self.g.M
        threshold = sec.lambda0 / eps ** 2 * (1. / N ** 2 - 1. / M ** 2)
        if not threshold > 0:
            return EssentialRow(eps, threshold, None, None, None, 0, None,
                                self.NOT_CERTIFIED)

        window = effective1d.auto_window(
            self.g, sec.constants, sec.lambda0, eps, 0, c=c,
            cap=self.cfg.grid.window_cap,
            margin=settings.HARNESS_ESSENTIAL_WINDOW_MARGIN)
        n = self.cfg.grid.n or effective1d.grid_size(
            window.length, eps, resolution=self.cfg.grid.resolution)
        if not n % 2:
            n += 1
        ops = []
        for w, size in ((window, n),
                        (effective1d.doubled_window(window), 2 * n + 1)):
            ops.append(effective1d.assemble_T(
                self.g, sec.constants, sec.lambda0, eps, window=w, n=size,
                c=c, delta=self.cfg.delta))
        l0, l0_doubled = [effective1d.spectrum(op, 0)[0].value - c
                          for op in ops]
        stability = abs(l0_doubled - l0) / abs(l0)

        certified = 0
        status = self.NOT_CERTIFIED
        if l0 < threshold and stability < settings.HARNESS_STABILITY_TOL:
            certified = sturm_count(ops[1].matrix, threshold + c)
            status = 'certified'
        return EssentialRow(eps, threshold, l0, l0_doubled, stability,
                            certified, window.halfwidth, status)

    def run(self):
        if self.g.bounded:
            raise OutOfHypothesis(
                'the essential spectrum check needs the whole line')
        self.check_admissible()
        c = self.c

        def task(eps):
            try:
                return self._row(eps, c), None
            except Error as err:
                self.logger.warning('Row eps=%r failed: %s', eps, err)
                return None, Failure(eps, 'essential', str(err))

        report = EssentialSpectrumReport()
        for row, failure in utils.ordered_map(task, self.cfg.epsilons,
                                              threads=self.threads):
            if failure is not None:
                report.failures.append(failure)
            else:
                report.rows.append(row)

        counts = [r.certified_count for r in report.rows]
        if any(b < a for a, b in zip(counts, counts[1:])):
            report.flag('certified-count-decreasing')
        if not self.validation.valid:
            report.flag('out-of-hypothesis')
        k_far = float(np.max(np.abs(self.g.k(np.asarray(
            settings.GEOMETRY_LIMSUP_SAMPLES)))))
        if not k_far < math.sqrt(settings.NUMERICS_EIGEN_TOL):
            report.flag('curvature-not-decaying')

        report.metadata.update(self.metadata())
        report.metadata.update({'c': c, 'k_far': k_far})
        return report


def essential_spectrum_check(cfg):
    """
    Certify discrete eigenvalues below the essential spectrum threshold.

    :rtype: :py:class:`tubespectra.harness.report.EssentialSpectrumReport`
    :raises OutOfHypothesis: for bounded intervals
    """
    return EssentialSpectrumCheck(cfg).run()
