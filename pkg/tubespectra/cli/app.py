# -*- coding: utf-8 -*-
"""
*tubespectra* command line front end.

Every subcommand reads an optional study document (:code:`--config`) and
applies its flags on top of it (flags win) before the merged document is
validated.

Exit codes: 0 on success, 2 on invalid configuration or usage, 3 on
numerical failures and incomplete reports.
"""

import argparse
import copy
import os
import sys
import traceback

import numpy as np

from marshmallow import ValidationError

from tubespectra import __version__, settings, utils
from tubespectra.cli.expression import parse_expression
from tubespectra.harness import report as hreport
from tubespectra.harness import study
from tubespectra.harness.schema import (GeometrySchema, SectionSchema,
                                        load_config, read_document)
from tubespectra.spectral import cross_section, effective1d, tube3d
from tubespectra.spectral.geometry import (Interval, compare_frames,
                                           epsilon_max,
                                           frenet_from_parametric,
                                           torsion_gaps,
                                           validate_deformation)
from tubespectra.spectral.numerics import richardson_limit
from tubespectra.utils.app import App, AppError, CustomParser
from tubespectra.utils.error import ConfigurationError, Error, ExitCodes


fmt = utils.fmt_float

# (argparse dest, path into the study document)
OVERRIDES = (
    ('name', ('name', )),
    ('h', ('geometry', 'h')),
    ('k', ('geometry', 'k')),
    ('tau', ('geometry', 'tau')),
    ('alpha', ('geometry', 'alpha')),
    ('interval', ('geometry', 'interval')),
    ('unbounded', ('geometry', 'unbounded')),
    ('shape', ('section', 'shape')),
    ('radius', ('section', 'radius')),
    ('center', ('section', 'center')),
    ('x_range', ('section', 'x_range')),
    ('y_range', ('section', 'y_range')),
    ('vertices', ('section', 'vertices')),
    ('section_n', ('section', 'n')),
    ('boundary', ('section', 'boundary')),
    ('epsilons', ('epsilons', )),
    ('j_max', ('j_max', )),
    ('bc', ('bc', )),
    ('delta', ('delta', )),
    ('threads', ('threads', )),
    ('grid_n', ('grid', 'n')),
    ('resolution', ('grid', 'resolution')),
    ('window_cap', ('grid', 'window_cap')),
    ('n_s', ('tube3d', 'n_s')),
    ('n_y', ('tube3d', 'n_y')),
    ('refinement_ratio', ('tube3d', 'refinement_ratio')),
    ('out', ('output', 'path')),
    ('format', ('output', 'format')),
)


def merge_overrides(data, args):
    """
    Apply the flags of :code:`args` to the study document :code:`data`.
    Flags which were not given (:code:`None`) leave the document untouched.

    :param dict data: Study document (modified in place)
    :param args: Parsed arguments
    :type args: :py:class:`argparse.Namespace`
    :returns: :code:`data`
    """
    for dest, path in OVERRIDES:
        value = getattr(args, dest, None)
        if value is None:
            continue
        node = data
        for key in path[:-1]:
            node = node.setdefault(key, {})
            if not isinstance(node, dict):
                raise ConfigurationError(
                    '{!r} is not an object'.format(key))
        node[path[-1]] = value

    geometry = data.get('geometry')
    if isinstance(geometry, dict):
        if getattr(args, 'unbounded', None):
            geometry.pop('interval', None)
        elif getattr(args, 'interval', None) is not None:
            geometry['unbounded'] = False
    return data


def _load(schema, data, what):
    try:
        return schema.load(data)
    except ValidationError as err:
        raise ConfigurationError({what: err.messages})


# -----------------------------------------------------------------------------
class TubeSpectraApp(App):
    """
    Implementation of the *tubespectra* command line application.
    """

    PROG = 'tubespectra'

    def __init__(self, log_id=settings.TUBESPECTRA_LOG_ID, stdout=None):
        super().__init__(log_id=log_id)
        self.stdout = stdout or sys.stdout
        self.stage = 'configuration'

    def build_parser(self, parents=[]):
        """
        Configure a parser.

        :param list parents: list of parent parsers
        :returns: parser
        :rtype: :py:class:`argparse.ArgumentParser`
        """
        parser = CustomParser(
            prog=self.PROG,
            description='Spectral toolkit for thin deformed tubes.',
            parents=parents)
        parser.add_argument('--version', '-V', action='version',
                            version='%(prog)s version ' + __version__)

        config = self._config_parent()
        geometry = self._geometry_parent()
        study_ = self._study_parent()

        subparsers = parser.add_subparsers(dest='command', metavar='COMMAND',
                                           parser_class=CustomParser)
        subparsers.required = True

        p = subparsers.add_parser(
            'section', parents=[config, self._section_parent('--n')],
            help='Lowest Dirichlet modes and constants of a cross section.')
        p.add_argument('--out', type=str, metavar='PATH',
                       help=('Path of the JSON export of the ground state; '
                             'the binary dump is written next to it '
                             '(default: NAME-section.json)'))
        p.add_argument('--extrapolate', action='store_true', default=False,
                       help=('Additionally solve on the doubled resolution '
                             'and print the extrapolated lambda0.'))

        p = subparsers.add_parser(
            'geometry', parents=[config, geometry,
                                 self._section_parent('--section-n')],
            help='Validate a deformation against the hypotheses on h.')
        p.add_argument('--delta', type=float, metavar='DELTA',
                       help=('Guard used for epsilon_max; needs a section '
                             '(default: {})'.format(
                                 settings.EFFECTIVE_ZETA_GUARD)))
        p.add_argument('--curve', nargs=3, type=str, metavar='EXPR',
                       help=('Unit speed reference curve r(s) given by '
                             'three expressions; its Frenet curvature and '
                             'torsion are compared with k and tau.'))

        section = self._section_parent('--section-n')
        p = subparsers.add_parser(
            'effective', parents=[config, geometry, section, study_],
            help='Spectrum of the effective operator at a single eps.')
        p.add_argument('--bc', type=str, choices=settings.EFFECTIVE_BC_CHOICES,
                       help='Boundary condition at the ends of the window.')
        p.add_argument('--export-potential', type=str, metavar='PATH',
                       dest='export_potential',
                       help='Write the sampled potential as CSV.')

        subparsers.add_parser(
            'sweep', parents=[config, geometry, section, study_],
            help=('Dirichlet convergence sweep of the scaled eigenvalues '
                  'towards the harmonic oscillator.'))
        subparsers.add_parser(
            'neumann', parents=[config, geometry, section, study_],
            help='Neumann variant of the convergence sweep.')

        p = subparsers.add_parser(
            'tube3d', parents=[config, geometry, section, study_],
            help=('Eigenvalue witnesses of the resolvent bounds of the '
                  'straightened three-dimensional forms.'))
        p.add_argument('--study', type=str,
                       choices=tube3d.ResolventStudy.KINDS,
                       default='reduction',
                       help=('Compare ghat with T (reduction) or with g '
                             '(forms). (default: %(default)s)'))
        p.add_argument('--bc', type=str, choices=settings.EFFECTIVE_BC_CHOICES,
                       help='Boundary condition at the ends of I.')
        p.add_argument('--n-s', type=int, metavar='N', dest='n_s',
                       help=('Number of s-nodes. (default: from the grid '
                             'rule at the smallest eps)'))
        p.add_argument('--n-y', type=int, metavar='N', dest='n_y',
                       help='Section resolution of the 3D grid.')
        p.add_argument('--refinement-ratio', type=float, metavar='RATIO',
                       dest='refinement_ratio',
                       help='Ratio of the coarse to the primary grid.')
        p.add_argument('--export-matrix', type=str, metavar='PATH',
                       dest='export_matrix',
                       help=('Write the stiffness of ghat at the first eps '
                             'in coordinate format; the mass diagonal goes '
                             'to PATH.mass.'))

        subparsers.add_parser(
            'essential', parents=[config, geometry, section, study_],
            help=('Certify discrete eigenvalues below the essential '
                  'spectrum threshold (whole line only).'))

        p = subparsers.add_parser(
            'report', help='Convert a JSON report.')
        p.add_argument('--in', type=str, metavar='PATH', dest='path_in',
                       required=True, help='JSON report.')
        p.add_argument('--format', type=str,
                       choices=settings.HARNESS_REPORT_FORMATS,
                       default='csv',
                       help='Output format. (default: %(default)s)')
        p.add_argument('--out', type=str, metavar='PATH',
                       help='Output path (default: standard output).')

        return parser

    @staticmethod
    def _config_parent():
        parser = argparse.ArgumentParser(add_help=False)
        parser.add_argument('--config', type=utils.real_file_path,
                            metavar='PATH',
                            help='Study document (JSON).')
        parser.add_argument('--name', type=str,
                            help='Study name used for default file names.')
        parser.add_argument('--threads', type=int, metavar='N',
                            help=('Number of worker threads; overrides '
                                  '${}.'.format(
                                      settings.TUBESPECTRA_ENV_THREADS)))
        return parser

    @staticmethod
    def _geometry_parent():
        parser = argparse.ArgumentParser(add_help=False)
        group = parser.add_argument_group('geometry')
        for name, what in (('h', 'deformation'), ('k', 'curvature'),
                           ('tau', 'torsion'),
                           ('alpha', 'section rotation angle')):
            group.add_argument('--' + name, type=str, metavar='FUNC',
                               help=('{} as catalog identifier or '
                                     'expression in s'.format(what)))
        group.add_argument('--interval', nargs=2, type=float,
                           metavar=('A', 'B'), help='Bounded interval I.')
        group.add_argument('--unbounded', action='store_const', const=True,
                           help='I is the whole line.')
        return parser

    @staticmethod
    def _section_parent(n_flag):
        parser = argparse.ArgumentParser(add_help=False)
        group = parser.add_argument_group('cross section')
        group.add_argument('--shape', type=str,
                           choices=('disk', 'rectangle', 'polygon'))
        group.add_argument('--radius', type=float)
        group.add_argument('--center', nargs=2, type=float,
                           metavar=('Y1', 'Y2'))
        group.add_argument('--x-range', nargs=2, type=float,
                           metavar=('MIN', 'MAX'), dest='x_range')
        group.add_argument('--y-range', nargs=2, type=float,
                           metavar=('MIN', 'MAX'), dest='y_range')
        group.add_argument('--vertex', nargs=2, type=float, action='append',
                           metavar=('Y1', 'Y2'), dest='vertices',
                           help='Polygon vertex (repeat for every vertex).')
        group.add_argument(n_flag, type=int, metavar='N', dest='section_n',
                           help='Nodes along the longest side.')
        group.add_argument('--boundary', type=str,
                           choices=settings.SECTION_BOUNDARY_CHOICES)
        return parser

    @staticmethod
    def _study_parent():
        parser = argparse.ArgumentParser(add_help=False)
        group = parser.add_argument_group('study')
        group.add_argument('--eps', nargs='+', type=float, metavar='EPS',
                           dest='epsilons',
                           help='Strictly decreasing thickness parameters.')
        group.add_argument('--j-max', type=int, metavar='J', dest='j_max')
        group.add_argument('--delta', type=float,
                           help='Guard on zeta and beta.')
        group.add_argument('--grid-n', type=int, metavar='N', dest='grid_n',
                           help='Fixed number of s-nodes.')
        group.add_argument('--resolution', type=float,
                           help='Grid rule: ds <= sqrt(eps)/RESOLUTION.')
        group.add_argument('--window-cap', type=float, metavar='L',
                           dest='window_cap',
                           help='Largest truncation window on the line.')
        group.add_argument('--out', type=str, metavar='PATH',
                           help='Report path (default: NAME-COMMAND.FMT).')
        group.add_argument('--format', type=str,
                           choices=settings.HARNESS_REPORT_FORMATS)
        return parser

    # -------------------------------------------------------------------------
    def run(self):
        """
        Run application.

        :returns: Exit code
        :rtype: int
        """
        command = self.args.command
        self.logger.info('%s: Version v%s', self.PROG, __version__)
        self.logger.debug('Configuration: %r', self.args)
        try:
            return getattr(self, '_' + command)()
        except Error as err:
            self.logger.error('%s failed in stage %s: %s', command,
                              self.stage, err)
            if err.traceback:
                self.logger.error(traceback.format_exc())
            return err.exit_code
        except (np.linalg.LinAlgError, ArithmeticError, RuntimeError) as err:
            self.logger.error('%s failed in stage %s: %s: %s', command,
                              self.stage, type(err).__name__, err)
            return ExitCodes.EXIT_NUMERICAL
        except Exception as err:
            self.logger.critical('Local Exception: %s', err)
            self.logger.critical('Traceback information: %s',
                                 traceback.format_exc())
            return ExitCodes.EXIT_ERROR

    def echo(self, *lines):
        for line in lines:
            print(line, file=self.stdout)

    def _document(self):
        data = {}
        if getattr(self.args, 'config', None):
            data = copy.deepcopy(read_document(self.args.config))
        return merge_overrides(data, self.args)

    def _config(self):
        cfg = load_config(self._document())
        self.logger.debug('Study: %r', cfg)
        return cfg

    def _report_path(self, cfg):
        if cfg.output.path:
            return cfg.output.path
        return '{}-{}.{}'.format(cfg.name, self.args.command,
                                 cfg.output.format)

    def _finish(self, report, cfg):
        self.stage = 'output'
        path = self._report_path(cfg)
        hreport.emit_report(report, cfg.output.format, path)
        self.echo('report: {}'.format(path))
        if report.flags:
            self.echo('flags: {}'.format(', '.join(report.flags)))
        for failure in report.failures:
            self.echo('failed: eps={} stage={} ({})'.format(
                fmt(failure.epsilon), failure.stage, failure.reason))
        if not report.completed:
            self.logger.error('Report %r is incomplete (%d failed rows).',
                              path, len(report.failures))
            return ExitCodes.EXIT_NUMERICAL
        return ExitCodes.EXIT_SUCCESS

    # -------------------------------------------------------------------------
    def _section(self):
        data = self._document()
        sec = _load(SectionSchema(), data.get('section', {}), 'section')
        name = data.get('name', 'section')

        self.stage = 'cross_section'
        modes = cross_section.solve_modes(sec.domain, sec.n,
                                          boundary=sec.boundary)
        consts = cross_section.constants(modes)
        self.echo('domain: {}'.format(sec.domain.to_dict()),
                  'n: {} ({} nodes, boundary={})'.format(
                      sec.n, modes.grid.size, sec.boundary),
                  'lambda0: {}'.format(fmt(modes.lambda0)),
                  'lambda1: {}'.format(fmt(modes.lambda1)),
                  'gap: {}'.format(fmt(cross_section.spectral_gap(modes))),
                  'C1: {}'.format(fmt(consts.C1)),
                  'C2: {}'.format(fmt(consts.C2)),
                  'C3: {}'.format(fmt(consts.C3)),
                  'F: {} {}'.format(fmt(consts.F[0]), fmt(consts.F[1])),
                  'rho_S: {}'.format(fmt(consts.rho_S)))

        if self.args.extrapolate:
            fine = cross_section.solve_modes(sec.domain, 2 * sec.n,
                                             boundary=sec.boundary)
            limit = richardson_limit(
                [1. / sec.n, 1. / (2 * sec.n)],
                [modes.lambda0, fine.lambda0], order=2.)
            self.echo('lambda0 (n={}): {}'.format(2 * sec.n,
                                                  fmt(fine.lambda0)),
                      'lambda0 (extrapolated): {}'.format(fmt(limit)))

        self.stage = 'output'
        path = self.args.out or '{}-section.json'.format(name)
        bin_path = os.path.splitext(path)[0] + '.bin'
        cross_section.export_modes(modes, path, bin_path)
        self.echo('modes: {} ({})'.format(path, bin_path))
        return ExitCodes.EXIT_SUCCESS

    def _geometry(self):
        data = self._document()
        g = _load(GeometrySchema(), data.get('geometry', {}), 'geometry')

        self.stage = 'geometry'
        validation = validate_deformation(g.h, g.interval)
        self.echo('geometry: {!r}'.format(g),
                  validation.summary(),
                  'M: {}'.format(fmt(validation.M)),
                  'N: {}'.format(fmt(validation.N)),
                  'min h: {}'.format(fmt(validation.min_h)),
                  "sup |h'/h|: {}".format(fmt(validation.log_derivative_sup)),
                  'quadratic coefficient: {}'.format(
                      fmt(validation.quadratic_coefficient)))
        for key, value in validation.contact._asdict().items():
            self.echo('contact {}: {}'.format(key, fmt(value)))
        self.echo('sup |k h|: {}'.format(fmt(g.kh_sup())))

        if 'section' in data:
            sec = _load(SectionSchema(), data['section'], 'section')
            self.stage = 'cross_section'
            modes = cross_section.solve_modes(sec.domain, sec.n,
                                              boundary=sec.boundary)
            delta = (self.args.delta if self.args.delta is not None else
                     data.get('delta', settings.EFFECTIVE_ZETA_GUARD))
            self.stage = 'geometry'
            rho = cross_section.constants(modes).rho_S
            self.echo('epsilon_max (delta={}): {}'.format(
                fmt(delta), fmt(epsilon_max(g, delta, rho))))

        if self.args.curve:
            self._check_curve(g)

        if not validation.valid:
            return ExitCodes.EXIT_ERROR
        return ExitCodes.EXIT_SUCCESS

    def _check_curve(self, g):
        components = [parse_expression(text) for text in self.args.curve]
        window = g.interval
        if not window.bounded:
            L = settings.GEOMETRY_UNBOUNDED_HALFWIDTH
            window = Interval(-L, L)
        s = np.linspace(window.a, window.b,
                        settings.GEOMETRY_VALIDATION_SAMPLES)
        frames = frenet_from_parametric(
            lambda t: [float(f(t)) for f in components], s)
        dk, dtau = compare_frames(frames, g)
        gaps = torsion_gaps(frames)
        self.echo('curve: max |k - k(s)| = {}'.format(fmt(dk)),
                  'curve: max |tau - tau(s)| = {}'.format(fmt(dtau)),
                  'curve: torsion undefined at {} samples'.format(
                      len(gaps)))

    def _effective(self):
        cfg = self._config()
        sweep = study.EffectiveSweep(cfg)
        bc = self.args.bc or cfg.bc
        eps = cfg.epsilons[0]

        self.stage = 'cross_section'
        sec = sweep.section
        c = sweep.c
        self.stage = 'effective1d'
        window, n, values, op = sweep.scaled_values(eps, bc, c)
        mu = effective1d.weo_spectrum_exact(
            effective1d.WEOSpec(sec.lambda0, cfg.geometry.M), cfg.j_max)

        self.echo('eps: {}'.format(fmt(eps)),
                  'window: [{}, {}], n={}, bc={}'.format(
                      fmt(window.a), fmt(window.b), n, bc),
                  'lambda0: {}'.format(fmt(sec.lambda0)),
                  'c: {}'.format(fmt(c)))
        self.echo(sweep.validation.summary())
        for j, (value, m) in enumerate(zip(values, mu)):
            self.echo('j={}: eps*(l_j - c)={} mu_j={} error={}'.format(
                j, fmt(value), fmt(m), fmt(abs(value - m))))
        for warning in op.warnings:
            self.echo('warning: {}'.format(warning))

        if self.args.export_potential:
            self.stage = 'output'
            effective1d.export_potential(op.potential,
                                         self.args.export_potential)
            self.echo('potential: {}'.format(self.args.export_potential))
        return ExitCodes.EXIT_SUCCESS

    def _print_limits(self, report):
        mu = report.metadata.get('mu', [])
        for j in sorted(report.limits):
            self.echo('j={}: limit={} mu_j={} deviation={}'.format(
                j, fmt(report.limits[j]),
                fmt(mu[j]) if j < len(mu) else '',
                fmt(report.deviations.get(j))))
        for j in sorted(report.rates):
            self.echo('j={}: error rate {}'.format(
                j, fmt(report.rates[j].slope)))

    def _sweep(self):
        cfg = self._config()
        self.stage = 'harness'
        report = study.dirichlet_sweep(cfg)
        self._print_limits(report)
        return self._finish(report, cfg)

    def _neumann(self):
        cfg = self._config()
        self.stage = 'harness'
        report = study.neumann_variant(cfg)
        self._print_limits(report)
        self.echo('Neumann above Dirichlet: {} rows'.format(
            report.metadata.get('neumann_violations', 0)))
        return self._finish(report, cfg)

    def _tube3d(self):
        cfg = self._config()
        self.stage = 'tube3d'
        rstudy = tube3d.ResolventStudy.from_config(cfg)
        report = rstudy.run(self.args.study, cfg.epsilons, cfg.j_max)
        for j in sorted(report.rates):
            self.echo('j={}: witness slope {}'.format(
                j, fmt(report.rates[j].slope)))
        if self.args.export_matrix:
            self.stage = 'output'
            n_s, n_y = rstudy.resolutions[0]
            grid, modes, _, c = rstudy.setup(n_s, n_y)
            form = tube3d.assemble_ghat(cfg.geometry, modes, grid,
                                        cfg.epsilons[0], c)
            tube3d.export_coordinate(form, self.args.export_matrix,
                                     mass_path=self.args.export_matrix +
                                     '.mass')
            self.echo('matrix: {}'.format(self.args.export_matrix))
        return self._finish(report, cfg)

    def _essential(self):
        cfg = self._config()
        self.stage = 'harness'
        report = study.essential_spectrum_check(cfg)
        for row in report.rows:
            self.echo('eps={}: threshold={} l0={} count={} ({})'.format(
                fmt(row.epsilon), fmt(row.threshold), fmt(row.l0),
                row.certified_count, row.status))
        return self._finish(report, cfg)

    def _report(self):
        self.stage = 'report'
        report = hreport.load_report(self.args.path_in)
        if self.args.out:
            hreport.emit_report(report, self.args.format, self.args.out)
            self.echo('report: {}'.format(self.args.out))
        elif self.args.format == 'csv':
            self.stdout.write(hreport.to_csv(report))
        else:
            self.stdout.write(hreport.to_json(report))
        return ExitCodes.EXIT_SUCCESS


# -----------------------------------------------------------------------------
def run(argv=None, stdout=None):
    """
    Run the command line application.

    :param argv: Arguments without the program name
    :param stdout: Stream for summaries (default: standard output)
    :returns: Exit code
    :rtype: int
    """
    app = TubeSpectraApp(stdout=stdout)
    try:
        app.configure(argv)
    except AppError as err:
        print('ERROR: Application configuration failed "%s".' % err,
              file=sys.stderr)
        return ExitCodes.EXIT_ERROR
    except SystemExit as err:
        return err.code if isinstance(err.code, int) else \
            ExitCodes.EXIT_ERROR

    return app.run()


def main():
    """
    main function for the *tubespectra* command line application
    """
    sys.exit(run())


if __name__ == '__main__':
    main()
