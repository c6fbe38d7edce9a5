"""
Spectral toolkit for the Dirichlet Laplacian on thin deformed tubes.

The package is organised in subpackages:

    - :py:mod:`tubespectra.spectral` holds the numerical library (kernels,
      tube geometry, cross-section modes, the effective one-dimensional
      operator and the straightened three-dimensional forms).
    - :py:mod:`tubespectra.harness` orchestrates convergence studies and
      serializes their reports.
    - :py:mod:`tubespectra.cli` provides the command line front end.
    - :py:mod:`tubespectra.utils` contains general purpose facilities.
"""

__version__ = '0.3.0'
