# -*- coding: utf-8 -*-
"""
General purpose utils for *tubespectra*.
"""

import argparse
import logging
import os

from multiprocessing.pool import ThreadPool

from tubespectra import settings


# module level logger
logger = logging.getLogger('tubespectra.utils')


# -----------------------------------------------------------------------------
def realpath(p):
    return os.path.realpath(os.path.expanduser(p))


def real_file_path(path):
    """
    Check if file exists.

    :param str path: Path to be checked
    :returns: realpath in case the file exists
    :rtype: str
    :raises argparse.ArgumentTypeError: if file does not exist
    """
    path = realpath(path)
    if not os.path.isfile(path):
        raise argparse.ArgumentTypeError(
            'No such file: {!r}'.format(path))
    return path


def fmt_float(value):
    """
    Format a float with the package wide number of significant digits.

    :param float value: Value to be formatted
    :rtype: str
    """
    if value is None:
        return ''
    return settings.TUBESPECTRA_FLOAT_FORMAT % value


def thread_count(requested=None):
    """
    Resolve the number of worker threads.

    An explicitly requested value wins over the
    :code:`TUBESPECTRA_THREADS` environment variable which wins over the
    package default.

    :param requested: Explicitly requested number of threads
    :type requested: int or None
    :rtype: int
    """
    if requested:
        return max(1, int(requested))

    env = os.environ.get(settings.TUBESPECTRA_ENV_THREADS)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            logger.warning('Ignoring invalid %s=%r.',
                           settings.TUBESPECTRA_ENV_THREADS, env)

    return settings.TUBESPECTRA_DEFAULT_THREADS


def ordered_map(func, items, threads=1):
    """
    Apply :code:`func` to every item, concurrently on a
    :py:class:`multiprocessing.pool.ThreadPool` if :code:`threads > 1`.

    :returns: Results in the order of :code:`items`
    :rtype: list
    """
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [func(item) for item in items]

    pool = ThreadPool(processes=min(threads, len(items)))
    try:
        results = [pool.apply_async(func, (item,)) for item in items]
        pool.close()
        return [result.get() for result in results]
    finally:
        pool.terminate()
        pool.join()
