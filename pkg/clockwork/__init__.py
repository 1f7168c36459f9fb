"""clockwork --- staged network execution under clock schedules
===============================================================

Runs staged feed-forward networks over frame sequences. Stages execute
under fixed, pipelined or data-adaptive clocks, cached stage scores are
fused into a per-frame output, and every run is accounted for accuracy,
computation and latency.
"""

import os
import logging

import clockwork.version


VERSION = clockwork.version.VERSION


logger = logging.getLogger('clockwork')
consoleHandler = logging.StreamHandler()
consoleHandler.setFormatter(logging.Formatter("clockwork: %(message)s"))
logger.addHandler(consoleHandler)

logger.setLevel(logging.ERROR)


def threadCount(requested=None):
    """Worker thread count.

    Explicit request wins, then CWK_THREADS. 0 or unset means os.cpu_count()
    """
    if requested is None:
        value = os.environ.get('CWK_THREADS', '0')
        try:
            requested = int(value)
        except ValueError:
            logger.warning('Invalid CWK_THREADS value %s, ignored', repr(value))
            requested = 0

    if requested < 0:
        raise ValueError('Thread count must be >= 0, got %d' % requested)

    if requested == 0:
        return os.cpu_count() or 1
    return requested
