"""Schedules decide which stages of a staged network run on each frame.

Available schedules are oracle, truncated, pipeline, fixed_rate (with the
exponential, alternating and skip_frame presets) and adaptive.
"""

import logging

from clockwork.schedules.base import CostModel, RunReport, account, defaultCostModel


_logger = logging.getLogger('clockwork')


KINDS = ('oracle', 'truncated', 'pipeline', 'fixed_rate', 'adaptive')
SIGNALS = ('labels', 'pixels')

NAMES = ('oracle', 'truncated', 'pipeline', 'pipeline2', 'pipeline3',
         'fixed_rate', 'exponential', 'alternating', 'skip_frame', 'adaptive')

DEFAULT_THETA = 0.25


class Schedule:
    """Schedule value

    Public attributes:
        kind            one of KINDS
        name            name the schedule was created with
        k               stage count for truncated and pipeline schedules
        rates           per-stage rates of fixed-rate schedules
        theta           adaptive threshold
        sourceStage     stage whose labels drive the adaptive clocks
        signal          'labels' or 'pixels'
        reference       'previous' or 'last_update'
    """
    def __init__(self, kind, name=None, k=None, rates=None, theta=None, sourceStage=None,
                 signal='labels', reference='previous'):
        if kind not in KINDS:
            raise KeyError('Schedule %s not found' % repr(kind))
        self.kind = kind
        self.name = name or kind
        self.k = k
        self.rates = tuple(rates) if rates is not None else None
        self.theta = theta
        self.sourceStage = sourceStage
        self.signal = signal
        self.reference = reference

    @classmethod
    def oracle(cls):
        return cls('oracle')

    @classmethod
    def truncated(cls, k):
        return cls('truncated', k=k)

    @classmethod
    def pipeline(cls, k):
        return cls('pipeline', name='pipeline%d' % k, k=k)

    @classmethod
    def fixedRate(cls, rates, name='fixed_rate'):
        return cls('fixed_rate', name=name, rates=rates)

    @classmethod
    def exponential(cls, stageCount=3):
        return cls.fixedRate([2 ** index for index in range(stageCount)], 'exponential')

    @classmethod
    def alternating(cls, stageCount=3):
        return cls.fixedRate([1] * (stageCount - 1) + [2], 'alternating')

    @classmethod
    def skipFrame(cls, stageCount=3):
        return cls.fixedRate([2] * stageCount, 'skip_frame')

    @classmethod
    def adaptive(cls, theta, sourceStage=1, signal='labels', reference='previous'):
        return cls('adaptive', theta=theta, sourceStage=sourceStage, signal=signal, reference=reference)

    def withTheta(self, theta):
        return Schedule('adaptive', self.name, theta=theta, sourceStage=self.sourceStage,
                        signal=self.signal, reference=self.reference)

    def toDict(self):
        result = {'name': self.name, 'kind': self.kind}
        if self.kind in ('truncated', 'pipeline'):
            result['k'] = self.k
        elif self.kind == 'fixed_rate':
            result['rates'] = list(self.rates)
        elif self.kind == 'adaptive':
            result.update(theta=self.theta, source_stage=self.sourceStage,
                          signal=self.signal, reference=self.reference)
        return result

    def __eq__(self, other):
        return isinstance(other, Schedule) and self.toDict() == other.toDict()

    def __str__(self):
        if self.kind in ('truncated', 'pipeline'):
            return '%s(%d)' % (self.kind, self.k)
        elif self.kind == 'fixed_rate':
            return '%s%s' % (self.name, self.rates)
        elif self.kind == 'adaptive':
            return 'adaptive(theta=%s, source=%s, %s, %s)' % (self.theta, self.sourceStage,
                                                              self.signal, self.reference)
        return self.kind


def parseSchedule(description, stageCount=3):
    """Schedule from a config dict with a 'name' and its parameters.
    Raises KeyError for unknown names, ValueError for bad parameters.
    """
    name = description.get('name', 'oracle')
    if name == 'oracle':
        return Schedule.oracle()
    elif name == 'truncated':
        return Schedule.truncated(int(description.get('k', 1)))
    elif name in ('pipeline', 'pipeline2', 'pipeline3'):
        k = int(name[-1]) if name != 'pipeline' else int(description.get('k', stageCount))
        return Schedule.pipeline(k)
    elif name == 'fixed_rate':
        if 'rates' not in description:
            raise ValueError('fixed_rate schedule needs rates')
        return Schedule.fixedRate([int(rate) for rate in description['rates']])
    elif name == 'exponential':
        return Schedule.exponential(stageCount)
    elif name == 'alternating':
        return Schedule.alternating(stageCount)
    elif name == 'skip_frame':
        return Schedule.skipFrame(stageCount)
    elif name == 'adaptive':
        return Schedule.adaptive(float(description.get('theta', DEFAULT_THETA)),
                                 int(description.get('source_stage', stageCount - 2)),
                                 description.get('signal', 'labels'),
                                 description.get('reference', 'previous'))
    else:
        raise KeyError('Schedule %s not found. Available: %s' % (repr(name), ', '.join(NAMES)))


def _getExecutor(net, schedule, workers=None):
    """Executor instance for schedule.kind. Raise KeyError if not found
    """
    if schedule.kind == 'oracle':
        from clockwork.schedules.oracle import OracleExecutor as executorClass
    elif schedule.kind == 'truncated':
        from clockwork.schedules.truncated import TruncatedExecutor as executorClass
    elif schedule.kind == 'pipeline':
        from clockwork.schedules.pipeline import PipelineExecutor as executorClass
    elif schedule.kind == 'fixed_rate':
        from clockwork.schedules.fixedrate import FixedRateExecutor as executorClass
    elif schedule.kind == 'adaptive':
        from clockwork.schedules.adaptive import AdaptiveExecutor as executorClass
    else:
        raise KeyError('Schedule %s not found' % schedule.kind)

    return executorClass(net, schedule, workers)


def runSchedule(net, frames, schedule, costModel=None, name='sequence', workers=None):
    """Run schedule over frames and account its cost. Returns RunReport
    """
    executor = _getExecutor(net, schedule, workers)
    return executor.run(frames, name, costModel)
