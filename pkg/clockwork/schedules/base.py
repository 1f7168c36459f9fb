"""Base executor, cost model, run report and cost accounting
"""

import logging
import math

import numpy as np

from clockwork import tensorops
from clockwork.metrics import quantizedPixelDifference


_logger = logging.getLogger('clockwork')


DEFAULT_STAGE_COSTS = (0.59, 0.18, 0.21)
DEFAULT_FUSION_COST = 0.02

_COST_TOLERANCE = 1e-9


class CostModel:
    """Per-stage fractions of the full-frame cost

    Public attributes:
        stageCosts      tuple of nonnegative stage costs
        fusionCost      cost of upsampling and fusing the score maps
    """
    def __init__(self, stageCosts=DEFAULT_STAGE_COSTS, fusionCost=DEFAULT_FUSION_COST):
        stageCosts = tuple(float(cost) for cost in stageCosts)
        fusionCost = float(fusionCost)
        if not stageCosts:
            raise ValueError('Cost model needs at least one stage')
        if any(cost < 0 for cost in stageCosts) or fusionCost < 0:
            raise ValueError('Costs must be nonnegative, got %s + %s' % (stageCosts, fusionCost))
        total = sum(stageCosts) + fusionCost
        if not math.isclose(total, 1.0, rel_tol=0.0, abs_tol=_COST_TOLERANCE):
            raise ValueError('Stage and fusion costs must sum to 1, got %r' % total)
        self.stageCosts = stageCosts
        self.fusionCost = fusionCost

    @property
    def stageCount(self):
        return len(self.stageCosts)

    def merged(self):
        """Cost model of the 2-stage network made by merging the first two stages
        """
        if self.stageCount == 2:
            return self
        if self.stageCount != 3:
            raise ValueError('Only 3-stage cost models can be merged, got %d stages' % self.stageCount)
        first, second, third = self.stageCosts
        return CostModel((first + second, third), self.fusionCost)

    def frameCost(self, executedMask):
        """Executed stage costs plus fusion, which runs on every frame
        """
        if len(executedMask) != self.stageCount:
            raise ValueError('Execution mask has %d stages, cost model has %d' % (len(executedMask), self.stageCount))
        return sum(cost for cost, executed in zip(self.stageCosts, executedMask) if executed) + self.fusionCost

    def cumulative(self, depth):
        """Cost of the first depth stages, without fusion
        """
        return sum(self.stageCosts[:depth])

    def toDict(self):
        return {'stage_costs': list(self.stageCosts), 'fusion_cost': self.fusionCost}

    def __eq__(self, other):
        return isinstance(other, CostModel) and \
               (self.stageCosts, self.fusionCost) == (other.stageCosts, other.fusionCost)

    def __str__(self):
        return 'CostModel(%s + fusion %s)' % (', '.join('%g' % cost for cost in self.stageCosts), self.fusionCost)


def defaultCostModel(stageCount=3):
    """The cumulative 59% / 77% / 100% envelopes, with a 2% fusion share
    """
    model = CostModel()
    if stageCount == 3:
        return model
    elif stageCount == 2:
        return model.merged()
    else:
        raise ValueError('No default cost model for %d stages, configure one' % stageCount)


class RunReport:
    """Result of running a schedule over one sequence

    Public attributes:
        schedule            Schedule value
        name                sequence name
        predictions         per-frame fused argmax label maps
        executed            per-frame tuples of per-stage executed flags
        sources             per-frame tuples of the frame index each fused stage score reflects
        stageScores         per-frame lists of the fused stage score maps
        signals             per-frame adaptive gating signal, None where no clock read one
        pixelSignals        per-frame quantized pixel difference to the previous frame, None for frame 0
        frameCosts          per-frame cost series
        computeFraction     mean of frameCosts
        latency             steady-state output latency, fusion included
        quotedLatency       latency as quoted in published time columns, fusion left out of truncated and pipelined runs
        warmupLatency       latency of frame 0
        fullFrameFraction   share of frames on which the deepest stage executed
    """
    def __init__(self, schedule, name, predictions, executed, sources, stageScores, signals, pixelSignals):
        self.schedule = schedule
        self.name = name
        self.predictions = predictions
        self.executed = executed
        self.sources = sources
        self.stageScores = stageScores
        self.signals = signals
        self.pixelSignals = pixelSignals

        self.frameCosts = None
        self.computeFraction = None
        self.latency = None
        self.quotedLatency = None
        self.warmupLatency = None
        self.fullFrameFraction = sum(1 for mask in executed if mask[-1]) / len(executed)

    @property
    def frameCount(self):
        return len(self.executed)

    @property
    def stageCount(self):
        return len(self.executed[0])

    def executionCounts(self):
        """Per-stage number of frames on which the stage executed
        """
        return tuple(int(count) for count in np.sum(np.array(self.executed, dtype=np.int64), axis=0))

    def executedString(self, frameIndex):
        return ''.join('1' if flag else '0' for flag in self.executed[frameIndex])

    def __str__(self):
        res = 'RunReport %s on %s\n' % (self.schedule, self.name)
        res += ' frames: %d\n' % self.frameCount
        res += ' executions: %s\n' % (self.executionCounts(),)
        res += ' compute fraction: %s\n' % self.computeFraction
        res += ' latency: %s (quoted %s, warmup %s)\n' % (self.latency, self.quotedLatency, self.warmupLatency)
        res += ' full frame fraction: %s\n' % self.fullFrameFraction
        return res


def account(report, costModel):
    """Returns (mean compute fraction, steady-state latency, per-frame cost series)
    and stores them with the quoted and warm-up latencies in the report.
    """
    if report.stageCount != costModel.stageCount:
        raise ValueError('Report has %d stages, cost model has %d' % (report.stageCount, costModel.stageCount))

    series = [costModel.frameCost(mask) for mask in report.executed]
    mean = math.fsum(series) / len(series)

    kind = report.schedule.kind
    if kind == 'oracle':
        latency = costModel.cumulative(costModel.stageCount) + costModel.fusionCost
        quotedLatency = latency
    elif kind == 'truncated':
        quotedLatency = costModel.cumulative(report.schedule.k)
        latency = quotedLatency + costModel.fusionCost
    elif kind == 'pipeline':
        quotedLatency = max(costModel.stageCosts)
        latency = quotedLatency + costModel.fusionCost
    else:
        steady = series[1:] or series
        latency = max(steady)
        quotedLatency = latency

    report.frameCosts = series
    report.computeFraction = mean
    report.latency = latency
    report.quotedLatency = quotedLatency
    report.warmupLatency = series[0]
    return mean, latency, series


class ScheduleExecutor:
    """Base class for schedule executors.

    Subclasses implement _execute(frames), which returns per-frame
    (fused scores, executed mask, sources, stage scores, signal) tuples.
    """
    def __init__(self, net, schedule, workers=None):
        self._net = net
        self.schedule = schedule
        self._workers = workers

    @property
    def net(self):
        """Network the schedule actually runs
        """
        return self._net

    def _execute(self, frames):
        raise NotImplementedError(str(self.__class__))

    def run(self, frames, name='sequence', costModel=None):
        frames = list(frames)
        if not frames:
            raise ValueError('Cannot run %s on an empty sequence' % self.schedule)
        for index, frame in enumerate(frames):
            tensorops.checkTensor(frame, 'frame %d' % index)

        if costModel is None:
            costModel = defaultCostModel(self.net.stageCount)

        predictions = []
        executed = []
        sources = []
        stageScores = []
        signals = []
        for fused, mask, source, scores, signal in self._execute(frames):
            predictions.append(tensorops.argmaxChannels(fused))
            executed.append(tuple(bool(flag) for flag in mask))
            sources.append(tuple(source))
            stageScores.append(scores)
            signals.append(signal)

        pixelSignals = [None] + [quantizedPixelDifference(current, previous)
                                 for previous, current in zip(frames, frames[1:])]

        report = RunReport(self.schedule, name, predictions, executed, sources, stageScores, signals, pixelSignals)
        account(report, costModel)
        _logger.info('%s on %s: %d frames, compute %.4f, latency %.4f, full frames %.3f',
                     self.schedule, name, report.frameCount, report.computeFraction,
                     report.latency, report.fullFrameFraction)
        return report
