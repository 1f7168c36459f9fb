"""Truncated baseline: only the first k stages run, only their scores are fused
"""

from clockwork.schedules import Schedule
from clockwork.schedules.base import ScheduleExecutor
from clockwork.stagenet import forwardStage, fuseScores


class TruncatedExecutor(ScheduleExecutor):
    def __init__(self, net, schedule, workers=None):
        ScheduleExecutor.__init__(self, net, schedule, workers)
        if not 1 <= schedule.k < net.stageCount:
            raise ValueError('Truncation depth must be in [1, %d), got %s' % (net.stageCount, schedule.k))

    def _execute(self, frames):
        depth = self.schedule.k
        mask = (True,) * depth + (False,) * (self.net.stageCount - depth)
        for index, frame in enumerate(frames):
            scores = []
            input = frame
            for stageIndex in range(depth):
                features, score = forwardStage(self.net, stageIndex, input)
                scores.append(score)
                input = features
            fused = fuseScores(self.net, scores, frame.shape[1:], depth)
            sources = (index,) * depth + (-1,) * (self.net.stageCount - depth)
            yield fused, mask, sources, scores, None


def runTruncated(net, frames, k, costModel=None, name='sequence'):
    return TruncatedExecutor(net, Schedule.truncated(k)).run(frames, name, costModel)
