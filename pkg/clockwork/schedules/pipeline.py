"""Pipelined execution.

Every stage runs on every frame, but stage k consumes what stage k-1
produced on the previous step, so at frame i it reflects frame i-k.
Frame 0 runs all stages sequentially to fill the caches. Stage evaluations
of one step are independent and may run on a thread pool.
"""

import concurrent.futures
import logging

from clockwork.schedules import Schedule
from clockwork.schedules.base import ScheduleExecutor
from clockwork.stagenet import StageCache, forwardStage, fullForward, fuseScores, mergeStages


_logger = logging.getLogger('clockwork')


PIPELINE_DEPTHS = (2, 3)


class PipelineExecutor(ScheduleExecutor):
    def __init__(self, net, schedule, workers=None):
        if schedule.k not in PIPELINE_DEPTHS:
            raise ValueError('Pipeline depth must be 2 or 3, got %s' % schedule.k)
        if schedule.k == net.stageCount:
            pipelined = net
        elif schedule.k == 2 and net.stageCount == 3:
            pipelined = mergeStages(net)
        else:
            raise ValueError('Cannot pipeline a %d-stage network in %d stages' % (net.stageCount, schedule.k))
        ScheduleExecutor.__init__(self, pipelined, schedule, workers)

    def run(self, frames, name='sequence', costModel=None):
        if costModel is not None and costModel.stageCount != self.net.stageCount:
            costModel = costModel.merged()
        return ScheduleExecutor.run(self, frames, name, costModel)

    def _evaluate(self, pool, inputs):
        stageIndices = range(self.net.stageCount)
        if pool is None:
            return [forwardStage(self.net, index, inputs[index]) for index in stageIndices]
        return list(pool.map(lambda index: forwardStage(self.net, index, inputs[index]), stageIndices))

    def _execute(self, frames):
        if self._workers is not None and self._workers > 1:
            with concurrent.futures.ThreadPoolExecutor(max_workers=self._workers) as pool:
                yield from self._steps(frames, pool)
        else:
            yield from self._steps(frames, None)

    def _steps(self, frames, pool):
        stageCount = self.net.stageCount
        cache = StageCache(stageCount)
        allStages = (True,) * stageCount

        outputs, fused = fullForward(self.net, frames[0])
        for index, output in enumerate(outputs):
            cache.store(index, output, 0)
        yield fused, allStages, cache.sources(), cache.scores(), None

        for frameIndex in range(1, len(frames)):
            inputs = [frames[frameIndex]] + [cache.output(index).features for index in range(stageCount - 1)]
            reflected = (frameIndex,) + cache.sources()[:-1]
            outputs = self._evaluate(pool, inputs)
            for index, output in enumerate(outputs):
                cache.store(index, output, reflected[index])

            fused = fuseScores(self.net, cache.scores(), frames[frameIndex].shape[1:])
            yield fused, allStages, cache.sources(), cache.scores(), None


def runPipeline(net, frames, kStages, costModel=None, name='sequence', workers=None):
    return PipelineExecutor(net, Schedule.pipeline(kStages), workers).run(frames, name, costModel)
