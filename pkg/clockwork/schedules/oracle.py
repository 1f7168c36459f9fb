"""Frame oracle: the full network on every frame
"""

from clockwork.schedules import Schedule
from clockwork.schedules.base import ScheduleExecutor
from clockwork.stagenet import fullForward


class OracleExecutor(ScheduleExecutor):
    def _execute(self, frames):
        allStages = (True,) * self.net.stageCount
        for index, frame in enumerate(frames):
            outputs, fused = fullForward(self.net, frame)
            yield fused, allStages, (index,) * self.net.stageCount, [output.score for output in outputs], None


def runOracle(net, frames, costModel=None, name='sequence'):
    return OracleExecutor(net, Schedule.oracle()).run(frames, name, costModel)
