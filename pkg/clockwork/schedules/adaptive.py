"""Adaptive schedule on the clockwork FCN.

Stages up to the source stage run on every frame. Deeper stages run when
the difference signal strictly exceeds theta. The signal is the share of
changed source stage labels ('labels') or of changed quantized input
pixels ('pixels'), measured against the previous frame ('previous') or
against the frame of the last deep update ('last_update').
Frame 0 always runs every stage.
"""

from clockwork.clocks import Always, Threshold
from clockwork.machine import initialState, clockworkStep, makeClockfcnConfig
from clockwork.metrics import quantizedPixelDifference
from clockwork.schedules import Schedule, SIGNALS
from clockwork.schedules.base import ScheduleExecutor


class AdaptiveExecutor(ScheduleExecutor):
    def __init__(self, net, schedule, workers=None):
        ScheduleExecutor.__init__(self, net, schedule, workers)
        if not 0 <= schedule.sourceStage < net.stageCount - 1:
            raise ValueError('Source stage must be in [0, %d), got %s' % (net.stageCount - 1, schedule.sourceStage))
        if schedule.signal not in SIGNALS:
            raise ValueError('Adaptive signal must be one of %s, got %s' % (', '.join(SIGNALS), repr(schedule.signal)))

        source = schedule.sourceStage
        labelSource = source if schedule.signal == 'labels' else None
        clocks = [Always() for _ in range(source + 1)]
        clocks += [Threshold(schedule.theta, labelSource, schedule.reference)
                   for _ in range(source + 1, net.stageCount)]
        self._config = makeClockfcnConfig(net, clocks)

    def _pixelSignals(self, frames, index, state):
        if index == 0 or self.schedule.signal != 'pixels':
            return None
        if self.schedule.reference == 'last_update':
            reference = frames[state.lastUpdate[-1]]
        else:
            reference = frames[index - 1]
        value = quantizedPixelDifference(frames[index], reference)
        return {stage: value for stage in range(self.schedule.sourceStage + 1, self.net.stageCount)}

    def _execute(self, frames):
        state = initialState(self._config)
        deepest = self.net.stageCount - 1
        for index, frame in enumerate(frames):
            signals = self._pixelSignals(frames, index, state)
            state, fused = clockworkStep(self._config, state, frame, signals)
            yield fused, state.executed, state.lastUpdate, [output.score for output in state.outputs], \
                  state.signals.get(deepest)


def runAdaptive(net, frames, theta, sourceStage=1, signal='labels', reference='previous',
                costModel=None, name='sequence'):
    schedule = Schedule.adaptive(theta, sourceStage, signal, reference)
    return AdaptiveExecutor(net, schedule).run(frames, name, costModel)
