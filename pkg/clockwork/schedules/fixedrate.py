"""Fixed-rate schedules on the clockwork FCN: stage k runs on frames t with t % rates[k] == 0
"""

from clockwork.clocks import Modulo
from clockwork.machine import initialState, clockworkStep, makeClockfcnConfig
from clockwork.schedules import Schedule
from clockwork.schedules.base import ScheduleExecutor


def checkRates(rates, stageCount):
    """The first stage runs on every frame, unless every stage shares one rate (frame skipping)
    """
    rates = tuple(rates)
    if len(rates) != stageCount:
        raise ValueError('%d rates for a %d-stage network' % (len(rates), stageCount))
    for rate in rates:
        if not isinstance(rate, int) or rate < 1:
            raise ValueError('Rates must be integers >= 1, got %s' % (rates,))
    if rates[0] != 1 and len(set(rates)) != 1:
        raise ValueError('The first stage must run on every frame, got rates %s' % (rates,))
    return rates


class FixedRateExecutor(ScheduleExecutor):
    def __init__(self, net, schedule, workers=None):
        ScheduleExecutor.__init__(self, net, schedule, workers)
        rates = checkRates(schedule.rates, net.stageCount)
        self._config = makeClockfcnConfig(net, [Modulo(rate) for rate in rates])

    def _execute(self, frames):
        state = initialState(self._config)
        for frame in frames:
            state, fused = clockworkStep(self._config, state, frame)
            yield fused, state.executed, state.lastUpdate, [output.score for output in state.outputs], None


def runFixedRate(net, frames, rates, costModel=None, name='sequence'):
    return FixedRateExecutor(net, Schedule.fixedRate(rates)).run(frames, name, costModel)
