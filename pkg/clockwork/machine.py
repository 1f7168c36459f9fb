"""Generalized clockwork state machine.

A configuration is a list of modules. Every module has four functions and
three clocks:

    y_H(t) = fT( C_H(t) * fH(y_H(t-1)) + C_I(t) * fI(x(t)) )
    y_O(t) = fO( C_O(t) * y_H(t) )

Masks are branches: a module whose clocks do not fire is not evaluated and
keeps its previous state object. Three presets exist: the simple recurrent
network, the clockwork RN and the clockwork FCN.
"""

import collections
import logging

import numpy as np

from clockwork import tensorops
from clockwork.clocks import Always, Modulo, Counter
from clockwork.metrics import scoreMapDistance
from clockwork.stagenet import StageOutput, forwardStage, fuseScores


_logger = logging.getLogger('clockwork')


PRESETS = ('srn', 'clockrn', 'clockfcn')
COMBINE_RULES = ('sum', 'select')
ROUTINGS = ('shared', 'chained')
READOUTS = ('concat', 'fuse')

MAX_RN_DIM = 64


class Identity:
    def __call__(self, value):
        return value

    def __eq__(self, other):
        return isinstance(other, Identity)

    def __str__(self):
        return 'I'


class Linear:
    """Multiplication by a dense matrix

    Public attributes:
        weights     (out, in) float64 matrix
    """
    def __init__(self, weights):
        self.weights = np.array(weights, dtype=np.float64, ndmin=2)

    def __call__(self, value):
        value = np.asarray(value, dtype=np.float64)
        if value.shape != (self.weights.shape[1],):
            raise ValueError('Linear map expects a vector of %d values, got shape %s' %
                             (self.weights.shape[1], value.shape))
        return self.weights @ value

    def __eq__(self, other):
        return isinstance(other, Linear) and np.array_equal(self.weights, other.weights)

    def __str__(self):
        return 'W%s' % (self.weights.shape,)


class Tanh:
    def __call__(self, value):
        return np.tanh(value)

    def __eq__(self, other):
        return isinstance(other, Tanh)

    def __str__(self):
        return 'TanH'


class Relu:
    """Rectifier. On a stage output it rectifies the features and passes the score through
    """
    def __call__(self, value):
        if isinstance(value, StageOutput):
            return StageOutput(tensorops.relu(value.features), value.score)
        return np.maximum(value, 0)

    def __eq__(self, other):
        return isinstance(other, Relu)

    def __str__(self):
        return 'ReLU'


class StageComposition:
    """Stage k of a staged network applied to the output of stage k-1

    Public attributes:
        net
        stageIndex
    """
    def __init__(self, net, stageIndex):
        if not 0 <= stageIndex < net.stageCount:
            raise ValueError('Stage index %d out of range for %d-stage network' % (stageIndex, net.stageCount))
        self.net = net
        self.stageIndex = stageIndex

    def __call__(self, value):
        return forwardStage(self.net, self.stageIndex, value)

    def __eq__(self, other):
        return isinstance(other, StageComposition) and \
               self.net is other.net and \
               self.stageIndex == other.stageIndex

    def __str__(self):
        return 'stage%d' % self.stageIndex


class ModuleConfig:
    """Functions and clocks of one module

    Public attributes:
        fI, fH, fO, fT                  callables
        clockI, clockH, clockO          Clock values
    """
    def __init__(self, fI, fH, fO, fT, clockI, clockH, clockO):
        slots = (fI, fH, fO, fT, clockI, clockH, clockO)
        if any(slot is None for slot in slots):
            raise ValueError('Module config needs all seven slots, got %s' % (slots,))
        self.fI = fI
        self.fH = fH
        self.fO = fO
        self.fT = fT
        self.clockI = clockI
        self.clockH = clockH
        self.clockO = clockO

    def clocks(self):
        return (self.clockI, self.clockH, self.clockO)

    def __str__(self):
        return 'fI=%s fH=%s fO=%s fT=%s C_I=%s C_H=%s C_O=%s' % \
                    (self.fI, self.fH, self.fO, self.fT, self.clockI, self.clockH, self.clockO)


class ClockworkConfig:
    """Complete clockwork configuration

    Public attributes:
        preset          'srn', 'clockrn', 'clockfcn' or 'custom'
        modules         list of ModuleConfig
        combine         'sum' adds the fired terms, 'select' takes exactly one of them
        routing         'shared': every module reads x(t),
                        'chained': module k reads the output of module k-1
        readout         'concat' joins module outputs, 'fuse' fuses their score maps
        initialHidden   per-module y_H(0)
        net             staged network for the 'fuse' readout
    """
    def __init__(self, preset, modules, combine, routing, readout, initialHidden, net=None):
        if preset not in PRESETS + ('custom',):
            raise KeyError('Unknown clockwork preset %s' % repr(preset))
        if not modules:
            raise ValueError('Clockwork config needs at least one module')
        if combine not in COMBINE_RULES:
            raise ValueError('Combine rule must be one of %s, got %s' % (', '.join(COMBINE_RULES), repr(combine)))
        if routing not in ROUTINGS:
            raise ValueError('Routing must be one of %s, got %s' % (', '.join(ROUTINGS), repr(routing)))
        if readout not in READOUTS:
            raise ValueError('Readout must be one of %s, got %s' % (', '.join(READOUTS), repr(readout)))
        if len(initialHidden) != len(modules):
            raise ValueError('%d initial hidden states for %d modules' % (len(initialHidden), len(modules)))
        if readout == 'fuse' and (net is None or net.stageCount != len(modules)):
            raise ValueError('Fusing readout needs a network with one stage per module')

        self.preset = preset
        self.modules = list(modules)
        self.combine = combine
        self.routing = routing
        self.readout = readout
        self.initialHidden = list(initialHidden)
        self.net = net

    @property
    def moduleCount(self):
        return len(self.modules)

    def __str__(self):
        res = 'ClockworkConfig %s (%s, %s, %s)\n' % (self.preset, self.combine, self.routing, self.readout)
        for index, module in enumerate(self.modules):
            res += ' %d: %s\n' % (index, module)
        return res


ClockworkState = collections.namedtuple('ClockworkState',
                                        ['t',           # index of the next input
                                         'hidden',      # per-module y_H
                                         'outputs',     # per-module y_O
                                         'lastUpdate',  # per-module step of the last input evaluation, -1 before
                                         'executed',    # per-module flags of the last step
                                         'anchors',     # per-module source labels at its last update
                                         'signals'])    # per-module signals used by the last step


def initialState(config):
    count = config.moduleCount
    return ClockworkState(t=0,
                          hidden=tuple(config.initialHidden),
                          outputs=(None,) * count,
                          lastUpdate=(-1,) * count,
                          executed=(False,) * count,
                          anchors=(None,) * count,
                          signals={})


def _downstream(value):
    return value.features if isinstance(value, StageOutput) else value


def _labels(value):
    return tensorops.argmaxChannels(value.score)


def _needsSignal(module):
    return any(clock.needsSignal for clock in module.clocks())


def _gatingClock(module):
    for clock in module.clocks():
        while isinstance(clock, Counter):
            clock = clock.clock
        if clock.needsSignal:
            return clock
    return None


def _moduleSignal(index, module, state, newHidden, signals):
    """Signal for the threshold clocks of one module
    """
    if signals and index in signals:
        return signals[index]

    clock = _gatingClock(module)
    source = clock.sourceStage
    if source is None or not 0 <= source < index or not isinstance(newHidden[source], StageOutput):
        raise ValueError('Threshold clock of module %d needs a signal, and no preceding source stage computes one' %
                         index)

    current = _labels(newHidden[source])
    if clock.reference == 'last_update':
        reference = state.anchors[index]
    else:
        reference = _labels(state.hidden[source])
    return scoreMapDistance(current, reference)


def _readout(config, outputs, x):
    if config.readout == 'fuse':
        return fuseScores(config.net, [output.score for output in outputs], x.shape[1:])
    else:
        return np.concatenate([np.atleast_1d(output) for output in outputs])


def clockworkStep(config, state, x, signals=None):
    """One step of the clockwork equations on input x.
    Returns (new state, output). All modules compute at t = 0.

    signals optionally maps module index to the difference signal of its
    threshold clocks.
    """
    if len(state.hidden) != config.moduleCount:
        raise ValueError('State has %d modules, config has %d' % (len(state.hidden), config.moduleCount))

    t = state.t
    first = t == 0
    hidden = list(state.hidden)
    outputs = list(state.outputs)
    lastUpdate = list(state.lastUpdate)
    anchors = list(state.anchors)
    executed = [False] * config.moduleCount
    usedSignals = {}

    if config.combine == 'sum':
        previousConcat = np.concatenate([np.atleast_1d(value) for value in state.hidden])

    for index, module in enumerate(config.modules):
        if config.routing == 'chained' and index > 0:
            input = _downstream(outputs[index - 1])
        else:
            input = x

        if first:
            fireI = True
            fireH = config.combine == 'sum'
            fireO = True
        else:
            signal = None
            if _needsSignal(module):
                signal = _moduleSignal(index, module, state, hidden, signals)
                usedSignals[index] = signal
            fireI = module.clockI.fires(t, signal)
            fireH = module.clockH.fires(t, signal)
            fireO = module.clockO.fires(t, signal)

        if config.combine == 'select':
            if fireI and fireH:
                raise ValueError('Input and hidden clocks of module %d both fire at t=%d' % (index, t))
            if fireI:
                hidden[index] = module.fT(module.fI(input))
            elif fireH:
                hidden[index] = module.fT(module.fH(state.hidden[index]))
        elif fireI or fireH:
            total = np.zeros_like(np.atleast_1d(state.hidden[index]), dtype=np.float64)
            if fireH:
                total = total + module.fH(previousConcat)
            if fireI:
                total = total + module.fI(input)
            if total.shape != np.shape(state.hidden[index]):
                raise ValueError('Module %d update has shape %s, its hidden state has %s' %
                                 (index, total.shape, np.shape(state.hidden[index])))
            hidden[index] = module.fT(total)

        if fireI:
            executed[index] = True
            lastUpdate[index] = t
            clock = _gatingClock(module)
            if clock is not None and clock.sourceStage is not None and \
               0 <= clock.sourceStage <= index and isinstance(hidden[clock.sourceStage], StageOutput):
                anchors[index] = _labels(hidden[clock.sourceStage])

        if fireO or outputs[index] is None:
            outputs[index] = module.fO(hidden[index])

    if _logger.isEnabledFor(logging.DEBUG):
        _logger.debug('step t=%d executed %s signals %s', t,
                      ''.join('1' if flag else '0' for flag in executed), usedSignals)

    newState = ClockworkState(t=t + 1,
                              hidden=tuple(hidden),
                              outputs=tuple(outputs),
                              lastUpdate=tuple(lastUpdate),
                              executed=tuple(executed),
                              anchors=tuple(anchors),
                              signals=usedSignals)
    return newState, _readout(config, outputs, x)


def makeSrnConfig(dim, inputWeights, hiddenWeights):
    """Simple recurrent network: y_H(t) = tanh(W_H y_H(t-1) + W_I x(t)), every clock always on
    """
    inputWeights = np.array(inputWeights, dtype=np.float64, ndmin=2)
    hiddenWeights = np.array(hiddenWeights, dtype=np.float64, ndmin=2)
    _checkRnDims(dim, inputWeights, hiddenWeights)

    always = Always()
    module = ModuleConfig(Linear(inputWeights), Linear(hiddenWeights), Identity(), Tanh(),
                          always, always, always)
    return ClockworkConfig('srn', [module], 'sum', 'shared', 'concat', [np.zeros(dim)])


def _checkRnDims(dim, inputWeights, hiddenWeights):
    if not 1 <= dim <= MAX_RN_DIM:
        raise ValueError('Recurrent state dim must be in [1, %d], got %d' % (MAX_RN_DIM, dim))
    if hiddenWeights.shape != (dim, dim):
        raise ValueError('W_H must be %dx%d, got %s' % (dim, dim, hiddenWeights.shape))
    if inputWeights.shape[0] != dim:
        raise ValueError('W_I must have %d rows, got shape %s' % (dim, inputWeights.shape))


def _isPowerOfTwo(value):
    return value >= 1 and value & (value - 1) == 0


def makeClockrnConfig(dim, inputWeights, hiddenWeights, moduleRates=None, moduleCount=3):
    """Clockwork RN: the hidden vector is split into equal modules, module k
    runs at moduleRates[k] and reads its own state and the state of the slower modules.
    One Modulo clock per module gates input, hidden and output.
    """
    if moduleRates is None:
        moduleRates = tuple(2 ** index for index in range(moduleCount))
    moduleRates = tuple(moduleRates)

    inputWeights = np.array(inputWeights, dtype=np.float64, ndmin=2)
    hiddenWeights = np.array(hiddenWeights, dtype=np.float64, ndmin=2)
    _checkRnDims(dim, inputWeights, hiddenWeights)

    if not moduleRates:
        raise ValueError('Clockwork RN needs at least one module')
    for rate in moduleRates:
        if not isinstance(rate, (int, np.integer)) or not _isPowerOfTwo(rate):
            raise ValueError('Clockwork RN rates must be powers of two, got %s' % (moduleRates,))
    for fast, slow in zip(moduleRates, moduleRates[1:]):
        if slow <= fast:
            raise ValueError('Clockwork RN rates must strictly increase, got %s' % (moduleRates,))
    if dim % len(moduleRates):
        raise ValueError('Dim %d is not divisible into %d modules' % (dim, len(moduleRates)))

    size = dim // len(moduleRates)
    modules = []
    initial = []
    for index, rate in enumerate(moduleRates):
        rows = slice(index * size, (index + 1) * size)
        blockHidden = hiddenWeights[rows].copy()
        blockHidden[:, :index * size] = 0.0
        clock = Modulo(rate)
        modules.append(ModuleConfig(Linear(inputWeights[rows]), Linear(blockHidden), Identity(), Tanh(),
                                    clock, clock, clock))
        initial.append(np.zeros(size))

    return ClockworkConfig('clockrn', modules, 'sum', 'shared', 'concat', initial)


def makeClockfcnConfig(net, clocks):
    """Clockwork FCN: stage k computes from the stage k-1 output when clocks[k]
    fires and persists its cache through the counter-clock otherwise.
    Output clocks are always on, the readout fuses the stage scores.
    """
    clocks = list(clocks)
    if len(clocks) != net.stageCount:
        raise ValueError('%d clocks for a %d-stage network' % (len(clocks), net.stageCount))

    modules = [ModuleConfig(StageComposition(net, index), Identity(), Relu(), Identity(),
                            clock, Counter(clock), Always())
               for index, clock in enumerate(clocks)]
    return ClockworkConfig('clockfcn', modules, 'select', 'chained', 'fuse',
                           [None] * net.stageCount, net=net)


def makePresetConfig(preset, *args, **kwargs):
    """Build a preset config by name. Raises KeyError for unknown names
    """
    if preset == 'srn':
        return makeSrnConfig(*args, **kwargs)
    elif preset == 'clockrn':
        return makeClockrnConfig(*args, **kwargs)
    elif preset == 'clockfcn':
        return makeClockfcnConfig(*args, **kwargs)
    else:
        raise KeyError('Unknown clockwork preset %s' % repr(preset))


def runSequence(config, inputs, signals=None):
    """Step through inputs from the initial state.
    signals, if given, holds one per-module signal dict per input.
    Returns (per-step outputs, per-step states)
    """
    state = initialState(config)
    outputs = []
    states = []
    for index, x in enumerate(inputs):
        stepSignals = signals[index] if signals is not None else None
        state, output = clockworkStep(config, state, x, stepSignals)
        outputs.append(output)
        states.append(state)
    return outputs, states
