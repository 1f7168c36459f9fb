#!/usr/bin/env python3

import unittest

import numpy as np

import base

from clockwork.clocks import Always, Modulo, Threshold, Counter
from clockwork.machine import ClockworkConfig, ModuleConfig, Identity, Relu, StageComposition, \
                              initialState, clockworkStep, runSequence, \
                              makeSrnConfig, makeClockrnConfig, makeClockfcnConfig, makePresetConfig
from clockwork.stagenet import fullForward


class Srn(unittest.TestCase):
    def test_FirstStep(self):
        config = makeSrnConfig(1, [[1.0]], [[1.0]])
        state, output = clockworkStep(config, initialState(config), np.array([1.0]))
        self.assertAlmostEqual(state.hidden[0][0], np.tanh(1.0))
        self.assertAlmostEqual(output[0], np.tanh(1.0))
        self.assertEqual(state.t, 1)

    def test_Recurrence(self):
        config = makeSrnConfig(1, [[1.0]], [[1.0]])
        outputs, states = runSequence(config, [np.array([1.0]), np.array([0.0])])
        self.assertAlmostEqual(outputs[1][0], np.tanh(np.tanh(1.0)))

    def test_MatchesReference(self):
        rng = np.random.default_rng(0)
        inputWeights = rng.standard_normal((4, 3))
        hiddenWeights = rng.standard_normal((4, 4)) / 2
        inputs = [rng.standard_normal(3) for _ in range(6)]
        outputs, states = runSequence(makeSrnConfig(4, inputWeights, hiddenWeights), inputs)

        hidden = np.zeros(4)
        for x, output in zip(inputs, outputs):
            hidden = np.tanh(hiddenWeights @ hidden + inputWeights @ x)
            self.assertTrue(np.allclose(output, hidden))

    def test_WrongInput(self):
        config = makeSrnConfig(1, [[1.0]], [[1.0]])
        with self.assertRaises(ValueError):
            clockworkStep(config, initialState(config), np.array([1.0, 2.0]))

    def test_Dims(self):
        with self.assertRaises(ValueError):
            makeSrnConfig(65, np.zeros((65, 1)), np.zeros((65, 65)))
        with self.assertRaises(ValueError):
            makeSrnConfig(2, np.zeros((2, 1)), np.zeros((3, 3)))


class ClockRn(unittest.TestCase):
    def setUp(self):
        rng = np.random.default_rng(1)
        self.inputWeights = rng.standard_normal((6, 2))
        self.hiddenWeights = rng.standard_normal((6, 6)) / 3
        self.config = makeClockrnConfig(6, self.inputWeights, self.hiddenWeights)
        self.inputs = [rng.standard_normal(2) for _ in range(16)]

    def test_Rates(self):
        self.assertEqual([module.clockI for module in self.config.modules], [Modulo(1), Modulo(2), Modulo(4)])
        for module in self.config.modules:
            self.assertIs(module.clockI, module.clockH)
            self.assertIs(module.clockI, module.clockO)

    def test_Nesting(self):
        outputs, states = runSequence(self.config, self.inputs)
        counts = [0, 0, 0]
        for state in states:
            executed = state.executed
            self.assertTrue(executed[0] or not executed[1])
            self.assertTrue(executed[1] or not executed[2])
            counts = [count + flag for count, flag in zip(counts, executed)]
        self.assertEqual(counts, [16, 8, 4])

    def test_SlowModulesOnly(self):
        blockHidden = self.config.modules[1].fH.weights
        self.assertFalse(blockHidden[:, :2].any())
        self.assertTrue(np.array_equal(blockHidden[:, 2:], self.hiddenWeights[2:4, 2:]))
        self.assertFalse(self.config.modules[2].fH.weights[:, :4].any())

    def test_Persistence(self):
        outputs, states = runSequence(self.config, self.inputs[:3])
        self.assertIs(states[1].hidden[1], states[0].hidden[1])
        self.assertIs(states[1].hidden[2], states[0].hidden[2])
        self.assertIs(states[2].hidden[2], states[0].hidden[2])
        self.assertIsNot(states[2].hidden[1], states[0].hidden[1])

    def test_InvalidRates(self):
        for rates in ((1, 3, 4), (2, 1), (1, 1)):
            with self.assertRaises(ValueError):
                makeClockrnConfig(6, self.inputWeights, self.hiddenWeights, moduleRates=rates)
        with self.assertRaises(ValueError):
            makeClockrnConfig(7, np.zeros((7, 2)), np.zeros((7, 7)))


class ClockFcn(unittest.TestCase):
    def setUp(self):
        self.net = base.toyNet()
        rng = np.random.default_rng(2)
        self.frames = [base.randomTensor(rng, 3, 32, 32, 0.0, 1.0) for _ in range(4)]

    def test_Slots(self):
        clocks = [Always(), Modulo(2), Modulo(4)]
        config = makeClockfcnConfig(self.net, clocks)
        self.assertEqual((config.combine, config.routing, config.readout), ('select', 'chained', 'fuse'))
        for index, (module, clock) in enumerate(zip(config.modules, clocks)):
            self.assertEqual(module.fI, StageComposition(self.net, index))
            self.assertEqual(module.fH, Identity())
            self.assertEqual(module.fT, Identity())
            self.assertEqual(module.fO, Relu())
            self.assertEqual(module.clockI, clock)
            self.assertEqual(module.clockH, Counter(clock))
            self.assertEqual(module.clockO, Always())

    def test_ReducesToFullForward(self):
        config = makeClockfcnConfig(self.net, [Always()] * 3)
        outputs, states = runSequence(config, self.frames)
        for frame, output in zip(self.frames, outputs):
            self.assertTrue(np.array_equal(output, fullForward(self.net, frame)[1]))

    def test_Persistence(self):
        config = makeClockfcnConfig(self.net, [Always(), Modulo(2), Modulo(2)])
        outputs, states = runSequence(config, self.frames[:2])
        self.assertEqual(states[1].executed, (True, False, False))
        self.assertIs(states[1].hidden[1], states[0].hidden[1])
        self.assertEqual(states[1].lastUpdate, (1, 0, 0))

    def test_WrongClockCount(self):
        with self.assertRaises(ValueError):
            makeClockfcnConfig(self.net, [Always()] * 2)

    def test_ThresholdOnSourceLabels(self):
        net = base.proceduralNet()
        config = makeClockfcnConfig(net, [Always(), Threshold(0.0, 0), Threshold(0.0, 0)])
        frames = base.repeatedFrame(3)
        outputs, states = runSequence(config, frames)
        self.assertEqual(states[2].executed, (True, False, False))
        self.assertEqual(states[2].signals, {1: 0.0, 2: 0.0})

    def test_ExplicitSignals(self):
        net = base.proceduralNet()
        config = makeClockfcnConfig(net, [Always(), Threshold(0.2, 0), Threshold(0.2, 0)])
        frames = base.repeatedFrame(2)
        outputs, states = runSequence(config, frames, [None, {1: 0.5, 2: 0.1}])
        self.assertEqual(states[1].executed, (True, True, False))

    def test_ThresholdWithoutSource(self):
        config = makeClockfcnConfig(base.proceduralNet(), [Always(), Threshold(0.1, 2), Always()])
        with self.assertRaises(ValueError):
            runSequence(config, base.repeatedFrame(2))


class Machine(unittest.TestCase):
    def _selectConfig(self):
        always = Always()
        module = ModuleConfig(Identity(), Identity(), Identity(), Identity(), always, always, always)
        return ClockworkConfig('custom', [module], 'select', 'shared', 'concat', [np.zeros(2)])

    def test_BothClocksFire(self):
        config = self._selectConfig()
        state, output = clockworkStep(config, initialState(config), np.ones(2))
        self.assertEqual(output.tolist(), [1.0, 1.0])
        with self.assertRaises(ValueError):
            clockworkStep(config, state, np.ones(2))

    def test_StateMismatch(self):
        srn = makeSrnConfig(1, [[1.0]], [[1.0]])
        clockrn = makeClockrnConfig(3, np.ones((3, 1)), np.eye(3))
        with self.assertRaises(ValueError):
            clockworkStep(srn, initialState(clockrn), np.array([1.0]))

    def test_MissingSlot(self):
        with self.assertRaises(ValueError):
            ModuleConfig(Identity(), None, Identity(), Identity(), Always(), Always(), Always())

    def test_Presets(self):
        config = makePresetConfig('srn', 2, np.ones((2, 1)), np.eye(2))
        self.assertEqual(config.preset, 'srn')
        with self.assertRaises(KeyError):
            makePresetConfig('lstm')

    def test_Deterministic(self):
        config = makeClockrnConfig(4, np.ones((4, 1)), np.eye(4) / 2, moduleCount=2)
        inputs = [np.array([value]) for value in (0.5, -1.0, 2.0, 0.0, 1.0)]
        first = runSequence(config, inputs)[0]
        second = runSequence(config, inputs)[0]
        for a, b in zip(first, second):
            self.assertTrue(np.array_equal(a, b))


if __name__ == '__main__':
    unittest.main()
