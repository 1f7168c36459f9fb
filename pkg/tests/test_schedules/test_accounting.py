#!/usr/bin/env python3

import unittest

import os.path
import sys
sys.path.append(os.path.abspath(os.path.join(__file__, '..')))
from schedtest import ScheduleTest

import base

from clockwork.schedules import Schedule, parseSchedule, NAMES
from clockwork.schedules.base import CostModel, account, defaultCostModel
from clockwork.schedules.oracle import runOracle


class Costs(unittest.TestCase):
    def test_Default(self):
        model = defaultCostModel()
        self.assertEqual(model.stageCosts, (0.59, 0.18, 0.21))
        self.assertEqual(model.fusionCost, 0.02)
        self.assertAlmostEqual(model.cumulative(2), 0.77)
        self.assertAlmostEqual(model.frameCost((True, False, True)), 0.82)
        self.assertAlmostEqual(model.frameCost((False, False, False)), 0.02)

    def test_Merged(self):
        merged = defaultCostModel(2)
        self.assertEqual(merged.stageCount, 2)
        self.assertAlmostEqual(merged.stageCosts[0], 0.77)
        self.assertAlmostEqual(merged.stageCosts[1], 0.21)
        self.assertIs(merged.merged(), merged)

    def test_Validation(self):
        with self.assertRaises(ValueError):
            CostModel((0.5, 0.5, 0.5))
        with self.assertRaises(ValueError):
            CostModel((1.2, -0.2), 0.0)
        with self.assertRaises(ValueError):
            CostModel(())
        with self.assertRaises(ValueError):
            defaultCostModel(4)
        with self.assertRaises(ValueError):
            CostModel((0.5, 0.25, 0.25, 0.0), 0.0).merged()
        with self.assertRaises(ValueError):
            defaultCostModel().frameCost((True, True))

    def test_CustomModel(self):
        model = CostModel((0.5, 0.3, 0.2), 0.0)
        report = runOracle(base.proceduralNet(), base.repeatedFrame(2), model)
        self.assertAlmostEqual(report.computeFraction, 1.0)
        self.assertAlmostEqual(report.latency, 1.0)

    def test_AccountMismatch(self):
        report = runOracle(base.proceduralNet(), base.repeatedFrame(2))
        with self.assertRaises(ValueError):
            account(report, defaultCostModel(2))

    def test_Account(self):
        report = runOracle(base.proceduralNet(), base.repeatedFrame(2))
        mean, latency, series = account(report, CostModel((0.4, 0.3, 0.2), 0.1))
        self.assertAlmostEqual(mean, 1.0)
        self.assertEqual(series, report.frameCosts)


class Parsing(unittest.TestCase):
    def test_Names(self):
        self.assertEqual(parseSchedule({'name': 'oracle'}), Schedule.oracle())
        self.assertEqual(parseSchedule({'name': 'truncated', 'k': 2}), Schedule.truncated(2))
        self.assertEqual(parseSchedule({'name': 'pipeline2'}), Schedule.pipeline(2))
        self.assertEqual(parseSchedule({'name': 'pipeline'}), Schedule.pipeline(3))
        self.assertEqual(parseSchedule({'name': 'exponential'}).rates, (1, 2, 4))
        self.assertEqual(parseSchedule({'name': 'alternating'}).rates, (1, 1, 2))
        self.assertEqual(parseSchedule({'name': 'skip_frame'}).rates, (2, 2, 2))
        self.assertEqual(parseSchedule({'name': 'fixed_rate', 'rates': [1, 3, 3]}).rates, (1, 3, 3))
        adaptive = parseSchedule({'name': 'adaptive', 'theta': 0.1, 'reference': 'last_update'})
        self.assertEqual((adaptive.theta, adaptive.sourceStage, adaptive.reference), (0.1, 1, 'last_update'))

    def test_EveryNameParses(self):
        for name in NAMES:
            description = {'name': name}
            if name == 'fixed_rate':
                description['rates'] = [1, 2, 2]
            self.assertTrue(parseSchedule(description).name.startswith(name.rstrip('23')), name)

    def test_Unknown(self):
        with self.assertRaises(KeyError):
            parseSchedule({'name': 'clairvoyant'})
        with self.assertRaises(KeyError):
            Schedule('clairvoyant')
        with self.assertRaises(ValueError):
            parseSchedule({'name': 'fixed_rate'})

    def test_Dict(self):
        self.assertEqual(Schedule.adaptive(0.2).toDict(),
                         {'name': 'adaptive', 'kind': 'adaptive', 'theta': 0.2,
                          'source_stage': 1, 'signal': 'labels', 'reference': 'previous'})
        self.assertEqual(str(Schedule.exponential()), 'exponential(1, 2, 4)')


class Ordering(ScheduleTest):
    def test_SingleClassFixedRatesUnderMotion(self):
        holds = 0
        for seed in range(10):
            scene = base.singleClassScene(seed)
            alternating = self.meanIu(self.runScheduled(Schedule.alternating(), scene.frames, self.objectness), scene)
            exponential = self.meanIu(self.runScheduled(Schedule.exponential(), scene.frames, self.objectness), scene)
            if self.oracleMeanIu(scene, self.objectness) >= alternating >= exponential:
                holds += 1
        self.assertGreaterEqual(holds, 9)

    def test_Cheaper(self):
        frames = base.repeatedFrame(8)
        fractions = [self.runScheduled(schedule, frames).computeFraction
                     for schedule in (Schedule.oracle(), Schedule.alternating(),
                                      Schedule.exponential(), Schedule.skipFrame())]
        self.assertEqual(fractions, sorted(fractions, reverse=True))


if __name__ == '__main__':
    unittest.main()
