#!/usr/bin/env python3

import unittest

import os.path
import sys
sys.path.append(os.path.abspath(os.path.join(__file__, '..')))
from schedtest import ScheduleTest

import numpy as np

import base

from clockwork import tensorops
from clockwork.schedules.truncated import runTruncated
from clockwork.stagenet import forwardStage


class Test(ScheduleTest):
    def test_FirstStageOnly(self):
        scene = base.movingRectangleScene(5)
        report = runTruncated(self.net, scene.frames, 1)
        self.assertEqual(report.executionCounts(), (5, 0, 0))
        factor = self.net.stages[0].downsampleFactor
        for frame, prediction in zip(scene.frames, report.predictions):
            score = forwardStage(self.net, 0, frame).score
            expected = tensorops.argmaxChannels(tensorops.upsampleBilinear(score, factor))
            self.assertTrue(np.array_equal(prediction, expected))

    def test_Sources(self):
        report = runTruncated(self.net, base.repeatedFrame(4), 2)
        self.assertEqual(report.sources[3], (3, 3, -1))
        self.assertEqual(report.executedString(2), '110')

    def test_Costs(self):
        report = runTruncated(self.net, base.repeatedFrame(3), 1)
        self.assertAlmostEqual(report.latency, 0.61)
        self.assertAlmostEqual(report.quotedLatency, 0.59)
        self.assertAlmostEqual(report.computeFraction, 0.61)

        report = runTruncated(self.net, base.repeatedFrame(3), 2)
        self.assertAlmostEqual(report.quotedLatency, 0.77)
        self.assertAlmostEqual(report.latency, 0.79)
        self.assertEqual(report.fullFrameFraction, 0.0)

    def test_ToyNet(self):
        scene = base.movingRectangleScene(3)
        report = runTruncated(self.toy, scene.frames, 2)
        self.assertEqual(len(report.stageScores[0]), 2)
        self.assertEqual(report.predictions[0].shape, (base.FRAME_DIM, base.FRAME_DIM))

    def test_BadDepth(self):
        for k in (0, 3, 4):
            with self.assertRaises(ValueError):
                runTruncated(self.net, base.repeatedFrame(2), k)


if __name__ == '__main__':
    unittest.main()
