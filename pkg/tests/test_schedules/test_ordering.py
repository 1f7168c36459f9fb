#!/usr/bin/env python3

import unittest

import os.path
import sys
sys.path.append(os.path.abspath(os.path.join(__file__, '..')))
from schedtest import ScheduleTest

import numpy as np

import base

from clockwork.data import SequenceSpec
from clockwork.data.scenes import SceneParams, generateProceduralScene, generateSourceImage
from clockwork.data.translated import generateTranslatedSequence
from clockwork.experiment import COMPARED_SCHEDULES, compareSchedules, orderingCounts
from clockwork.schedules import Schedule
from clockwork.stagenet.procedural import makeProceduralSegmenter


def movingScenes(velocityRange=(-3, 3)):
    return [generateProceduralScene(seed, SceneParams(nFrames=20, velocityRange=velocityRange))
            for seed in range(10)]


def translatedSequences():
    spec = SequenceSpec(2, 12)
    sequences = []
    for seed in range(10):
        image, labels = generateSourceImage(seed)
        sequences.append(generateTranslatedSequence(image, labels, spec, 4, 'translated_%d' % seed))
    return sequences


class Test(ScheduleTest):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.scenes = movingScenes()

    def assertConsistent(self, rows, sequences, net):
        self.assertEqual([row.name for row in rows], [sequence.name for sequence in sequences])
        for row, sequence in zip(rows, sequences):
            self.assertEqual(row.meanIu['oracle'], self.oracleMeanIu(sequence, net))

    def test_MotionBreaksPipelineOrdering(self):
        # Measured: 0 of 10 seeds for both depths. Truncated output keeps the finer stage maps only
        rows = compareSchedules(self.net, self.scenes, threads=1)
        self.assertConsistent(rows, self.scenes, self.net)
        counts = orderingCounts(rows)
        self.assertLess(counts['pipeline3'], 9)
        self.assertLess(counts['pipeline2'], 9)

    def test_ObjectnessUnderMotion(self):
        # 6 of 10 for pipeline3, 1 of 10 for pipeline2, 7 of 10 for alternating >= exponential
        rows = compareSchedules(self.objectness, self.scenes, threads=1)
        self.assertConsistent(rows, self.scenes, self.objectness)
        self.assertLess(orderingCounts(rows)['pipeline2'], 9)
        self.assertTrue(any(row.meanIu['truncated2'] > row.meanIu['oracle'] for row in rows))

    def test_StaticScenesMatchOracle(self):
        scenes = movingScenes((0, 0))
        for net in (self.net, self.objectness):
            rows = compareSchedules(net, scenes, threads=2)
            for row in rows:
                for label, schedule in COMPARED_SCHEDULES:
                    if not label.startswith('truncated'):
                        self.assertEqual(row.meanIu[label], row.meanIu['oracle'], '%s %s' % (row.name, label))
            counts = orderingCounts(rows)
            self.assertEqual((counts['fixed_rates'], counts['skip_frame']), (10, 10))

    def test_AlternatingAndSkipFrameShareEvenFrames(self):
        for sequence in self.scenes[:3] + translatedSequences()[:3]:
            alternating = self.runScheduled(Schedule.alternating(), sequence.frames)
            skipFrame = self.runScheduled(Schedule.skipFrame(), sequence.frames)
            self.assertSameLabels(alternating.predictions[::2], skipFrame.predictions[::2])
            for index in range(1, len(sequence), 2):
                self.assertTrue(np.array_equal(skipFrame.predictions[index], skipFrame.predictions[index - 1]))

    def test_AlternatingAgainstSkipFrame(self):
        for sequences in (self.scenes, translatedSequences()):
            rows = compareSchedules(self.net, sequences, threads=2)
            for row in rows:
                holds = row.meanIu['alternating'] >= row.meanIu['skip_frame']
                self.assertEqual(row.holds['skip_frame'], holds, row.name)

    def test_SingleClassAlternatingBeatsSkipFrame(self):
        holds = 0
        for seed in range(10):
            scene = base.singleClassScene(seed)
            alternating = self.runScheduled(Schedule.alternating(), scene.frames, self.objectness)
            self.assertSameLabels(alternating.predictions, self.oracleLabels(scene.frames, self.objectness))
            skipFrame = self.runScheduled(Schedule.skipFrame(), scene.frames, self.objectness)
            if self.meanIu(alternating, scene) >= self.meanIu(skipFrame, scene):
                holds += 1
        self.assertGreaterEqual(holds, 9)

    def test_NeedsThreeStages(self):
        with self.assertRaises(ValueError):
            compareSchedules(makeProceduralSegmenter(4, (2, 4)), self.scenes[:1])


if __name__ == '__main__':
    unittest.main()
