#!/usr/bin/env python3

import os
import json
import tempfile
import unittest

import numpy as np

import base

from clockwork import tensorops
from clockwork.container import ContainerError
from clockwork.data import renderFrame
from clockwork.data.scenes import Shape
from clockwork.stagenet import StagedNetwork, StageCache, forwardStage, fuseScores, fullForward, mergeStages
from clockwork.stagenet.loader import saveWeights, loadWeights
from clockwork.stagenet.procedural import majorityVote, makeObjectnessSegmenter, makeProceduralSegmenter, oneHot
from clockwork.stagenet.toyfcn import makeArchitecture, initWeights


class ToyFcn(unittest.TestCase):
    def setUp(self):
        self.net = base.toyNet()
        self.frame = base.randomTensor(np.random.default_rng(0), 3, 32, 32, 0.0, 1.0)

    def test_Factors(self):
        self.assertEqual(self.net.factors, (2, 4, 8))
        self.assertEqual(self.net.stageCount, 3)

    def test_StageDims(self):
        features, score = forwardStage(self.net, 0, self.frame)
        self.assertEqual(features.shape, (8, 16, 16))
        self.assertEqual(score.shape, (4, 16, 16))

    def test_ZeroFrame(self):
        features, score = forwardStage(self.net, 0, np.zeros((3, 32, 32), dtype=np.float32))
        self.assertFalse(features.any())
        self.assertFalse(score.any())

    def test_FullForward(self):
        outputs, fused = fullForward(self.net, self.frame)
        self.assertEqual([output.score.shape for output in outputs], [(4, 16, 16), (4, 8, 8), (4, 4, 4)])
        self.assertEqual(fused.shape, (4, 32, 32))
        self.assertEqual(fused.dtype, np.float32)

    def test_Deterministic(self):
        first = fullForward(self.net, self.frame)[1]
        second = fullForward(base.toyNet(), self.frame.copy())[1]
        self.assertTrue(np.array_equal(first, second))

    def test_StageByStageMatchesFullForward(self):
        input = self.frame
        scores = []
        for index in range(self.net.stageCount):
            input, score = forwardStage(self.net, index, input)
            scores.append(score)
        fused = fuseScores(self.net, scores, (32, 32))
        self.assertTrue(np.array_equal(fused, fullForward(self.net, self.frame)[1]))

    def test_SeedsDiffer(self):
        self.assertEqual(initWeights(seed=5), initWeights(seed=5))
        self.assertNotEqual(initWeights(seed=5), initWeights(seed=6))

    def test_GlorotBound(self):
        for stage in self.net.stages:
            for op in stage.featureOps + [stage.scoreHead]:
                if op.kind != 'conv':
                    continue
                outC, inC, kH, kW = op.kernels.shape
                limit = np.sqrt(6.0 / (inC * kH * kW + outC * kH * kW))
                self.assertLessEqual(np.abs(op.kernels).max(), limit * (1 + 1e-6))  # float32 rounding
                self.assertFalse(op.bias.any())

    def test_BadArchitecture(self):
        with self.assertRaises(ValueError):
            initWeights(makeArchitecture(channels=(8, 16, 32, 64)))
        with self.assertRaises(ValueError):
            initWeights(makeArchitecture(nCl=1))
        with self.assertRaises(ValueError):
            initWeights({'layers': 3})

    def test_TwoStageArchitecture(self):
        net = initWeights(makeArchitecture(channels=(8, 16)))
        self.assertEqual(net.factors, (2, 4))


class Fusion(unittest.TestCase):
    def setUp(self):
        self.net = base.toyNet()

    def test_ConstantMaps(self):
        scores = [np.full((4, 16, 16), 1.0, dtype=np.float32),
                  np.full((4, 8, 8), 2.0, dtype=np.float32),
                  np.full((4, 4, 4), 0.5, dtype=np.float32)]
        fused = fuseScores(self.net, scores, (32, 32))
        self.assertTrue((fused == 3.5).all())

    def test_OnlyFirstStage(self):
        rng = np.random.default_rng(1)
        first = base.randomTensor(rng, 4, 16, 16)
        scores = [first, np.zeros((4, 8, 8), dtype=np.float32), np.zeros((4, 4, 4), dtype=np.float32)]
        fused = fuseScores(self.net, scores, (32, 32))
        self.assertTrue(np.array_equal(fused, tensorops.upsampleBilinear(first, 2)))

    def test_Depth(self):
        rng = np.random.default_rng(2)
        first = base.randomTensor(rng, 4, 16, 16)
        fused = fuseScores(self.net, [first, None, None], (32, 32), depth=1)
        self.assertTrue(np.array_equal(fused, tensorops.upsampleBilinear(first, 2)))

    def test_MissingScore(self):
        scores = [np.zeros((4, 16, 16), dtype=np.float32), None, np.zeros((4, 4, 4), dtype=np.float32)]
        with self.assertRaises(ValueError):
            fuseScores(self.net, scores, (32, 32))

    def test_WrongResolution(self):
        scores = [np.zeros((4, 16, 16), dtype=np.float32),
                  np.zeros((4, 16, 16), dtype=np.float32),
                  np.zeros((4, 4, 4), dtype=np.float32)]
        with self.assertRaises(ValueError):
            fuseScores(self.net, scores, (32, 32))


class Network(unittest.TestCase):
    def test_FactorsMustIncrease(self):
        net = base.toyNet()
        with self.assertRaises(ValueError):
            StagedNetwork([net.stages[1], net.stages[0]], 4, 3)

    def test_ScoreHeadClasses(self):
        net = base.toyNet()
        with self.assertRaises(ValueError):
            StagedNetwork(net.stages, 5, 3)

    def test_Merge(self):
        net = base.toyNet()
        merged = mergeStages(net)
        self.assertEqual(merged.stageCount, 2)
        self.assertEqual(merged.factors, (2, 8))

        frame = base.randomTensor(np.random.default_rng(3), 3, 32, 32, 0.0, 1.0)
        outputs, fused = fullForward(merged, frame)
        original = fullForward(net, frame)[0]
        self.assertEqual(outputs[0].score.shape, (4, 16, 16))
        self.assertTrue(np.array_equal(outputs[0].features, original[1].features))
        self.assertTrue(np.array_equal(outputs[1].score, original[2].score))
        self.assertEqual(fused.shape, (4, 32, 32))

    def test_MergeTwoStages(self):
        net = initWeights(makeArchitecture(channels=(8, 16)))
        self.assertIs(mergeStages(net), net)

    def test_Cache(self):
        net = base.toyNet()
        cache = StageCache(3)
        self.assertFalse(cache.isComplete())
        self.assertEqual(cache.sources(), (-1, -1, -1))
        frame = base.randomTensor(np.random.default_rng(4), 3, 32, 32)
        outputs = fullForward(net, frame)[0]
        for index, output in enumerate(outputs):
            cache.store(index, output, 7)
        self.assertTrue(cache.isComplete())
        self.assertEqual(cache.sources(), (7, 7, 7))
        self.assertIs(cache.scores()[2], outputs[2].score)


class WeightBundle(unittest.TestCase):
    def setUp(self):
        self._tmpDir = tempfile.TemporaryDirectory()
        self.path = os.path.join(self._tmpDir.name, 'weights')
        self.net = base.toyNet()
        saveWeights(self.net, self.path)

    def tearDown(self):
        self._tmpDir.cleanup()

    def _manifest(self):
        with open(os.path.join(self.path, 'manifest.json')) as manifestFile:
            return json.load(manifestFile)

    def _writeManifest(self, manifest):
        with open(os.path.join(self.path, 'manifest.json'), 'w') as manifestFile:
            json.dump(manifest, manifestFile)

    def test_RoundTrip(self):
        loaded = loadWeights(self.path)
        self.assertEqual(loaded, self.net)
        self.assertEqual(loaded.seed, 0)
        self.assertEqual(loaded.factors, (2, 4, 8))

    def test_Manifest(self):
        manifest = self._manifest()
        self.assertEqual(manifest['stage_count'], 3)
        self.assertEqual(manifest['n_cl'], 4)
        self.assertEqual(manifest['stages'][1]['score_head']['kernels_shape'], [4, 16, 1, 1])

    def test_TruncatedTensor(self):
        kernelsFile = self._manifest()['stages'][0]['ops'][0]['kernels']
        path = os.path.join(self.path, kernelsFile)
        with open(path, 'rb') as tensorFile:
            data = tensorFile.read()
        with open(path, 'wb') as tensorFile:
            tensorFile.write(data[:-4])
        with self.assertRaises(ContainerError):
            loadWeights(self.path)

    def test_StageCountMismatch(self):
        manifest = self._manifest()
        del manifest['stages'][2]
        self._writeManifest(manifest)
        with self.assertRaises(ContainerError):
            loadWeights(self.path)

    def test_MissingStageTensors(self):
        for fileName in os.listdir(self.path):
            if fileName.startswith('stage2_'):
                os.remove(os.path.join(self.path, fileName))
        with self.assertRaises(ContainerError):
            loadWeights(self.path)

    def test_ShapeMismatch(self):
        manifest = self._manifest()
        manifest['stages'][0]['score_head']['kernels_shape'] = [4, 9, 1, 1]
        self._writeManifest(manifest)
        with self.assertRaises(ContainerError):
            loadWeights(self.path)

    def test_UnknownOp(self):
        manifest = self._manifest()
        manifest['stages'][1]['ops'][1] = {'op': 'softmax'}
        self._writeManifest(manifest)
        with self.assertRaises(ContainerError):
            loadWeights(self.path)

    def test_ProceduralCannotBeSaved(self):
        with self.assertRaises(ValueError):
            saveWeights(base.proceduralNet(), os.path.join(self._tmpDir.name, 'procedural'))


class Procedural(unittest.TestCase):
    def setUp(self):
        self.net = base.proceduralNet()

    def _segment(self, labels):
        frame = renderFrame(labels, 4)
        return tensorops.argmaxChannels(fullForward(self.net, frame)[1])

    def test_Resolution(self):
        labels = np.zeros((32, 32), dtype=np.int64)
        outputs = fullForward(self.net, renderFrame(labels, 4))[0]
        self.assertEqual([output.score.shape[1:] for output in outputs], [(16, 16), (8, 8), (4, 4)])

    def test_Uniform(self):
        for classIndex in range(4):
            labels = np.full((32, 32), classIndex)
            self.assertTrue((self._segment(labels) == classIndex).all())

    def test_ForegroundHalves(self):
        labels = np.ones((32, 32), dtype=np.int64)
        labels[:, 16:] = 3
        self.assertTrue(np.array_equal(self._segment(labels), labels))

    def test_ObjectAgainstBackground(self):
        labels = np.zeros((32, 32), dtype=np.int64)
        labels[:, 16:] = 2
        self.assertTrue(np.array_equal(self._segment(labels), labels))

    def test_StagesScoreMajorityVote(self):
        scene = base.sceneWithShapes([Shape('rectangle', 3, (5, 7), (13, 11), (1, 2))], 4)
        for frame, labels in zip(scene.frames, scene.labels):
            outputs = fullForward(self.net, frame)[0]
            for output, factor in zip(outputs, (2, 4, 8)):
                expected = majorityVote(labels, 4, factor)
                self.assertTrue(np.array_equal(tensorops.argmaxChannels(output.score), expected))
                self.assertTrue(np.array_equal(output.score, oneHot(expected, 4)))
        stage0 = tensorops.argmaxChannels(fullForward(self.net, scene.frames[0])[0][0].score)
        self.assertEqual(set(np.unique(stage0)), {0, 3})

    def test_NoisyFramesDecodeExactly(self):
        scene = base.staticScene(nFrames=3)
        for frame, labels in zip(scene.frames, scene.labels):
            outputs = fullForward(self.net, frame)[0]
            deepest = tensorops.argmaxChannels(outputs[2].score)
            self.assertTrue(np.array_equal(deepest, majorityVote(labels, 4, 8)))

    def test_StageLabels(self):
        labels = base.staticScene(nFrames=1).labels[0]
        outputs = fullForward(self.net, renderFrame(labels, 4))[0]
        for output, factor in zip(outputs, (2, 4, 8)):
            self.assertTrue(np.array_equal(tensorops.argmaxChannels(output.score),
                                           majorityVote(labels, 4, factor)))
            self.assertTrue(np.array_equal(output.features, oneHot(labels, 4)))

    def test_MajorityVote(self):
        labels = np.array([[1, 1, 0, 2],
                           [1, 0, 2, 2],
                           [0, 0, 3, 3],
                           [0, 1, 0, 3]])
        self.assertEqual(majorityVote(labels, 4, 2).tolist(), [[1, 2], [0, 3]])
        tie = np.array([[1, 2], [2, 1]])
        self.assertEqual(majorityVote(tie, 4, 2).tolist(), [[1]])

    def test_IndivisibleFrame(self):
        with self.assertRaises(ValueError):
            fullForward(self.net, renderFrame(np.zeros((30, 30), dtype=np.int64), 4))

    def test_Palette(self):
        with self.assertRaises(ValueError):
            makeProceduralSegmenter(4, palette=np.zeros((3, 3)))

    def test_Equality(self):
        self.assertEqual(self.net, makeProceduralSegmenter(4))
        self.assertNotEqual(self.net, makeProceduralSegmenter(4, (2, 4, 16)))
        self.assertNotEqual(self.net, makeObjectnessSegmenter(4))


class Objectness(unittest.TestCase):
    def setUp(self):
        self.net = base.objectnessNet()

    def _segment(self, labels):
        frame = renderFrame(labels, 4)
        return tensorops.argmaxChannels(fullForward(self.net, frame)[1])

    def test_ForegroundHalves(self):
        labels = np.ones((32, 32), dtype=np.int64)
        labels[:, 16:] = 3
        self.assertTrue(np.array_equal(self._segment(labels), labels))

    def test_ObjectAgainstBackground(self):
        labels = np.zeros((32, 32), dtype=np.int64)
        labels[:, 16:] = 2
        self.assertTrue(np.array_equal(self._segment(labels), labels))

    def test_StageLabels(self):
        labels = base.staticScene(nFrames=1).labels[0]
        outputs = fullForward(self.net, renderFrame(labels, 4))[0]
        for output, factor in zip(outputs[1:], (4, 8)):
            self.assertTrue(np.array_equal(tensorops.argmaxChannels(output.score),
                                           majorityVote(labels, 4, factor)))
        objectness = tensorops.argmaxChannels(outputs[0].score)
        self.assertEqual(set(np.unique(objectness)), {0, 1})

    def test_Kind(self):
        self.assertEqual(self.net.kind, 'objectness')
        self.assertEqual(self.net.architecture['objectness_weight'], 2.5)
        self.assertEqual(self.net, makeObjectnessSegmenter(4))
        with self.assertRaises(ValueError):
            saveWeights(self.net, os.path.join(tempfile.gettempdir(), 'never-written'))


if __name__ == '__main__':
    unittest.main()
