"""Staged fully convolutional networks.

A network is an ordered list of stages. Each stage turns its input (the frame
for stage 0, the previous stage's features otherwise) into features for the
next stage and a score map at its own resolution. Skip fusion upsamples every
score map to frame resolution and sums them.
"""

import collections
import logging

import numpy as np

from clockwork import tensorops


_logger = logging.getLogger('clockwork')


StageOutput = collections.namedtuple('StageOutput', ['features', 'score'])


class ConvOp:
    """Convolution with weights

    Public attributes:
        kernels     (outC, inC, kH, kW) float32
        bias        (outC,) float32
        stride
        pad
    """
    kind = 'conv'

    def __init__(self, kernels, bias, stride=1, pad=0):
        self.kernels = np.ascontiguousarray(kernels, dtype=tensorops.DTYPE)
        self.bias = np.ascontiguousarray(bias, dtype=tensorops.DTYPE)
        self.stride = stride
        self.pad = pad

    @property
    def outChannels(self):
        return self.kernels.shape[0]

    @property
    def inChannels(self):
        return self.kernels.shape[1]

    def apply(self, tensor):
        return tensorops.conv2d(tensor, self.kernels, self.bias, self.stride, self.pad)

    def __eq__(self, other):
        return isinstance(other, ConvOp) and \
               self.stride == other.stride and \
               self.pad == other.pad and \
               np.array_equal(self.kernels, other.kernels) and \
               np.array_equal(self.bias, other.bias)

    def __str__(self):
        outC, inC, kH, kW = self.kernels.shape
        return 'conv %dx%d %d->%d stride %d pad %d' % (kH, kW, inC, outC, self.stride, self.pad)


class ReluOp:
    kind = 'relu'

    def apply(self, tensor):
        return tensorops.relu(tensor)

    def __eq__(self, other):
        return isinstance(other, ReluOp)

    def __str__(self):
        return 'relu'


class PoolOp:
    """Max pooling

    Public attributes:
        window
        stride
    """
    kind = 'pool'

    def __init__(self, window, stride):
        self.window = window
        self.stride = stride

    def apply(self, tensor):
        return tensorops.maxpool2d(tensor, self.window, self.stride)

    def __eq__(self, other):
        return isinstance(other, PoolOp) and \
               (self.window, self.stride) == (other.window, other.stride)

    def __str__(self):
        return 'maxpool %d stride %d' % (self.window, self.stride)


class StageSpec:
    """One stage of a staged network

    Public attributes:
        featureOps          list of ConvOp, ReluOp, PoolOp
        scoreHead           1x1 ConvOp to n_cl channels
        downsampleFactor    pooling factor of the score map relative to the frame
    """
    def __init__(self, featureOps, scoreHead, downsampleFactor):
        self.featureOps = list(featureOps)
        self.scoreHead = scoreHead
        self.downsampleFactor = downsampleFactor

    @property
    def outChannels(self):
        return self.scoreHead.outChannels

    def forward(self, input):
        features = input
        for op in self.featureOps:
            features = op.apply(features)
        return StageOutput(features, self.scoreHead.apply(features))

    def __eq__(self, other):
        return isinstance(other, StageSpec) and \
               self.downsampleFactor == other.downsampleFactor and \
               self.featureOps == other.featureOps and \
               self.scoreHead == other.scoreHead

    def __str__(self):
        ops = ', '.join(str(op) for op in self.featureOps)
        return 'stage /%d: [%s] -> score %s' % (self.downsampleFactor, ops, self.scoreHead)


class MergedStage:
    """Two consecutive stages run as one.

    Emits the second stage's features and the first stage's score plus the
    second stage's score upsampled to the first stage's resolution.
    """
    def __init__(self, first, second):
        if second.downsampleFactor % first.downsampleFactor:
            raise ValueError('Cannot merge stages with factors %d and %d' %
                             (first.downsampleFactor, second.downsampleFactor))
        self.first = first
        self.second = second
        self.downsampleFactor = first.downsampleFactor

    @property
    def outChannels(self):
        return self.first.outChannels

    def forward(self, input):
        features, score = self.first.forward(input)
        deepFeatures, deepScore = self.second.forward(features)
        ratio = self.second.downsampleFactor // self.first.downsampleFactor
        merged = tensorops.add(score, tensorops.upsampleBilinear(deepScore, ratio))
        return StageOutput(deepFeatures, merged)

    def __eq__(self, other):
        return isinstance(other, MergedStage) and \
               self.first == other.first and \
               self.second == other.second

    def __str__(self):
        return 'merged(%s | %s)' % (self.first, self.second)


class StagedNetwork:
    """Ordered stages with skip fusion

    Public attributes:
        stages          list of stage objects with forward() and downsampleFactor
        nCl             class count
        inChannels      frame channel count
        kind            'toyfcn', 'procedural', 'merged', ...
        architecture    description used to build the network, if any
        seed            weight seed, if any
    """
    def __init__(self, stages, nCl, inChannels, kind='custom', architecture=None, seed=None):
        if not stages:
            raise ValueError('Network needs at least one stage')

        factors = [stage.downsampleFactor for stage in stages]
        for shallow, deep in zip(factors, factors[1:]):
            if deep <= shallow:
                raise ValueError('Stage downsample factors must strictly increase, got %s' % (factors,))
        for index, stage in enumerate(stages):
            if stage.outChannels != nCl:
                raise ValueError('Stage %d score head emits %d channels, network has %d classes' %
                                 (index, stage.outChannels, nCl))

        self.stages = list(stages)
        self.nCl = nCl
        self.inChannels = inChannels
        self.kind = kind
        self.architecture = architecture
        self.seed = seed

    @property
    def stageCount(self):
        return len(self.stages)

    @property
    def factors(self):
        return tuple(stage.downsampleFactor for stage in self.stages)

    def __eq__(self, other):
        return isinstance(other, StagedNetwork) and \
               self.nCl == other.nCl and \
               self.inChannels == other.inChannels and \
               self.stages == other.stages

    def __str__(self):
        res = 'StagedNetwork\n'
        res += ' kind: %s\n' % self.kind
        res += ' classes: %d\n' % self.nCl
        res += ' input channels: %d\n' % self.inChannels
        res += ' seed: %s\n' % self.seed
        for index, stage in enumerate(self.stages):
            res += ' %d: %s\n' % (index, stage)
        return res


class StageCache:
    """Per-stage cached features and scores with the frame index that produced them
    """
    def __init__(self, stageCount):
        self._entries = [None] * stageCount
        self._lastUpdate = [-1] * stageCount

    def store(self, stageIndex, output, frameIndex):
        """Store the result of executing stage stageIndex on frame frameIndex
        """
        self._entries[stageIndex] = output
        self._lastUpdate[stageIndex] = frameIndex
        _logger.debug('cache: stage %d <- frame %d', stageIndex, frameIndex)

    def output(self, stageIndex):
        return self._entries[stageIndex]

    def lastUpdate(self, stageIndex):
        return self._lastUpdate[stageIndex]

    def isComplete(self):
        return all(entry is not None for entry in self._entries)

    def scores(self):
        return [entry.score if entry is not None else None
                for entry in self._entries]

    def sources(self):
        return tuple(self._lastUpdate)


def forwardStage(net, stageIndex, input):
    """Run one stage. Returns StageOutput(features, score)
    """
    if not 0 <= stageIndex < net.stageCount:
        raise ValueError('Stage index %d out of range for %d-stage network' % (stageIndex, net.stageCount))
    if stageIndex == 0 and input.shape[0] != net.inChannels:
        raise ValueError('Frame has %d channels, network expects %d' % (input.shape[0], net.inChannels))
    return net.stages[stageIndex].forward(input)


def fuseScores(net, cachedScores, frameDims, depth=None):
    """Upsample the score maps of the first `depth` stages to frame resolution and sum them.

    The maps may come from different frames.
    """
    if depth is None:
        depth = net.stageCount
    if not 1 <= depth <= net.stageCount:
        raise ValueError('Fusion depth %d out of range for %d-stage network' % (depth, net.stageCount))
    if len(cachedScores) < depth:
        raise ValueError('Fusion needs %d score maps, got %d' % (depth, len(cachedScores)))

    height, width = frameDims
    fused = None
    for index in range(depth):
        score = cachedScores[index]
        if score is None:
            raise ValueError('Missing score map for stage %d, caches must be initialized' % index)
        factor = net.stages[index].downsampleFactor
        upsampled = tensorops.upsampleBilinear(score, factor)
        if upsampled.shape[1:] != (height, width):
            raise ValueError('Stage %d score map %s upsampled by %d does not match frame %dx%d' %
                             (index, score.shape, factor, height, width))
        fused = upsampled if fused is None else tensorops.add(fused, upsampled)

    return fused


def fullForward(net, frame):
    """Run all stages on one frame and fuse. Returns (stage outputs, fused score map)
    """
    tensorops.checkTensor(frame, 'frame')
    outputs = []
    input = frame
    for index in range(net.stageCount):
        output = forwardStage(net, index, input)
        outputs.append(output)
        input = output.features

    fused = fuseScores(net, [output.score for output in outputs], frame.shape[1:])
    return outputs, fused


def mergeStages(net):
    """Two-stage variant of a three-stage network: stages 0 and 1 run as one
    """
    if net.stageCount == 2:
        return net
    if net.stageCount != 3:
        raise ValueError('Only 3-stage networks can be merged, got %d stages' % net.stageCount)

    merged = MergedStage(net.stages[0], net.stages[1])
    return StagedNetwork([merged, net.stages[2]], net.nCl, net.inChannels,
                         kind='merged-' + net.kind, architecture=net.architecture, seed=net.seed)
