"""Toy staged FCN with seeded random weights.

Every stage is conv3x3, relu, conv3x3, relu, maxpool 2/2, so stage k scores
at 1/2**(k+1) of the frame resolution. Weights are drawn from
numpy.random.default_rng(seed), uniform in [-a, a] with
a = sqrt(6 / (fan_in + fan_out)). Biases are zero.
Seed 0 is the reference network.
"""

import logging

import numpy as np

from clockwork import tensorops
from clockwork.stagenet import ConvOp, ReluOp, PoolOp, StageSpec, StagedNetwork


_logger = logging.getLogger('clockwork')


REFERENCE_SEED = 0

_DEFAULT_IN_CHANNELS = 3
_DEFAULT_N_CL = 4
_DEFAULT_CHANNELS = (8, 16, 32)

_KERNEL_SIZE = 3
_POOL = 2


def makeArchitecture(inChannels=_DEFAULT_IN_CHANNELS, nCl=_DEFAULT_N_CL, channels=_DEFAULT_CHANNELS):
    """Architecture description as stored in weight manifests
    """
    return {'in_channels': inChannels,
            'n_cl': nCl,
            'channels': list(channels)}


def _checkArchitecture(arch):
    if not isinstance(arch, dict):
        raise ValueError('Architecture must be a dict, got %s' % type(arch).__name__)
    unknown = set(arch) - {'in_channels', 'n_cl', 'channels'}
    if unknown:
        raise ValueError('Unknown architecture keys: %s' % ', '.join(sorted(unknown)))

    inChannels = arch.get('in_channels', _DEFAULT_IN_CHANNELS)
    nCl = arch.get('n_cl', _DEFAULT_N_CL)
    channels = tuple(arch.get('channels', _DEFAULT_CHANNELS))

    if not isinstance(inChannels, int) or inChannels < 1:
        raise ValueError('in_channels must be a positive integer, got %s' % repr(inChannels))
    if not isinstance(nCl, int) or nCl < 2:
        raise ValueError('n_cl must be an integer >= 2, got %s' % repr(nCl))
    if len(channels) not in (2, 3):
        raise ValueError('Toy FCN has 2 or 3 stages, got %d channel widths' % len(channels))
    for width in channels:
        if not isinstance(width, int) or width < 1:
            raise ValueError('Channel widths must be positive integers, got %s' % (channels,))

    return inChannels, nCl, channels


def stageFactors(stageCount):
    return tuple(_POOL ** (index + 1) for index in range(stageCount))


def _glorot(rng, outChannels, inChannels, kernelSize):
    fanIn = inChannels * kernelSize * kernelSize
    fanOut = outChannels * kernelSize * kernelSize
    limit = np.sqrt(6.0 / (fanIn + fanOut))
    kernels = rng.uniform(-limit, limit, size=(outChannels, inChannels, kernelSize, kernelSize))
    return kernels.astype(tensorops.DTYPE)


def _convOp(rng, outChannels, inChannels, kernelSize, pad):
    kernels = _glorot(rng, outChannels, inChannels, kernelSize)
    bias = np.zeros(outChannels, dtype=tensorops.DTYPE)
    return ConvOp(kernels, bias, stride=1, pad=pad)


def initWeights(arch=None, seed=REFERENCE_SEED):
    """Build the toy FCN described by arch with weights drawn from seed.
    Draw order: stage by stage, first conv, second conv, score head.
    """
    if arch is None:
        arch = makeArchitecture()
    inChannels, nCl, channels = _checkArchitecture(arch)

    rng = np.random.default_rng(seed)
    stages = []
    previous = inChannels
    for width, factor in zip(channels, stageFactors(len(channels))):
        featureOps = [_convOp(rng, width, previous, _KERNEL_SIZE, _KERNEL_SIZE // 2),
                      ReluOp(),
                      _convOp(rng, width, width, _KERNEL_SIZE, _KERNEL_SIZE // 2),
                      ReluOp(),
                      PoolOp(_POOL, _POOL)]
        scoreHead = _convOp(rng, nCl, width, 1, 0)
        stages.append(StageSpec(featureOps, scoreHead, factor))
        previous = width

    _logger.debug('Initialized toy FCN %s with seed %s', channels, seed)
    return StagedNetwork(stages, nCl, inChannels, kind='toyfcn',
                         architecture=makeArchitecture(inChannels, nCl, channels), seed=seed)
