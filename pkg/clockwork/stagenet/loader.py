"""Weight bundles: a directory with manifest.json and one CWKT file per weight tensor
"""

import os
import json
import logging

from clockwork.container import ContainerError, readTensor, writeTensor
from clockwork.stagenet import ConvOp, ReluOp, PoolOp, StageSpec, StagedNetwork


_logger = logging.getLogger('clockwork')


MANIFEST_NAME = 'manifest.json'
BUNDLE_FORMAT = 'clockwork-weights'
BUNDLE_VERSION = 1


def _tensorFileName(stageIndex, opName, tensorName):
    return 'stage%d_%s_%s.cwkt' % (stageIndex, opName, tensorName)


def _saveConv(dirPath, stageIndex, opName, op):
    kernelsFile = _tensorFileName(stageIndex, opName, 'kernels')
    biasFile = _tensorFileName(stageIndex, opName, 'bias')
    writeTensor(os.path.join(dirPath, kernelsFile), op.kernels)
    writeTensor(os.path.join(dirPath, biasFile), op.bias)
    return {'op': 'conv',
            'stride': op.stride,
            'pad': op.pad,
            'kernels': kernelsFile,
            'kernels_shape': list(op.kernels.shape),
            'bias': biasFile,
            'bias_shape': list(op.bias.shape)}


def _saveOp(dirPath, stageIndex, opIndex, op):
    if isinstance(op, ConvOp):
        return _saveConv(dirPath, stageIndex, 'op%d' % opIndex, op)
    elif isinstance(op, ReluOp):
        return {'op': 'relu'}
    elif isinstance(op, PoolOp):
        return {'op': 'pool', 'window': op.window, 'stride': op.stride}
    else:
        raise ValueError('Cannot save op %s' % op)


def saveWeights(net, dirPath):
    """Write net to dirPath. Only networks built from StageSpec stages can be saved
    """
    for index, stage in enumerate(net.stages):
        if not isinstance(stage, StageSpec):
            raise ValueError('Stage %d of a %s network has no weights to save' % (index, net.kind))

    os.makedirs(dirPath, exist_ok=True)

    stages = []
    for stageIndex, stage in enumerate(net.stages):
        ops = [_saveOp(dirPath, stageIndex, opIndex, op)
               for opIndex, op in enumerate(stage.featureOps)]
        scoreHead = _saveConv(dirPath, stageIndex, 'score', stage.scoreHead)
        stages.append({'downsample_factor': stage.downsampleFactor,
                       'ops': ops,
                       'score_head': scoreHead})

    manifest = {'format': BUNDLE_FORMAT,
                'version': BUNDLE_VERSION,
                'kind': net.kind,
                'n_cl': net.nCl,
                'in_channels': net.inChannels,
                'seed': net.seed,
                'architecture': net.architecture,
                'stage_count': net.stageCount,
                'stages': stages}

    with open(os.path.join(dirPath, MANIFEST_NAME), 'w', encoding='utf-8') as manifestFile:
        json.dump(manifest, manifestFile, indent=2, sort_keys=True)

    _logger.info('Saved %d-stage network to %s', net.stageCount, dirPath)


def _required(entry, key, where):
    try:
        return entry[key]
    except (KeyError, TypeError):
        raise ContainerError("%s: missing '%s'" % (where, key))


def _loadTensor(dirPath, entry, name, where):
    fileName = _required(entry, name, where)
    expectedShape = tuple(_required(entry, name + '_shape', where))
    tensor = readTensor(os.path.join(dirPath, fileName))
    if tensor.shape != expectedShape:
        raise ContainerError('%s: %s has shape %s, manifest says %s' %
                             (where, fileName, tensor.shape, expectedShape))
    return tensor


def _loadConv(dirPath, entry, where):
    kernels = _loadTensor(dirPath, entry, 'kernels', where)
    bias = _loadTensor(dirPath, entry, 'bias', where)
    if kernels.ndim != 4 or bias.shape != (kernels.shape[0],):
        raise ContainerError('%s: inconsistent conv shapes %s and %s' % (where, kernels.shape, bias.shape))
    return ConvOp(kernels, bias,
                  stride=_required(entry, 'stride', where),
                  pad=_required(entry, 'pad', where))


def _loadRelu(dirPath, entry, where):
    return ReluOp()


def _loadPool(dirPath, entry, where):
    return PoolOp(_required(entry, 'window', where), _required(entry, 'stride', where))


_opLoaders = {'conv': _loadConv,
              'relu': _loadRelu,
              'pool': _loadPool}


def _loadOp(dirPath, entry, where):
    kind = _required(entry, 'op', where)
    if kind not in _opLoaders:
        raise ContainerError("%s: unknown op '%s'" % (where, kind))
    return _opLoaders[kind](dirPath, entry, where)


def _readManifest(dirPath):
    path = os.path.join(dirPath, MANIFEST_NAME)
    if not os.path.isfile(path):
        raise ContainerError('Missing manifest %s' % path)
    try:
        with open(path, encoding='utf-8') as manifestFile:
            manifest = json.load(manifestFile)
    except ValueError as ex:
        raise ContainerError('Malformed manifest %s: %s' % (path, ex))
    if not isinstance(manifest, dict) or manifest.get('format') != BUNDLE_FORMAT:
        raise ContainerError('%s is not a weight bundle manifest' % path)
    if manifest.get('version') != BUNDLE_VERSION:
        raise ContainerError('%s: unsupported bundle version %s' % (path, manifest.get('version')))
    return manifest


def loadWeights(dirPath):
    """Read a network written by saveWeights.
    Raises ContainerError on any inconsistency; never returns a partial network.
    """
    manifest = _readManifest(dirPath)

    stageEntries = _required(manifest, 'stages', dirPath)
    stageCount = _required(manifest, 'stage_count', dirPath)
    if stageCount != len(stageEntries):
        raise ContainerError('%s: manifest declares %d stages but describes %d' %
                             (dirPath, stageCount, len(stageEntries)))

    stages = []
    for stageIndex, stageEntry in enumerate(stageEntries):
        where = '%s stage %d' % (dirPath, stageIndex)
        ops = [_loadOp(dirPath, opEntry, where)
               for opEntry in _required(stageEntry, 'ops', where)]
        scoreHead = _loadConv(dirPath, _required(stageEntry, 'score_head', where), where)
        stages.append(StageSpec(ops, scoreHead, _required(stageEntry, 'downsample_factor', where)))

    seed = manifest.get('seed')
    if seed is None:
        _logger.warning('Weight bundle %s does not record its seed', dirPath)

    try:
        net = StagedNetwork(stages,
                            _required(manifest, 'n_cl', dirPath),
                            _required(manifest, 'in_channels', dirPath),
                            kind=manifest.get('kind', 'custom'),
                            architecture=manifest.get('architecture'),
                            seed=seed)
    except ValueError as ex:
        raise ContainerError('%s: %s' % (dirPath, ex))

    _logger.info('Loaded %d-stage network from %s', net.stageCount, dirPath)
    return net
