"""Sequence container: a directory with manifest.json,
frame_%04d.cwkt (float32 tensors) and label_%04d.cwkt (uint8 maps, 255 = ignore)
"""

import os
import glob
import json
import logging

import numpy as np

from clockwork.container import ContainerError, readTensor, writeTensor
from clockwork.data import LabeledSequence
from clockwork.tensorops import IGNORE_LABEL


_logger = logging.getLogger('clockwork')


MANIFEST_NAME = 'manifest.json'
SEQUENCE_FORMAT = 'clockwork-sequence'
SEQUENCE_VERSION = 1

MAX_CLASSES = IGNORE_LABEL


def _frameName(index):
    return 'frame_%04d.cwkt' % index


def _labelName(index):
    return 'label_%04d.cwkt' % index


def writeSequence(seq, dirPath):
    if seq.nCl > MAX_CLASSES:
        raise ValueError('Labels are stored as uint8, at most %d classes fit, got %d' % (MAX_CLASSES, seq.nCl))

    os.makedirs(dirPath, exist_ok=True)
    for index, (frame, labels) in enumerate(zip(seq.frames, seq.labels)):
        writeTensor(os.path.join(dirPath, _frameName(index)), frame)
        writeTensor(os.path.join(dirPath, _labelName(index)), labels.astype(np.uint8))

    height, width = seq.frameDims
    manifest = {'format': SEQUENCE_FORMAT,
                'version': SEQUENCE_VERSION,
                'name': seq.name,
                'n_frames': len(seq),
                'height': height,
                'width': width,
                'channels': seq.channels,
                'n_cl': seq.nCl,
                'provenance': seq.provenance}
    with open(os.path.join(dirPath, MANIFEST_NAME), 'w', encoding='utf-8') as manifestFile:
        json.dump(manifest, manifestFile, indent=2, sort_keys=True)

    _logger.info('Wrote %s to %s', seq, dirPath)


def _readManifest(dirPath):
    path = os.path.join(dirPath, MANIFEST_NAME)
    if not os.path.isfile(path):
        raise ContainerError('Missing manifest %s' % path)
    try:
        with open(path, encoding='utf-8') as manifestFile:
            manifest = json.load(manifestFile)
    except ValueError as ex:
        raise ContainerError('Malformed manifest %s: %s' % (path, ex))
    if not isinstance(manifest, dict) or manifest.get('format') != SEQUENCE_FORMAT:
        raise ContainerError('%s is not a sequence manifest' % path)
    if manifest.get('version') != SEQUENCE_VERSION:
        raise ContainerError('%s: unsupported sequence version %s' % (path, manifest.get('version')))
    for key in ('n_frames', 'height', 'width', 'channels', 'n_cl'):
        if not isinstance(manifest.get(key), int):
            raise ContainerError("%s: missing or invalid '%s'" % (path, key))
    if manifest['n_cl'] > MAX_CLASSES:
        raise ContainerError('%s: %d classes do not fit uint8 labels' % (path, manifest['n_cl']))
    return manifest


def readSequence(dirPath):
    """Read a sequence written by writeSequence. Raises ContainerError on any inconsistency
    """
    manifest = _readManifest(dirPath)
    count = manifest['n_frames']
    frameFiles = glob.glob(os.path.join(dirPath, 'frame_*.cwkt'))
    labelFiles = glob.glob(os.path.join(dirPath, 'label_*.cwkt'))
    if len(frameFiles) != count or len(labelFiles) != count:
        raise ContainerError('%s: manifest lists %d frames, found %d frame and %d label files' %
                             (dirPath, count, len(frameFiles), len(labelFiles)))

    frameShape = (manifest['channels'], manifest['height'], manifest['width'])
    labelShape = frameShape[1:]
    frames = []
    labels = []
    for index in range(count):
        frame = readTensor(os.path.join(dirPath, _frameName(index)))
        labelMap = readTensor(os.path.join(dirPath, _labelName(index)))
        if frame.dtype != np.float32 or frame.shape != frameShape:
            raise ContainerError('%s: frame %d is %s %s, manifest says float32 %s' %
                                 (dirPath, index, frame.dtype, frame.shape, frameShape))
        if labelMap.dtype != np.uint8 or labelMap.shape != labelShape:
            raise ContainerError('%s: label map %d is %s %s, manifest says uint8 %s' %
                                 (dirPath, index, labelMap.dtype, labelMap.shape, labelShape))
        frames.append(frame)
        labels.append(labelMap.astype(np.int64))

    try:
        seq = LabeledSequence(frames, labels, manifest['n_cl'],
                              manifest.get('name', os.path.basename(os.path.normpath(dirPath))),
                              manifest.get('provenance'))
    except ValueError as ex:
        raise ContainerError('%s: %s' % (dirPath, ex))

    _logger.debug('Read %s from %s', seq, dirPath)
    return seq
