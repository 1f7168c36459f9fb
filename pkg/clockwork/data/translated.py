"""Synthetic video by sliding a square crop window across a still image.

Frame t is the crop at offset t * displacement along the motion axis, centred
on the other axis. Crops are exact, there is no resampling.
"""

import logging

import numpy as np

from clockwork import tensorops
from clockwork.data import LabeledSequence


_logger = logging.getLogger('clockwork')


def cropOffsets(spec, sourceDims):
    """(row, col) of the crop window of every frame
    """
    height, width = sourceDims
    crop = spec.cropDim
    if spec.axis(sourceDims) == 'horizontal':
        row = (height - crop) // 2
        return [(row, t * spec.displacement) for t in range(spec.nFrames)]
    else:
        col = (width - crop) // 2
        return [(t * spec.displacement, col) for t in range(spec.nFrames)]


def generateTranslatedSequence(image, labels, spec, nCl, name=None, provenance=None):
    """Cut spec.nFrames crops from (image, labels).
    Raises ValueError naming the largest feasible frame count when a crop would leave the image.
    """
    tensorops.checkTensor(image, 'source image')
    tensorops.checkLabelMap(labels, nCl, 'source labels')
    sourceDims = image.shape[1:]
    if labels.shape != sourceDims:
        raise ValueError('Source image is %s but its labels are %s' % (sourceDims, labels.shape))

    maxFrames = spec.maxFrames(sourceDims)
    if maxFrames == 0:
        raise ValueError('Crop %d does not fit into a %dx%d source' % ((spec.cropDim,) + tuple(sourceDims)))
    if maxFrames is not None and spec.nFrames > maxFrames:
        raise ValueError('%d frames with displacement %d leave the %dx%d source, at most %d frames fit' %
                         ((spec.nFrames, spec.displacement) + tuple(sourceDims) + (maxFrames,)))

    crop = spec.cropDim
    frames = []
    cropped = []
    for row, col in cropOffsets(spec, sourceDims):
        frames.append(np.ascontiguousarray(image[:, row:row + crop, col:col + crop]))
        cropped.append(labels[row:row + crop, col:col + crop].copy())

    details = {'generator': 'translated',
               'axis': spec.axis(sourceDims),
               'source_dims': list(sourceDims)}
    details.update(spec.toDict())
    details.update(provenance or {})
    _logger.debug('Cut %d frames, displacement %d along %s', spec.nFrames, spec.displacement, details['axis'])
    return LabeledSequence(frames, cropped, nCl, name or 'translated_d%d' % spec.displacement, details)
