"""Labeled frame sequences.

Frames are float32 (3, H, W) tensors rendered from a fixed class palette,
labels are 2-D integer maps with one class per pixel.
"""

import numpy as np

from clockwork import tensorops


FRAME_CHANNELS = 3

DEFAULT_FRAMES = 6
DEFAULT_CROP_DIM = 32
DEFAULT_SOURCE_DIMS = (64, 96)
DEFAULT_DISPLACEMENTS = (2, 4)
DEFAULT_NOISE = 0.02

ORIENTATIONS = ('horizontal', 'vertical', 'auto')


def classPalette(nCl):
    """(nCl, 3) float64 colours. Class c gets (c/(n-1), 1-c/(n-1), 0.5*(c%2))
    """
    if nCl < 2:
        raise ValueError('Palette needs at least 2 classes, got %d' % nCl)
    ramp = np.arange(nCl, dtype=np.float64) / (nCl - 1)
    odd = 0.5 * (np.arange(nCl) % 2)
    return np.stack([ramp, 1.0 - ramp, odd], axis=1)


def decodeLabels(frame, nCl, palette=None):
    """Label every pixel with the nearest palette colour. Ties go to the lowest class
    """
    tensorops.checkTensor(frame, 'frame')
    if palette is None:
        palette = classPalette(nCl)
    if frame.shape[0] != palette.shape[1]:
        raise ValueError('Frame has %d channels, palette has %d' % (frame.shape[0], palette.shape[1]))

    pixels = frame.astype(np.float64)
    distances = ((pixels[np.newaxis] - palette[:, :, np.newaxis, np.newaxis]) ** 2).sum(axis=1)
    return np.argmin(distances, axis=0)


def renderFrame(labels, nCl, noise=0.0, rng=None):
    """Paint labels with the class palette and add uniform noise in [-noise, noise]
    """
    tensorops.checkLabelMap(labels, nCl, 'labels')
    if (labels == tensorops.IGNORE_LABEL).any():
        raise ValueError('Cannot render ignore-labeled pixels')
    if noise < 0:
        raise ValueError('Noise amplitude must be >= 0, got %s' % noise)

    frame = classPalette(nCl)[labels].transpose(2, 0, 1)
    if noise > 0:
        if rng is None:
            raise ValueError('Noisy rendering needs a random generator')
        frame = frame + rng.uniform(-noise, noise, size=frame.shape)
    return tensorops.makeTensor(frame)


class SequenceSpec:
    """How a translated sequence is cut from a source image

    Public attributes:
        displacement    pixels per frame
        nFrames         frame count
        orientation     'horizontal', 'vertical' or 'auto' (longer source axis)
        cropDim         side of the square crop window
    """
    def __init__(self, displacement, nFrames=DEFAULT_FRAMES, orientation='auto', cropDim=DEFAULT_CROP_DIM):
        if displacement < 0:
            raise ValueError('Displacement must be >= 0, got %d' % displacement)
        if nFrames < 1:
            raise ValueError('Sequence needs at least 1 frame, got %d' % nFrames)
        if orientation not in ORIENTATIONS:
            raise ValueError('Orientation must be one of %s, got %s' % (', '.join(ORIENTATIONS), repr(orientation)))
        if cropDim < 1:
            raise ValueError('Crop dim must be >= 1, got %d' % cropDim)

        self.displacement = displacement
        self.nFrames = nFrames
        self.orientation = orientation
        self.cropDim = cropDim

    def axis(self, sourceDims):
        """'horizontal' or 'vertical' for a source of (height, width)
        """
        if self.orientation != 'auto':
            return self.orientation
        height, width = sourceDims
        return 'vertical' if height > width else 'horizontal'

    def maxFrames(self, sourceDims):
        """Largest frame count whose crops stay inside the source
        """
        height, width = sourceDims
        if self.cropDim > min(height, width):
            return 0
        length = width if self.axis(sourceDims) == 'horizontal' else height
        if self.displacement == 0:
            return None
        return (length - self.cropDim) // self.displacement + 1

    def toDict(self):
        return {'displacement': self.displacement,
                'frames': self.nFrames,
                'orientation': self.orientation,
                'crop_dim': self.cropDim}


class LabeledSequence:
    """Frames with exact per-pixel labels

    Public attributes:
        frames      list of (C, H, W) float32 tensors
        labels      list of (H, W) label maps
        nCl         class count
        name        sequence name, orders report rows
        provenance  dict with the generator, seed and parameters
    """
    def __init__(self, frames, labels, nCl, name='sequence', provenance=None):
        if len(frames) != len(labels):
            raise ValueError('Sequence has %d frames and %d label maps' % (len(frames), len(labels)))
        if not frames:
            raise ValueError('Sequence is empty')
        for index, (frame, labelMap) in enumerate(zip(frames, labels)):
            tensorops.checkTensor(frame, 'frame %d' % index)
            tensorops.checkLabelMap(labelMap, nCl, 'label map %d' % index)
            if frame.shape[1:] != labelMap.shape:
                raise ValueError('Frame %d is %s but its labels are %s' % (index, frame.shape[1:], labelMap.shape))
            if frame.shape != frames[0].shape:
                raise ValueError('Frame %d shape %s differs from frame 0 shape %s' %
                                 (index, frame.shape, frames[0].shape))

        self.frames = list(frames)
        self.labels = [np.asarray(labelMap, dtype=np.int64) for labelMap in labels]
        self.nCl = nCl
        self.name = name
        self.provenance = dict(provenance or {})

    def __len__(self):
        return len(self.frames)

    @property
    def frameDims(self):
        return self.frames[0].shape[1:]

    @property
    def channels(self):
        return self.frames[0].shape[0]

    def __eq__(self, other):
        return isinstance(other, LabeledSequence) and \
               self.nCl == other.nCl and \
               len(self) == len(other) and \
               all(np.array_equal(a, b) for a, b in zip(self.frames, other.frames)) and \
               all(np.array_equal(a, b) for a, b in zip(self.labels, other.labels))

    def __str__(self):
        return '%s: %d frames %dx%d, %d classes' % ((self.name, len(self)) + tuple(self.frameDims) + (self.nCl,))
