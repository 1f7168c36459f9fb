"""Procedural scenes: rectangles and disks of constant class colour moving
with constant integer velocity over a background of class 0.
Later shapes occlude earlier ones.
"""

import logging

import numpy as np

from clockwork.data import DEFAULT_NOISE, DEFAULT_SOURCE_DIMS, LabeledSequence, renderFrame


_logger = logging.getLogger('clockwork')


SHAPE_KINDS = ('rectangle', 'disk')


class Shape:
    """Moving shape

    Public attributes:
        kind            'rectangle' or 'disk'
        classIndex      label painted by the shape, >= 1
        position        (row, col): top-left corner of a rectangle, centre of a disk
        size            (height, width) of a rectangle, (radius,) of a disk
        velocity        (rows, cols) per frame
    """
    def __init__(self, kind, classIndex, position, size, velocity=(0, 0)):
        if kind not in SHAPE_KINDS:
            raise ValueError('Shape kind must be one of %s, got %s' % (', '.join(SHAPE_KINDS), repr(kind)))
        if classIndex < 1:
            raise ValueError('Shapes paint foreground classes >= 1, got %d' % classIndex)
        if min(size) < 1:
            raise ValueError('Shape size must be positive, got %s' % (size,))
        self.kind = kind
        self.classIndex = int(classIndex)
        self.position = tuple(int(value) for value in position)
        self.size = tuple(int(value) for value in size)
        self.velocity = tuple(int(value) for value in velocity)

    def mask(self, dims, t):
        """Pixels covered at frame t
        """
        height, width = dims
        row = self.position[0] + t * self.velocity[0]
        col = self.position[1] + t * self.velocity[1]
        rows = np.arange(height)[:, np.newaxis]
        cols = np.arange(width)[np.newaxis, :]
        if self.kind == 'rectangle':
            shapeHeight, shapeWidth = self.size
            return (rows >= row) & (rows < row + shapeHeight) & (cols >= col) & (cols < col + shapeWidth)
        else:
            radius = self.size[0]
            return (rows - row) ** 2 + (cols - col) ** 2 <= radius * radius

    def toDict(self):
        return {'kind': self.kind,
                'class': self.classIndex,
                'position': list(self.position),
                'size': list(self.size),
                'velocity': list(self.velocity)}


def shapeFromDict(description):
    try:
        return Shape(description['kind'], description['class'], description['position'],
                     description['size'], description.get('velocity', (0, 0)))
    except (KeyError, TypeError) as ex:
        raise ValueError('Invalid shape description %s: %s' % (description, ex))


class SceneParams:
    """Parameters of a procedural scene

    Public attributes:
        nCl             class count, background is class 0
        imageDim        side of the square frames
        nShapes         number of random shapes, ignored when shapes are given
        velocityRange   (low, high) inclusive bounds of the per-axis velocity
        nFrames         frame count
        noise           amplitude of the uniform pixel noise
        shapes          explicit list of Shape, or None to draw them from the seed
    """
    def __init__(self, nCl=4, imageDim=32, nShapes=3, velocityRange=(-2, 2), nFrames=40,
                 noise=DEFAULT_NOISE, shapes=None):
        if nCl < 2:
            raise ValueError('Scenes need at least 2 classes, got %d' % nCl)
        if imageDim < 1:
            raise ValueError('Image dim must be positive, got %d' % imageDim)
        if shapes is None and nShapes < 1:
            raise ValueError('Scenes need at least 1 shape, got %d' % nShapes)
        if nFrames < 1:
            raise ValueError('Scenes need at least 1 frame, got %d' % nFrames)
        low, high = velocityRange
        if low > high:
            raise ValueError('Velocity range %s is empty' % (velocityRange,))
        if noise < 0:
            raise ValueError('Noise amplitude must be >= 0, got %s' % noise)
        if shapes is not None:
            for shape in shapes:
                if shape.classIndex >= nCl:
                    raise ValueError('Shape class %d is not below n_cl %d' % (shape.classIndex, nCl))

        self.nCl = nCl
        self.imageDim = imageDim
        self.nShapes = nShapes
        self.velocityRange = (int(low), int(high))
        self.nFrames = nFrames
        self.noise = noise
        self.shapes = shapes

    def toDict(self):
        return {'n_cl': self.nCl,
                'image_dim': self.imageDim,
                'shapes': self.nShapes if self.shapes is None else [shape.toDict() for shape in self.shapes],
                'velocity': list(self.velocityRange),
                'frames': self.nFrames,
                'noise': self.noise}


def drawShapes(rng, count, nCl, dims, velocityRange=(0, 0)):
    """Random shapes sized relative to the smaller image side
    """
    height, width = dims
    side = min(height, width)
    low, high = velocityRange
    shapes = []
    for _ in range(count):
        kind = SHAPE_KINDS[int(rng.integers(len(SHAPE_KINDS)))]
        classIndex = int(rng.integers(1, nCl))
        if kind == 'rectangle':
            size = tuple(int(value) for value in rng.integers(max(1, side // 8), max(2, side // 2) + 1, size=2))
            position = (int(rng.integers(0, max(1, height - size[0] + 1))),
                        int(rng.integers(0, max(1, width - size[1] + 1))))
        else:
            radius = int(rng.integers(max(1, side // 16), max(2, side // 4) + 1))
            size = (radius,)
            position = (int(rng.integers(0, height)), int(rng.integers(0, width)))
        velocity = tuple(int(value) for value in rng.integers(low, high + 1, size=2))
        shapes.append(Shape(kind, classIndex, position, size, velocity))
    return shapes


def paintLabels(shapes, dims, t=0):
    labels = np.zeros(dims, dtype=np.int64)
    for shape in shapes:
        labels[shape.mask(dims, t)] = shape.classIndex
    return labels


def generateProceduralScene(seed, params=None, name=None):
    """Deterministic LabeledSequence of moving shapes.

    The generator draws the shapes first, then the per-frame noise.
    """
    if params is None:
        params = SceneParams()

    rng = np.random.default_rng(seed)
    dims = (params.imageDim, params.imageDim)
    if params.shapes is not None:
        shapes = list(params.shapes)
    else:
        shapes = drawShapes(rng, params.nShapes, params.nCl, dims, params.velocityRange)

    frames = []
    labels = []
    for t in range(params.nFrames):
        labelMap = paintLabels(shapes, dims, t)
        frames.append(renderFrame(labelMap, params.nCl, params.noise, rng))
        labels.append(labelMap)

    provenance = {'generator': 'procedural', 'seed': seed, 'params': params.toDict()}
    _logger.debug('Generated procedural scene, seed %s, %d shapes', seed, len(shapes))
    return LabeledSequence(frames, labels, params.nCl, name or 'procedural_%s' % seed, provenance)


def generateSourceImage(seed, nCl=4, dims=DEFAULT_SOURCE_DIMS, nShapes=6, noise=DEFAULT_NOISE):
    """Static (image, labels) pair to cut translated sequences from
    """
    rng = np.random.default_rng(seed)
    shapes = drawShapes(rng, nShapes, nCl, dims)
    labels = paintLabels(shapes, dims)
    return renderFrame(labels, nCl, noise, rng), labels
