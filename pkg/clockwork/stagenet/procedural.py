"""Procedural segmenters: staged networks with exact, weight-free semantics.

makeProceduralSegmenter is the ground-truth segmenter. Its first stage
decodes palette colours into labels, and every stage k scores the one-hot
majority vote of the labels over the cells of its own downsample factor.
Deeper stages are coarser but never wrong about the dominant class of a cell.

makeObjectnessSegmenter splits the work the way shallow and deep layers of a
trained network do. The first stage scores objectness only: every foreground
class in object cells, background elsewhere. It places boundaries well but
cannot tell foreground classes apart. Deeper stages name the object class of
each cell of their coarser grid without moving the boundary.

Both pass the full resolution one-hot labels on as stage features.
"""

import numpy as np

from clockwork import tensorops
from clockwork.data import classPalette, decodeLabels
from clockwork.stagenet import StageOutput, StagedNetwork


DEFAULT_FACTORS = (2, 4, 8)
DEFAULT_OBJECTNESS_WEIGHT = 2.5
MAJORITY_BONUS = 1e-5


def oneHot(labels, nCl):
    """(H, W) labels to (nCl, H, W) float32 indicators
    """
    classes = np.arange(nCl)[:, np.newaxis, np.newaxis]
    return (labels[np.newaxis] == classes).astype(tensorops.DTYPE)


def _cellCounts(indicators, factor):
    """Per-cell sums of (C, H, W) indicators over factor x factor cells
    """
    channels, height, width = indicators.shape
    if height % factor or width % factor:
        raise ValueError('Frame %dx%d is not divisible by stage factor %d' % (height, width, factor))
    cells = indicators.astype(np.int64).reshape(channels, height // factor, factor, width // factor, factor)
    return cells.sum(axis=(2, 4))


def majorityVote(labels, nCl, factor):
    """Most frequent class of every factor x factor cell. Ties go to the lowest class
    """
    return np.argmax(_cellCounts(oneHot(labels, nCl), factor), axis=0)


def _preparePalette(nCl, palette):
    if palette is None:
        palette = classPalette(nCl)
    palette = np.asarray(palette, dtype=np.float64)
    if palette.shape[0] != nCl:
        raise ValueError('Palette has %d colours for %d classes' % (palette.shape[0], nCl))
    return palette


class _ProceduralStage:
    def __init__(self, nCl, factor, weight=1.0):
        if factor < 1:
            raise ValueError('Stage factor must be >= 1, got %d' % factor)
        self.nCl = nCl
        self.downsampleFactor = factor
        self.weight = weight

    @property
    def outChannels(self):
        return self.nCl

    def _checkOneHot(self, input):
        tensorops.checkTensor(input, 'procedural stage input')
        if input.shape[0] != self.nCl:
            raise ValueError('Procedural stage expects %d one-hot channels, got %d' % (self.nCl, input.shape[0]))

    def __eq__(self, other):
        if type(self) is not type(other) or self.__dict__.keys() != other.__dict__.keys():
            return False
        return all(np.array_equal(value, other.__dict__[key]) for key, value in self.__dict__.items())


class MajorityStage(_ProceduralStage):
    """Scores the one-hot majority vote of every cell
    """
    def forward(self, input):
        self._checkOneHot(input)
        majority = np.argmax(_cellCounts(input, self.downsampleFactor), axis=0)
        return StageOutput(input, oneHot(majority, self.nCl))

    def __str__(self):
        return 'majority /%d' % self.downsampleFactor


class DecodeStage(MajorityStage):
    """Decodes colours, then scores the majority vote like the deeper stages

    Public attributes:
        palette     (nCl, C) colours used to decode frames
    """
    def __init__(self, nCl, factor, palette):
        MajorityStage.__init__(self, nCl, factor)
        self.palette = palette

    def forward(self, input):
        labels = decodeLabels(input, self.nCl, self.palette)
        return MajorityStage.forward(self, oneHot(labels, self.nCl))

    def __str__(self):
        return 'decode, majority /%d' % self.downsampleFactor


class AppearanceStage(_ProceduralStage):
    """Decodes colours, scores objectness

    Public attributes:
        palette     (nCl, C) colours used to decode frames
    """
    def __init__(self, nCl, factor, weight, palette):
        _ProceduralStage.__init__(self, nCl, factor, weight)
        self.palette = palette

    def forward(self, input):
        labels = decodeLabels(input, self.nCl, self.palette)
        background = (labels == 0).astype(tensorops.DTYPE)[np.newaxis]
        counts = _cellCounts(background, self.downsampleFactor)[0]
        cellSize = self.downsampleFactor * self.downsampleFactor
        isBackground = 2 * counts >= cellSize

        score = np.zeros((self.nCl,) + isBackground.shape, dtype=tensorops.DTYPE)
        score[0][isBackground] = self.weight
        score[1:, ~isBackground] = self.weight
        return StageOutput(oneHot(labels, self.nCl), score)

    def __str__(self):
        return 'appearance /%d weight %s' % (self.downsampleFactor, self.weight)


class SemanticStage(_ProceduralStage):
    """Names the object class of coarse cells.

    A cell holding any foreground scores its dominant foreground class and the
    background with the same weight, so in fusion it decides which class an
    object is without moving the object boundary. The majority class of the
    cell gets MAJORITY_BONUS on top, so the argmax labels are the majority vote.
    """
    def forward(self, input):
        self._checkOneHot(input)

        counts = _cellCounts(input, self.downsampleFactor)
        majority = np.argmax(counts, axis=0)
        hasForeground = counts[1:].sum(axis=0) > 0
        foreground = 1 + np.argmax(counts[1:], axis=0)

        weight = self.weight
        bonus = weight * MAJORITY_BONUS
        score = np.zeros(counts.shape, dtype=np.float64)
        score[0] = weight * hasForeground + bonus * (majority == 0)
        rows, cols = np.nonzero(hasForeground)
        score[foreground[rows, cols], rows, cols] = weight + bonus * (majority[rows, cols] != 0)
        return StageOutput(input, score.astype(tensorops.DTYPE))

    def __str__(self):
        return 'semantic /%d' % self.downsampleFactor


def makeProceduralSegmenter(nCl, factors=DEFAULT_FACTORS, palette=None):
    """Staged network whose stage k scores the one-hot majority-vote labels at factor k
    """
    palette = _preparePalette(nCl, palette)
    stages = [DecodeStage(nCl, factors[0], palette)]
    stages += [MajorityStage(nCl, factor) for factor in factors[1:]]
    return StagedNetwork(stages, nCl, palette.shape[1], kind='procedural',
                         architecture={'n_cl': nCl, 'factors': list(factors)})


def makeObjectnessSegmenter(nCl, factors=DEFAULT_FACTORS, palette=None,
                            objectnessWeight=DEFAULT_OBJECTNESS_WEIGHT):
    """Staged network with an objectness first stage and class-naming deeper stages
    """
    palette = _preparePalette(nCl, palette)
    stages = [AppearanceStage(nCl, factors[0], objectnessWeight, palette)]
    stages += [SemanticStage(nCl, factor) for factor in factors[1:]]
    return StagedNetwork(stages, nCl, palette.shape[1], kind='objectness',
                         architecture={'n_cl': nCl, 'factors': list(factors),
                                       'objectness_weight': objectnessWeight})
