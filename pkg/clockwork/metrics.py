"""Temporal difference and segmentation accuracy metrics.

Confusion counts follow the usual convention: counts[i, j] is the number of
pixels of true class i predicted as class j. Pixels whose ground truth is
IGNORE_LABEL are not scored.
"""

import logging

import numpy as np

from clockwork import tensorops
from clockwork.tensorops import IGNORE_LABEL


_logger = logging.getLogger('clockwork')


DEFAULT_BAND_RADIUS = 10
DEFAULT_QUANTIZATION_LEVELS = 32


class ConfusionMatrix:
    """Pixel counts of (true class, predicted class) pairs

    Public attributes:
        nCl         class count
        counts      (nCl, nCl) int64 array
    """
    def __init__(self, nCl, counts=None):
        if nCl < 1:
            raise ValueError('Confusion matrix needs at least one class')
        if counts is None:
            counts = np.zeros((nCl, nCl), dtype=np.int64)
        counts = np.array(counts, dtype=np.int64)
        if counts.shape != (nCl, nCl):
            raise ValueError('Confusion counts must be %dx%d, got %s' % (nCl, nCl, counts.shape))
        if (counts < 0).any():
            raise ValueError('Confusion counts must be nonnegative')
        self.nCl = nCl
        self.counts = counts

    def total(self):
        return int(self.counts.sum())

    def __add__(self, other):
        if self.nCl != other.nCl:
            raise ValueError('Cannot merge confusion matrices of %d and %d classes' % (self.nCl, other.nCl))
        return ConfusionMatrix(self.nCl, self.counts + other.counts)

    def __eq__(self, other):
        return isinstance(other, ConfusionMatrix) and \
               self.nCl == other.nCl and \
               np.array_equal(self.counts, other.counts)

    def __str__(self):
        return 'ConfusionMatrix(%d classes, %d pixels)\n%s' % (self.nCl, self.total(), self.counts)


def scoreMapDistance(a, b):
    """Fraction of pixels whose labels differ, in [0, 1]
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError('Label maps differ in shape: %s vs %s' % (a.shape, b.shape))
    if a.size == 0:
        raise ValueError('Label maps are empty')
    return float(np.count_nonzero(a != b)) / a.size


def accumulateConfusion(pred, gt, nCl, ignoreLabel=IGNORE_LABEL):
    """Confusion matrix of one prediction against ground truth
    """
    pred = np.asarray(pred)
    gt = np.asarray(gt)
    if pred.shape != gt.shape:
        raise ValueError('Prediction %s and ground truth %s differ in shape' % (pred.shape, gt.shape))

    scored = gt != ignoreLabel
    truth = gt[scored].astype(np.int64)
    guess = pred[scored].astype(np.int64)
    if truth.size:
        if truth.min() < 0 or truth.max() >= nCl:
            raise ValueError('Ground truth labels outside [0, %d): min %d, max %d' % (nCl, truth.min(), truth.max()))
        if guess.min() < 0 or guess.max() >= nCl:
            raise ValueError('Predicted labels outside [0, %d): min %d, max %d' % (nCl, guess.min(), guess.max()))

    counts = np.bincount(nCl * truth + guess, minlength=nCl * nCl).reshape(nCl, nCl)
    return ConfusionMatrix(nCl, counts)


def mergeConfusion(matrices):
    """Elementwise sum of confusion matrices
    """
    matrices = list(matrices)
    if not matrices:
        raise ValueError('Nothing to merge')
    merged = matrices[0]
    for matrix in matrices[1:]:
        merged = merged + matrix
    return merged


def _classStats(cm):
    counts = cm.counts.astype(np.float64)
    hits = np.diag(counts)
    truth = counts.sum(axis=1)
    union = truth + counts.sum(axis=0) - hits
    return hits, truth, union


def perClassIu(cm):
    """IU of every class, NaN where the class is absent from prediction and ground truth
    """
    hits, truth, union = _classStats(cm)
    iu = np.full(cm.nCl, np.nan)
    present = union > 0
    iu[present] = hits[present] / union[present]
    return iu


def meanIu(cm):
    """Mean IU over classes present in prediction or ground truth
    """
    iu = perClassIu(cm)
    present = ~np.isnan(iu)
    if not present.any():
        raise ValueError('Mean IU is undefined: every class is absent')
    if not present.all():
        _logger.debug('Mean IU excludes absent classes %s', np.flatnonzero(~present).tolist())
    return float(iu[present].mean())


def fwIu(cm):
    """Frequency weighted IU
    """
    hits, truth, union = _classStats(cm)
    total = truth.sum()
    if total == 0:
        raise ValueError('Frequency weighted IU is undefined for an empty confusion matrix')
    present = truth > 0
    return float((truth[present] * hits[present] / union[present]).sum() / total)


def pixelAccuracy(cm):
    hits, truth, union = _classStats(cm)
    total = truth.sum()
    if total == 0:
        raise ValueError('Pixel accuracy is undefined for an empty confusion matrix')
    return float(hits.sum() / total)


def meanClassAccuracy(cm):
    """Mean over ground truth classes of the fraction of their pixels predicted correctly
    """
    hits, truth, union = _classStats(cm)
    present = truth > 0
    if not present.any():
        raise ValueError('Mean class accuracy is undefined for an empty confusion matrix')
    return float((hits[present] / truth[present]).mean())


def _dilate(mask, radius):
    """Square (Chebyshev) dilation
    """
    height, width = mask.shape
    radius = min(radius, max(height, width))
    rows = mask.copy()
    for shift in range(1, radius + 1):
        rows[shift:, :] |= mask[:-shift, :]
        rows[:-shift, :] |= mask[shift:, :]
    result = rows.copy()
    for shift in range(1, radius + 1):
        result[:, shift:] |= rows[:, :-shift]
        result[:, :-shift] |= rows[:, shift:]
    return result


def boundaryBandMask(gt, radius=DEFAULT_BAND_RADIUS):
    """Pixels near ground truth label boundaries.

    Boundary pixels have a 4-neighbour of a different label. The band is the
    boundary dilated by a square of Chebyshev radius (radius - 1), so radius 1
    is the boundary itself: two pixels wide along a straight edge.
    """
    if radius < 1:
        raise ValueError('Band radius must be >= 1, got %d' % radius)
    gt = np.asarray(gt)
    if gt.ndim != 2:
        raise ValueError('Ground truth must be a 2-D label map')

    boundary = np.zeros(gt.shape, dtype=bool)
    vertical = gt[1:, :] != gt[:-1, :]
    horizontal = gt[:, 1:] != gt[:, :-1]
    boundary[1:, :] |= vertical
    boundary[:-1, :] |= vertical
    boundary[:, 1:] |= horizontal
    boundary[:, :-1] |= horizontal

    return _dilate(boundary, radius - 1)


def restrictToBand(gt, mask):
    """Ground truth with every off-band pixel set to IGNORE_LABEL
    """
    gt = np.asarray(gt)
    if gt.shape != mask.shape:
        raise ValueError('Band mask %s does not match ground truth %s' % (mask.shape, gt.shape))
    restricted = gt.copy()
    restricted[~mask] = IGNORE_LABEL
    return restricted


def quantizeFrame(frame, levels=DEFAULT_QUANTIZATION_LEVELS):
    """Intensities clipped to [0, 1] and cut into `levels` equal steps
    """
    if levels < 1:
        raise ValueError('Quantization needs at least one level, got %d' % levels)
    clipped = np.clip(np.asarray(frame, dtype=np.float64), 0.0, 1.0)
    return np.minimum(np.floor(clipped * levels), levels - 1).astype(np.int64)


def quantizedPixelDifference(a, b, levels=DEFAULT_QUANTIZATION_LEVELS):
    """Fraction of pixels where any channel changes its quantized intensity
    """
    tensorops.checkTensor(a, 'frame')
    tensorops.checkTensor(b, 'frame')
    if a.shape != b.shape:
        raise ValueError('Frames differ in shape: %s vs %s' % (a.shape, b.shape))
    changed = (quantizeFrame(a, levels) != quantizeFrame(b, levels)).any(axis=0)
    return float(np.count_nonzero(changed)) / changed.size


def _meanStdev(series):
    if not series:
        return 0.0, 0.0
    values = np.asarray(series, dtype=np.float64)
    return float(values.mean()), float(values.std())


class TemporalProfile:
    """Temporal difference of every stage over consecutive frame pairs

    Public attributes:
        stageSeries     list per stage of per-pair d_sm values
        pixelSeries     per-pair quantized pixel differences
    """
    def __init__(self, stageSeries, pixelSeries):
        self.stageSeries = stageSeries
        self.pixelSeries = pixelSeries

    def stageMeans(self):
        return [_meanStdev(series)[0] for series in self.stageSeries]

    def isNonincreasing(self):
        """Stage means do not grow with depth
        """
        means = self.stageMeans()
        return all(deep <= shallow for shallow, deep in zip(means, means[1:]))

    def rows(self):
        """(name, mean, stdev, series) rows, pixels first
        """
        rows = [('pixels',) + _meanStdev(self.pixelSeries) + (self.pixelSeries,)]
        for index, series in enumerate(self.stageSeries):
            rows.append(('stage%d' % index,) + _meanStdev(series) + (series,))
        return rows


def stageLabels(outputs):
    """Argmax labels of every stage score map
    """
    return [tensorops.argmaxChannels(output.score) for output in outputs]


def temporalDifferenceProfile(net, frames, levels=DEFAULT_QUANTIZATION_LEVELS):
    """d_sm of every stage's score labels across consecutive frames, with the input pixel baseline
    """
    from clockwork.stagenet import fullForward

    frames = list(frames)
    if len(frames) < 2:
        raise ValueError('Temporal difference needs at least 2 frames, got %d' % len(frames))

    stageSeries = [[] for _ in range(net.stageCount)]
    pixelSeries = []
    previous = None
    for index, frame in enumerate(frames):
        outputs, fused = fullForward(net, frame)
        labels = stageLabels(outputs)
        if previous is not None:
            for stage, (now, before) in enumerate(zip(labels, previous)):
                stageSeries[stage].append(scoreMapDistance(now, before))
            pixelSeries.append(quantizedPixelDifference(frame, frames[index - 1], levels))
        previous = labels

    return TemporalProfile(stageSeries, pixelSeries)


def summarize(cm):
    """Metric dict of one confusion matrix. Undefined metrics are None
    """
    summary = {}
    for name, function in (('mean_iu', meanIu),
                           ('fw_iu', fwIu),
                           ('pixel_accuracy', pixelAccuracy),
                           ('mean_class_accuracy', meanClassAccuracy)):
        try:
            summary[name] = function(cm)
        except ValueError:
            summary[name] = None
    return summary


class SequenceEvaluation:
    """Accuracy of predictions over one sequence

    Public attributes:
        confusion       pooled confusion matrix of scored frames
        bandConfusion   pooled confusion matrix restricted to the boundary band
        frameMeanIu     per-frame mean IU, None for frames which are not scored
        frameFwIu       per-frame fwIU, None for frames which are not scored
    """
    def __init__(self, confusion, bandConfusion, frameMeanIu, frameFwIu):
        self.confusion = confusion
        self.bandConfusion = bandConfusion
        self.frameMeanIu = frameMeanIu
        self.frameFwIu = frameFwIu

    def summary(self):
        result = summarize(self.confusion)
        band = summarize(self.bandConfusion)
        result['band_mean_iu'] = band['mean_iu']
        result['band_fw_iu'] = band['fw_iu']
        return result


def evaluateSequence(predictions, groundTruth, nCl, bandRadius=DEFAULT_BAND_RADIUS, labelStride=1):
    """Score predictions against ground truth.
    With labelStride > 1 only frames t with t % labelStride == 0 are scored.
    """
    if len(predictions) != len(groundTruth):
        raise ValueError('%d predictions for %d ground truth maps' % (len(predictions), len(groundTruth)))
    if labelStride < 1:
        raise ValueError('Label stride must be >= 1, got %d' % labelStride)

    frameMatrices = []
    bandMatrices = []
    frameMeanIu = []
    frameFwIu = []
    for index, (pred, gt) in enumerate(zip(predictions, groundTruth)):
        if index % labelStride:
            frameMeanIu.append(None)
            frameFwIu.append(None)
            continue
        cm = accumulateConfusion(pred, gt, nCl)
        frameMatrices.append(cm)
        bandGt = restrictToBand(gt, boundaryBandMask(gt, bandRadius))
        bandMatrices.append(accumulateConfusion(pred, bandGt, nCl))
        frameSummary = summarize(cm)
        frameMeanIu.append(frameSummary['mean_iu'])
        frameFwIu.append(frameSummary['fw_iu'])

    return SequenceEvaluation(mergeConfusion(frameMatrices), mergeConfusion(bandMatrices),
                              frameMeanIu, frameFwIu)
