"""Dense tensor kernels for small fully convolutional stages

Tensors are float32 numpy arrays of shape (channels, height, width).
Label maps are 2-D integer arrays of class indices, IGNORE_LABEL marks
pixels which are not scored.

All kernels are pure and deterministic. Loops run in a fixed order, so
identical inputs give bit-identical outputs.
"""

import numpy as np


DTYPE = np.float32

IGNORE_LABEL = 255


def checkTensor(tensor, name='tensor'):
    """Check tensor invariants. Returns the tensor
    """
    if not isinstance(tensor, np.ndarray):
        raise ValueError('%s must be a numpy array, got %s' % (name, type(tensor).__name__))
    if tensor.ndim != 3:
        raise ValueError('%s must have 3 dimensions (channels, height, width), got shape %s' %
                         (name, tensor.shape))
    if tensor.dtype != DTYPE:
        raise ValueError('%s must be float32, got %s' % (name, tensor.dtype))
    if not np.isfinite(tensor).all():
        raise ValueError('%s contains NaN or Inf values' % name)
    return tensor


def makeTensor(values):
    """Convert array-like value to a contiguous float32 tensor
    """
    tensor = np.ascontiguousarray(values, dtype=DTYPE)
    if tensor.ndim == 2:
        tensor = tensor[np.newaxis]
    return checkTensor(tensor)


def checkLabelMap(labels, nCl, name='label map'):
    """Check that every non-ignore label is a valid class index
    """
    if not isinstance(labels, np.ndarray) or labels.ndim != 2:
        raise ValueError('%s must be a 2-D array' % name)
    valid = labels != IGNORE_LABEL
    if valid.any():
        scored = labels[valid]
        if scored.min() < 0 or scored.max() >= nCl:
            raise ValueError('%s has labels outside [0, %d): min %d, max %d' %
                             (name, nCl, scored.min(), scored.max()))
    return labels


def _outputSize(size, kernel, stride, pad):
    return (size + 2 * pad - kernel) // stride + 1


def conv2d(input, kernels, bias, stride=1, pad=0):
    """2-D convolution with zero padding.

    kernels is a (outC, inC, kH, kW) bank, bias has outC values.
    Accumulation order is fixed: input channel outer loop, then kernel rows,
    then kernel columns.
    """
    checkTensor(input, 'conv2d input')
    kernels = np.asarray(kernels, dtype=DTYPE)
    bias = np.asarray(bias, dtype=DTYPE)

    if kernels.ndim != 4:
        raise ValueError('conv2d kernels must have shape (outC, inC, kH, kW), got %s' % (kernels.shape,))
    outChannels, inChannels, kernelHeight, kernelWidth = kernels.shape
    if input.shape[0] != inChannels:
        raise ValueError('conv2d input has %d channels, kernels expect %d' % (input.shape[0], inChannels))
    if kernelHeight % 2 == 0 or kernelWidth % 2 == 0:
        raise ValueError('conv2d kernel dims must be odd, got %dx%d' % (kernelHeight, kernelWidth))
    if bias.shape != (outChannels,):
        raise ValueError('conv2d bias must have %d values, got shape %s' % (outChannels, bias.shape))
    if stride < 1:
        raise ValueError('conv2d stride must be >= 1, got %d' % stride)
    if pad < 0:
        raise ValueError('conv2d pad must be >= 0, got %d' % pad)

    _, height, width = input.shape
    outHeight = _outputSize(height, kernelHeight, stride, pad)
    outWidth = _outputSize(width, kernelWidth, stride, pad)
    if outHeight < 1 or outWidth < 1:
        raise ValueError('conv2d output would be empty: input %dx%d, kernel %dx%d, pad %d, stride %d' %
                         (height, width, kernelHeight, kernelWidth, pad, stride))

    if pad:
        padded = np.pad(input, ((0, 0), (pad, pad), (pad, pad)))
    else:
        padded = input

    output = np.empty((outChannels, outHeight, outWidth), dtype=DTYPE)
    output[:] = bias[:, np.newaxis, np.newaxis]

    rowSpan = stride * (outHeight - 1) + 1
    colSpan = stride * (outWidth - 1) + 1
    for channel in range(inChannels):
        for row in range(kernelHeight):
            for col in range(kernelWidth):
                window = padded[channel, row:row + rowSpan:stride, col:col + colSpan:stride]
                output += kernels[:, channel, row, col][:, np.newaxis, np.newaxis] * window

    return checkTensor(output, 'conv2d output')


def maxpool2d(input, window, stride):
    """Per-channel max pooling without padding
    """
    checkTensor(input, 'maxpool2d input')
    if window < 1 or stride < 1:
        raise ValueError('maxpool2d window and stride must be >= 1, got %d and %d' % (window, stride))

    _, height, width = input.shape
    if window > height or window > width:
        raise ValueError('maxpool2d window %d is larger than input %dx%d' % (window, height, width))

    outHeight = (height - window) // stride + 1
    outWidth = (width - window) // stride + 1
    rowSpan = stride * (outHeight - 1) + 1
    colSpan = stride * (outWidth - 1) + 1

    output = input[:, 0:rowSpan:stride, 0:colSpan:stride].copy()
    for row in range(window):
        for col in range(window):
            np.maximum(output, input[:, row:row + rowSpan:stride, col:col + colSpan:stride], out=output)

    return output


def relu(input):
    """Elementwise max(0, x)
    """
    checkTensor(input, 'relu input')
    return np.maximum(input, DTYPE(0))


def _samplePositions(size, outSize):
    """Align-corners source positions: (lower index, upper index, upper weight)
    """
    if outSize > 1 and size > 1:
        positions = np.arange(outSize, dtype=np.float64) * (size - 1) / (outSize - 1)
        lower = np.minimum(np.floor(positions).astype(np.intp), size - 2)
        weights = positions - lower
        return lower, lower + 1, weights
    else:
        zeros = np.zeros(outSize, dtype=np.intp)
        return zeros, zeros, np.zeros(outSize, dtype=np.float64)


def upsampleBilinear(input, factor):
    """Bilinear upsampling by an integer factor, align-corners convention.

    Output pixel (i, j) samples the input at (i*(H-1)/(outH-1), j*(W-1)/(outW-1)).
    Weights are evaluated in float64, the result is rounded to float32 once.
    """
    checkTensor(input, 'upsample input')
    if factor < 1:
        raise ValueError('upsample factor must be >= 1, got %d' % factor)
    if factor == 1:
        return input.copy()

    _, height, width = input.shape
    source = input.astype(np.float64)

    top, bottom, rowWeights = _samplePositions(height, height * factor)
    rowWeights = rowWeights[np.newaxis, :, np.newaxis]
    rows = source[:, top, :] * (1.0 - rowWeights) + source[:, bottom, :] * rowWeights

    left, right, colWeights = _samplePositions(width, width * factor)
    colWeights = colWeights[np.newaxis, np.newaxis, :]
    output = rows[:, :, left] * (1.0 - colWeights) + rows[:, :, right] * colWeights

    return checkTensor(output.astype(DTYPE), 'upsample output')


def argmaxChannels(scores):
    """Per-pixel index of the maximal channel. Ties go to the lowest channel
    """
    checkTensor(scores, 'argmax input')
    if scores.shape[0] < 1:
        raise ValueError('argmax needs at least one channel')
    return np.argmax(scores, axis=0)


def add(a, b):
    """Elementwise sum of two tensors with identical shapes
    """
    checkTensor(a, 'add operand')
    checkTensor(b, 'add operand')
    if a.shape != b.shape:
        raise ValueError('add shape mismatch: %s vs %s' % (a.shape, b.shape))
    return checkTensor(a + b, 'add output')
