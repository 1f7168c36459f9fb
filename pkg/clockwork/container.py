"""CWKT tensor container.

Layout, all little-endian:

    magic    4 bytes  b'CWKT'
    version  1 byte   0x01
    dtype    1 byte   0x00 = uint8, 0x01 = float32
    ndim     1 byte
    dims     ndim x uint32
    payload  row-major values
"""

import os
import logging

import numpy as np


_logger = logging.getLogger('clockwork')


MAGIC = b'CWKT'
FORMAT_VERSION = 1

_DTYPE_CODES = {
    0x00: np.dtype('u1'),
    0x01: np.dtype('<f4'),
}

_CODE_BY_KIND = {
    np.dtype('u1'): 0x00,
    np.dtype('<f4'): 0x01,
}

_HEADER_SIZE = len(MAGIC) + 3


class ContainerError(IOError):
    """Malformed, truncated or inconsistent container data
    """
    pass


def encodeTensor(array):
    """Serialize uint8 or float32 array to CWKT bytes
    """
    array = np.asarray(array)
    dtype = array.dtype.newbyteorder('<') if array.dtype.kind == 'f' else array.dtype
    if dtype not in _CODE_BY_KIND:
        raise ValueError('CWKT stores only uint8 and float32 arrays, got %s' % array.dtype)
    if array.ndim > 255:
        raise ValueError('CWKT supports at most 255 dimensions')

    header = MAGIC + bytes((FORMAT_VERSION, _CODE_BY_KIND[dtype], array.ndim))
    dims = np.array(array.shape, dtype='<u4').tobytes()
    payload = np.ascontiguousarray(array, dtype=dtype).tobytes()
    return header + dims + payload


def decodeTensor(data, source='<bytes>'):
    """Parse CWKT bytes. Raises ContainerError on any inconsistency
    """
    if len(data) < _HEADER_SIZE:
        raise ContainerError('%s: truncated header (%d bytes)' % (source, len(data)))
    if data[:len(MAGIC)] != MAGIC:
        raise ContainerError('%s: bad magic %s' % (source, repr(data[:len(MAGIC)])))

    version, dtypeCode, ndim = data[len(MAGIC):_HEADER_SIZE]
    if version != FORMAT_VERSION:
        raise ContainerError('%s: unsupported version %d' % (source, version))
    if dtypeCode not in _DTYPE_CODES:
        raise ContainerError('%s: unknown dtype code 0x%02x' % (source, dtypeCode))

    dimsEnd = _HEADER_SIZE + 4 * ndim
    if len(data) < dimsEnd:
        raise ContainerError('%s: truncated dimensions' % source)
    shape = tuple(int(dim) for dim in np.frombuffer(data[_HEADER_SIZE:dimsEnd], dtype='<u4'))

    dtype = _DTYPE_CODES[dtypeCode]
    expected = int(np.prod(shape, dtype=np.int64)) * dtype.itemsize
    payload = data[dimsEnd:]
    if len(payload) != expected:
        raise ContainerError('%s: payload has %d bytes, shape %s needs %d' %
                             (source, len(payload), shape, expected))

    array = np.frombuffer(payload, dtype=dtype).reshape(shape)
    return array.astype(dtype.newbyteorder('='), copy=True)


def writeTensor(path, array):
    with open(path, 'wb') as tensorFile:
        tensorFile.write(encodeTensor(array))
    _logger.debug('Wrote tensor %s to %s', np.shape(array), path)


def readTensor(path):
    if not os.path.isfile(path):
        raise ContainerError('Missing tensor file %s' % path)
    with open(path, 'rb') as tensorFile:
        data = tensorFile.read()
    return decodeTensor(data, path)
