# -*- coding: utf-8 -*-
"""
Chaotic maps (Bernoulli shift, tent, logistic) handled through their symbolic
dynamics: a sample is the value of its itinerary bit sequence, and iterating
the map is a left shift of that sequence. Nothing here iterates a map in
floating point, except MapModel.step which is only meant for a single step.
"""

import enum
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from chaoscomm.common.constants import DEFAULT_EVAL_WIDTH
from chaoscomm.common.exceptions import InvalidParameterError
from chaoscomm.common.util import (bits_to_int, check_bits,
                                   gray_decode_bits, gray_encode, int_to_bits)

logger = logging.getLogger('chaoscomm')

BitPrefix = Tuple[int, ...]

# float64 holds dyadic rationals exactly up to this many bits
_MAX_EVAL_WIDTH = 52


class MapKind(enum.Enum):
    BSM = 'bsm'
    TENT = 'tent'
    LOGISTIC = 'logistic'

    @classmethod
    def from_name(cls, name):
        if isinstance(name, MapKind):
            return name
        try:
            return cls(str(name).strip().lower())
        except ValueError:
            raise InvalidParameterError('Unsupported map: {}. Expected one of {}'.format(
                name, ', '.join(k.value for k in cls)))


@dataclass(frozen=True)
class MapModel:
    kind: MapKind
    eval_width: int = DEFAULT_EVAL_WIDTH

    def __post_init__(self):
        object.__setattr__(self, 'kind', MapKind.from_name(self.kind))
        if not (1 <= int(self.eval_width) <= _MAX_EVAL_WIDTH):
            raise InvalidParameterError('eval_width must be in [1, {}], got {}'.format(
                _MAX_EVAL_WIDTH, self.eval_width))

    @property
    def gray_coded(self):
        """Tent and logistic cylinders are ordered by the binary-reflected Gray code."""
        return self.kind is not MapKind.BSM

    @property
    def uniform(self):
        """True when the invariant cdf is the identity."""
        return self.kind is not MapKind.LOGISTIC

    def step(self, x):
        """
        One exact application of the analytic map.
        :param x: scalar or array in [0, 1]
        :return: same shape as x
        """
        x = np.asarray(x, dtype=float)
        if self.kind is MapKind.BSM:
            y = np.where(x < 0.5, 2.0 * x, 2.0 * x - 1.0)
        elif self.kind is MapKind.TENT:
            y = np.where(x < 0.5, 2.0 * x, 2.0 * (1.0 - x))
        else:
            y = 4.0 * x * (1.0 - x)
        return float(y) if y.ndim == 0 else y


def _as_unit_array(x, name):
    arr = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any((arr < 0.0) | (arr > 1.0)):
        raise InvalidParameterError('{} must lie in [0, 1], got {}'.format(name, x))
    return arr


def _scalar_or_array(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


def invariant_cdf_inv(map_model: MapModel, x):
    """
    F⁻¹ of the invariant distribution. Identity for BSM and tent, the arcsine
    law sin²(πx/2) (= cos²(π(1−x)/2)) for the logistic map.
    :param map_model:
    :param x: scalar or array in [0, 1]
    :return:
    """
    arr = _as_unit_array(x, 'x')
    if map_model.uniform:
        return _scalar_or_array(arr.copy() if arr.ndim else arr)
    return _scalar_or_array(np.sin(0.5 * np.pi * arr) ** 2)


def forward_cdf(map_model: MapModel, z):
    """
    F of the invariant distribution, the inverse of invariant_cdf_inv.
    :param map_model:
    :param z: scalar or array in [0, 1]
    :return:
    """
    arr = _as_unit_array(z, 'z')
    if map_model.uniform:
        return _scalar_or_array(arr.copy() if arr.ndim else arr)
    # arctan2 keeps precision at both ends of the interval
    return _scalar_or_array(np.arctan2(np.sqrt(arr), np.sqrt(1.0 - arr)) * (2.0 / np.pi))


def cdf_inv_difference(map_model: MapModel, x, h):
    """
    F⁻¹(x + h) − F⁻¹(x − h) in closed form, without cancellation for tiny h.
    """
    x = np.asarray(x, dtype=float)
    h = np.asarray(h, dtype=float)
    if map_model.uniform:
        value = 2.0 * h * np.ones_like(x)
    else:
        value = np.sin(np.pi * x) * np.sin(np.pi * h)
    return _scalar_or_array(value)


def cdf_inv_derivative(map_model: MapModel, x):
    x = np.asarray(x, dtype=float)
    if map_model.uniform:
        value = np.ones_like(x)
    else:
        value = 0.5 * np.pi * np.sin(np.pi * x)
    return _scalar_or_array(value)


def _uniform_value(map_model, bits):
    """Value of the zero-padded sequence for the uniform (BSM/tent) coordinate."""
    q = len(bits)
    if q == 0:
        return 0.0
    if not map_model.gray_coded:
        return bits_to_int(bits) / (1 << q)
    decoded = gray_decode_bits(bits)
    # zero tail after Gray decoding repeats the last decoded bit
    return (bits_to_int(decoded) + decoded[-1]) / (1 << q)


def map_bits_to_sample(map_model: MapModel, prefix: Sequence[int]) -> float:
    """
    M_f of the prefix padded with zeros to infinity.
    :param map_model:
    :param prefix: bits b_1..b_q, b_1 first
    :return: a sample in [0, 1]
    """
    bits = check_bits(prefix)
    value = _uniform_value(map_model, bits)
    if map_model.uniform:
        return value
    return float(np.sin(0.5 * np.pi * value) ** 2)


def cell_index(map_model: MapModel, prefix: Sequence[int]) -> int:
    """
    Index ι in 1..2^q of the level-q cell containing F(M_f([prefix|...])).
    """
    bits = check_bits(prefix)
    if not bits:
        raise InvalidParameterError('cell_index needs a prefix of length q >= 1')
    if map_model.gray_coded:
        bits = gray_decode_bits(bits)
    return 1 + bits_to_int(bits)


def cell_indices(map_model: MapModel, bits_matrix) -> np.ndarray:
    """
    Row-wise cell_index of a (rows, q) 0/1 matrix, for q <= 62.
    """
    bits = np.asarray(bits_matrix, dtype=np.int64)
    if bits.ndim != 2 or bits.shape[1] == 0:
        raise InvalidParameterError('cell_indices needs a (rows, q) matrix with q >= 1')
    if map_model.gray_coded:
        bits = np.bitwise_xor.accumulate(bits, axis=1)
    q = bits.shape[1]
    weights = np.left_shift(np.int64(1), np.arange(q - 1, -1, -1, dtype=np.int64))
    return 1 + bits @ weights


def _check_index(index, q):
    if q < 1:
        raise InvalidParameterError('q must be >= 1, got {}'.format(q))
    if not (1 <= index <= (1 << q)):
        raise InvalidParameterError('cell index {} out of range 1..{}'.format(index, 1 << q))


def quantized_level(map_model: MapModel, index: int, q: int) -> float:
    """
    Mid-cell representative F⁻¹((2ι − 1) / 2^(q+1)).
    """
    _check_index(index, q)
    return invariant_cdf_inv(map_model, (2 * index - 1) / float(1 << (q + 1)))


@lru_cache(maxsize=128)
def _levels(kind: MapKind, q: int) -> np.ndarray:
    mids = (2.0 * np.arange(1, (1 << q) + 1) - 1.0) / float(1 << (q + 1))
    levels = invariant_cdf_inv(MapModel(kind), mids)
    levels.setflags(write=False)
    return levels


def quantized_levels(map_model: MapModel, q: int) -> np.ndarray:
    """All 2^q quantized levels, ordered by cell index. The array is read-only."""
    if q < 1:
        raise InvalidParameterError('q must be >= 1, got {}'.format(q))
    return _levels(map_model.kind, q)


def demap_index_to_bits(map_model: MapModel, index: int, q: int) -> BitPrefix:
    """
    Inverse of cell_index: the q bits whose cell is ι.
    """
    _check_index(index, q)
    value = index - 1
    if map_model.gray_coded:
        value = gray_encode(value)
    return tuple(int_to_bits(value, q))


@lru_cache(maxsize=64)
def _bit_table(kind: MapKind, q: int) -> np.ndarray:
    values = np.arange(1 << q, dtype=np.int64)
    if kind is not MapKind.BSM:
        values = values ^ (values >> 1)
    shifts = np.arange(q - 1, -1, -1, dtype=np.int64)
    table = ((values[:, None] >> shifts) & 1).astype(bool)
    table.setflags(write=False)
    return table


def leaf_bit_table(map_model: MapModel, q: int) -> np.ndarray:
    """
    (2^q, q) boolean table, row ι−1 is demap_index_to_bits(ι, q).
    """
    if q < 1:
        raise InvalidParameterError('q must be >= 1, got {}'.format(q))
    return _bit_table(map_model.kind, q)


def index_of_suffix(map_model: MapModel, indices: np.ndarray, q: int, drop: int) -> np.ndarray:
    """
    Cell indices (level q − drop) of the sequences left after discarding the
    first `drop` bits of the level-q cells `indices`.
    """
    v = np.asarray(indices, dtype=np.int64) - 1
    if map_model.gray_coded:
        v = v ^ (v >> 1)
    v = v & ((1 << (q - drop)) - 1)
    if map_model.gray_coded:
        # vectorized Gray decode
        shift = 1
        while shift < q:
            v = v ^ (v >> shift)
            shift <<= 1
    return v + 1


def trajectory_sample(map_model: MapModel, u: Sequence[int], j: int) -> float:
    """
    f^(j)(M_f(u)) evaluated as M_f of the W-bit window u[j:j+W].
    :param map_model:
    :param u: itinerary of length N
    :param j: number of map applications
    :return:
    """
    width = map_model.eval_width
    if j < 0 or j + width > len(u):
        raise InvalidParameterError('trajectory_sample needs j + W <= N (j={}, W={}, N={})'.format(
            j, width, len(u)))
    return map_bits_to_sample(map_model, u[j:j + width])


def trajectory(map_model: MapModel, u: Sequence[int]) -> np.ndarray:
    """
    trajectory_sample for every j in 0..N−W at once.
    """
    width = map_model.eval_width
    bits = np.asarray(check_bits(u), dtype=np.int64)
    if len(bits) < width:
        raise InvalidParameterError('sequence of length {} is shorter than W={}'.format(len(bits), width))
    windows = sliding_window_view(bits, width)
    weights = 0.5 ** np.arange(1, width + 1)
    if map_model.gray_coded:
        decoded = np.bitwise_xor.accumulate(windows, axis=1)
        values = decoded @ weights + decoded[:, -1] * 0.5 ** width
    else:
        values = windows @ weights
    if not map_model.uniform:
        values = np.sin(0.5 * np.pi * values) ** 2
    return values


__all__ = [
    'BitPrefix', 'MapKind', 'MapModel', 'invariant_cdf_inv', 'forward_cdf', 'cdf_inv_difference',
    'cdf_inv_derivative', 'map_bits_to_sample', 'cell_index', 'cell_indices', 'quantized_level',
    'quantized_levels', 'demap_index_to_bits', 'leaf_bit_table', 'index_of_suffix',
    'trajectory_sample', 'trajectory',
]
