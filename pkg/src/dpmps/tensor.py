"""Dense complex tensors and the contraction/norm primitives.

Everything downstream (MPS algebra, net generation, the DP solver) works on
tensors of this kind.  Entries are complex double precision in row-major
order; operations are pure functions of immutable inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeMismatchError


@dataclass(frozen=True)
class DenseTensor:
    """Arbitrary-rank complex tensor with explicit shape."""

    data: np.ndarray

    @classmethod
    def from_array(cls, arr) -> "DenseTensor":
        a = np.ascontiguousarray(np.asarray(arr, dtype=complex))
        if not np.all(np.isfinite(a.real)) or not np.all(np.isfinite(a.imag)):
            raise ValueError("tensor entries must be finite")
        return cls(a)

    @property
    def shape(self) -> tuple:
        return self.data.shape

    @property
    def rank(self) -> int:
        return self.data.ndim


def contract(a: DenseTensor, b: DenseTensor, axes_a, axes_b) -> DenseTensor:
    """Contract paired axes of two tensors.

    Output axis order is the remaining axes of `a` in order, then the
    remaining axes of `b` in order.  No conjugation is applied.
    """
    axes_a = list(axes_a)
    axes_b = list(axes_b)
    if len(axes_a) != len(axes_b):
        raise ValueError("axis lists must have equal length")
    if len(set(axes_a)) != len(axes_a) or len(set(axes_b)) != len(axes_b):
        raise ValueError("axis lists must be duplicate-free")
    for ia, ib in zip(axes_a, axes_b):
        if a.shape[ia] != b.shape[ib]:
            raise ShapeMismatchError(
                f"axis {ia} of first tensor (extent {a.shape[ia]}) does not "
                f"match axis {ib} of second tensor (extent {b.shape[ib]})"
            )
    return DenseTensor(np.tensordot(a.data, b.data, axes=(axes_a, axes_b)))


def norm(a: DenseTensor) -> float:
    """L2 norm: square root of the sum of squared entry magnitudes."""
    return float(np.linalg.norm(a.data.ravel()))


def distance(a: DenseTensor, b: DenseTensor) -> float:
    """L2 distance between same-shape tensors."""
    if a.shape != b.shape:
        raise ShapeMismatchError(f"shapes {a.shape} and {b.shape} differ")
    return float(np.linalg.norm((a.data - b.data).ravel()))


def fix_index(a: DenseTensor, axis: int, value: int) -> DenseTensor:
    """Restrict one axis to a fixed value, dropping the axis."""
    if not 0 <= axis < a.rank:
        raise IndexError(f"axis {axis} out of range for rank-{a.rank} tensor")
    if not 0 <= value < a.shape[axis]:
        raise IndexError(
            f"index {value} out of range for axis {axis} of extent {a.shape[axis]}"
        )
    return DenseTensor(np.take(a.data, value, axis=axis))
