"""Inverse-square inter-patch interactions and effective potentials.

A neighbour B of a target patch A contributes, pixel by pixel,

    I_ab[i] = p * |A[i] - B[i]| / D_ab**2

where D_ab is the centre-to-centre distance. Neighbours are all patches whose
origin lies inside a ``window_side`` x ``window_side`` search window centred
on the target origin, read with cyclic wrap-around.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import Origin, Patch, as_image, extract_patch
from .errors import ValidationError


def patch_distance(origin_a: Origin, origin_b: Origin) -> float:
    """Euclidean distance between two equal-sized patches (same as between origins)."""
    return math.hypot(origin_a[0] - origin_b[0], origin_a[1] - origin_b[1])


def pair_interaction(a: Patch, b: Patch, distance: float, p: float) -> np.ndarray:
    """Per-pixel interaction ``p * |a - b| / distance**2`` as a row-major vector."""
    if not distance > 0:
        raise ValidationError(f"interaction distance must be positive, got {distance}")
    if p < 0:
        raise ValidationError(f"p must be non-negative, got {p}")
    if a.side != b.side:
        raise ValidationError(f"patch sides differ: {a.side} vs {b.side}")
    return p * np.abs(a.flat - b.flat) / (distance * distance)


@dataclass(frozen=True)
class Neighbor:
    patch: Patch
    distance: float
    offset: Origin  # unwrapped (drow, dcol) relative to the target


@dataclass(frozen=True)
class Neighborhood:
    target: Patch
    neighbors: tuple[Neighbor, ...] = field(default_factory=tuple)
    window_side: int = 0

    def __len__(self) -> int:
        return len(self.neighbors)


def window_offsets(side: int, window_side: int, stride: int = 1) -> list[Origin]:
    """Origin offsets of the neighbours: every lattice point of the window but the target.

    Offsets span ``[-(window_side // 2), window_side // 2]`` per axis on the
    ``stride`` lattice through the target, in row-major order.
    """
    check_window(side, window_side)
    if stride < 1:
        raise ValidationError(f"neighbor stride must be >= 1, got {stride}")
    reach = window_side // 2
    steps = range(-(reach // stride) * stride, reach + 1, stride)
    return [(dr, dc) for dr in steps for dc in steps if (dr, dc) != (0, 0)]


def check_window(side: int, window_side: int) -> None:
    if window_side < side:
        raise ValidationError(f"window side {window_side} smaller than patch side {side}")
    if window_side % 2 == 0:
        raise ValidationError(f"window side must be odd, got {window_side}")


def collect_neighbors(image, target_origin: Origin, side: int, window_side: int,
                      neighbor_stride: int = 1) -> Neighborhood:
    """Gather the patches interacting with the target at ``target_origin``.

    The target itself is read without wrap; neighbours wrap cyclically, and
    their distances use the unwrapped window offsets.
    """
    img = as_image(image)
    target = extract_patch(img, target_origin, side, cyclic=False)
    r0, c0 = target.origin
    neighbors = []
    for dr, dc in window_offsets(side, window_side, neighbor_stride):
        nb = extract_patch(img, (r0 + dr, c0 + dc), side, cyclic=True)
        neighbors.append(Neighbor(nb, math.hypot(dr, dc), (dr, dc)))
    return Neighborhood(target, tuple(neighbors), window_side)


def total_interaction(nbhd: Neighborhood, p: float) -> np.ndarray:
    """Sum of :func:`pair_interaction` over all neighbours (zeros if there are none)."""
    total = np.zeros(nbhd.target.values.size)
    for nb in nbhd.neighbors:
        total += pair_interaction(nbhd.target, nb.patch, nb.distance, p)
    return total


def effective_potential(target: Patch, field_values) -> Patch:
    """Target patch plus its interaction field, same origin."""
    f = np.asarray(field_values, dtype=np.float64).reshape(-1)
    if f.size != target.values.size:
        raise ValidationError(f"field has {f.size} entries, patch has {target.values.size}")
    return Patch(target.values + f.reshape(target.values.shape), target.origin)


def interaction_image(image, side: int, window_side: int, p: float,
                      neighbor_stride: int = 1) -> np.ndarray:
    """Total interaction for every pixel of the image at once.

    Pixel ``x`` of any target patch meets pixel ``x + offset`` (cyclic) of the
    neighbour at that offset, so the per-patch field of a target at origin
    ``o`` is just this image cropped at ``o``. Cost is one rolled difference
    per window offset instead of one per (target, neighbour) pair.
    """
    img = as_image(image)
    if p < 0:
        raise ValidationError(f"p must be non-negative, got {p}")
    out = np.zeros_like(img)
    if p == 0:
        return out
    for dr, dc in window_offsets(side, window_side, neighbor_stride):
        shifted = np.roll(img, (-dr, -dc), axis=(0, 1))
        out += np.abs(img - shifted) / float(dr * dr + dc * dc)
    return p * out
