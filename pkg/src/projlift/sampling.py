"""Deterministic sample-point generation with singularity rejection."""

from __future__ import annotations

from typing import Callable, Optional

import numpy as np


class SamplingError(RuntimeError):
    """Could not find enough admissible sample points."""


def sample_points(
    dim: int,
    count: int,
    seed: int,
    box: tuple[float, float] = (-1.0, 1.0),
    reject: Optional[Callable[[np.ndarray], bool]] = None,
    max_tries: Optional[int] = None,
) -> np.ndarray:
    """Uniform points in box^dim from a fixed seed, skipping rejected ones."""
    rng = np.random.default_rng(seed)
    lo, hi = box
    limit = max_tries if max_tries is not None else max(1000, 200 * count)
    points = []
    tries = 0
    while len(points) < count:
        if tries >= limit:
            raise SamplingError(
                f"exhausted {limit} draws looking for {count} admissible points"
            )
        p = rng.uniform(lo, hi, size=dim)
        tries += 1
        if reject is not None and reject(p):
            continue
        points.append(p)
    return np.array(points)


def reject_near_zero_pairing(n: int, margin: float = 1e-3) -> Callable[[np.ndarray], bool]:
    """Reject points where the base-fibre pairing x^i xi_i is close to zero
    (chart degeneracy of the cohomogeneity-one coordinates)."""

    def _reject(p: np.ndarray) -> bool:
        r2 = float(np.dot(p[:n], p[n : 2 * n]))
        return abs(r2) < margin

    return _reject


def reject_sl2_chart(n: int, lam: float, margin: float = 1e-3) -> Callable[[np.ndarray], bool]:
    """Reject x.xi near 0 and lam * (x.xi) near 1."""

    def _reject(p: np.ndarray) -> bool:
        r2 = float(np.dot(p[:n], p[n : 2 * n]))
        return abs(r2) < margin or abs(lam * r2 - 1.0) < margin

    return _reject
