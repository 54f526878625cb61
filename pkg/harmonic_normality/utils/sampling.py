"""
Deterministic sample layouts over discs.
"""

import numpy as np
from scipy.stats import qmc

from ..models import Disc


def disc_samples(region: Disc, count: int, seed: int = 0) -> np.ndarray:
    """Disc centre followed by `count` scrambled Halton points, area-uniform."""
    points = np.empty(count + 1, dtype=np.complex128)
    points[0] = region.center
    if count:
        uv = qmc.Halton(d=2, scramble=True, seed=seed).random(count)
        r = region.radius * np.sqrt(uv[:, 0])
        theta = 2.0 * np.pi * uv[:, 1]
        points[1:] = region.center + r * np.exp(1j * theta)
    return points


def polar_grid(region: Disc, n_radial: int, n_angular: int) -> np.ndarray:
    """Centre plus n_radial rings of n_angular points, outermost ring on the boundary."""
    radii = region.radius * np.arange(1, n_radial + 1) / n_radial
    theta = 2.0 * np.pi * np.arange(n_angular) / n_angular
    ring = (radii[:, None] * np.exp(1j * theta)[None, :]).ravel()
    return np.concatenate(([region.center], region.center + ring))


def square_grid(region: Disc, n: int) -> np.ndarray:
    """n x n lattice over the bounding square, restricted to the closed disc."""
    axis = np.linspace(-region.radius, region.radius, n)
    xx, yy = np.meshgrid(axis, axis)
    zs = (xx + 1j * yy).ravel()
    return region.center + zs[np.abs(zs) <= region.radius * (1 + 1e-12)]
