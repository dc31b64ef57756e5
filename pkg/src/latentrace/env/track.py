"""Seeded closed-loop track generation.

A track is a loop of N quadrilateral tiles around the origin.  The centerline
is a smooth periodic radial spline r(phi) through randomly perturbed control
points, resampled at N equal arc-length stations; tile i is the quad between
stations i and i+1, offset half the track width along the local normals.
Radial construction keeps the loop simple (no self-intersection) as long as
the radius stays positive, which the validity check enforces.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from ..config import EnvConfig

N_CONTROL_POINTS = 12
RADIUS_RANGE = (0.55, 1.0)      # control radii as fractions of track_radius
ANGLE_JITTER = 0.35             # fraction of the control-point angular spacing
MAX_RETRIES = 10


class TrackGenerationError(RuntimeError):
    """Track generation failed validity checks after bounded retries."""


@dataclass(frozen=True)
class Track:
    """Closed loop of N track tiles.

    ``centers[i]`` is the midpoint of the shared edge between tiles i-1 and i,
    so tile i spans stations i..i+1 (mod N).  ``quads[i]`` holds the four tile
    corners ordered (left_i, right_i, right_i+1, left_i+1).
    """

    seed: int
    centers: np.ndarray      # (N, 2) centerline stations
    tangents: np.ndarray     # (N, 2) unit tangents at the stations
    quads: np.ndarray        # (N, 4, 2) tile corner coordinates
    total_length: float

    @property
    def n_tiles(self) -> int:
        return len(self.centers)

    def tile_lengths(self) -> np.ndarray:
        nxt = np.roll(self.centers, -1, axis=0)
        return np.linalg.norm(nxt - self.centers, axis=1)


def generate_track(seed: int, config: EnvConfig) -> Track:
    """Generate the closed track for ``seed``; pure function of its inputs."""
    if seed < 0:
        raise ValueError(f"seed must be >= 0, got {seed}")
    for attempt in range(MAX_RETRIES):
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, attempt])))
        track = _build(rng, seed, config)
        if track is not None:
            return track
    raise TrackGenerationError(
        f"no valid track for seed {seed} after {MAX_RETRIES} attempts"
    )


def _build(rng: np.random.Generator, seed: int, config: EnvConfig) -> Track | None:
    n_ctrl = N_CONTROL_POINTS
    spacing = 2.0 * np.pi / n_ctrl
    phis = np.arange(n_ctrl) * spacing
    phis = phis + rng.uniform(-ANGLE_JITTER, ANGLE_JITTER, n_ctrl) * spacing
    radii = config.track_radius * rng.uniform(*RADIUS_RANGE, n_ctrl)

    # Periodic radius spline over phi in [0, 2pi).
    phi_knots = np.append(phis, phis[0] + 2.0 * np.pi)
    r_knots = np.append(radii, radii[0])
    spline = CubicSpline(phi_knots, r_knots, bc_type="periodic")

    dense_phi = np.linspace(phis[0], phis[0] + 2.0 * np.pi, 40 * config.n_tiles,
                            endpoint=False)
    dense_r = spline(dense_phi)
    if dense_r.min() <= config.track_width:
        return None  # loop pinches too close to the origin
    dense_xy = np.stack([dense_r * np.cos(dense_phi), dense_r * np.sin(dense_phi)],
                        axis=1)

    # Resample at n_tiles equal arc-length stations.
    seg = np.linalg.norm(np.diff(dense_xy, axis=0, append=dense_xy[:1]), axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    total = cum[-1]
    stations = np.arange(config.n_tiles) * total / config.n_tiles
    idx = np.searchsorted(cum, stations, side="right") - 1
    idx = np.clip(idx, 0, len(dense_xy) - 1)
    frac = (stations - cum[idx]) / np.maximum(seg[idx], 1e-12)
    nxt = (idx + 1) % len(dense_xy)
    centers = dense_xy[idx] + frac[:, None] * (dense_xy[nxt] - dense_xy[idx])

    tangents = np.roll(centers, -1, axis=0) - np.roll(centers, 1, axis=0)
    norms = np.linalg.norm(tangents, axis=1, keepdims=True)
    if norms.min() < 1e-9:
        return None
    tangents = tangents / norms
    normals = np.stack([-tangents[:, 1], tangents[:, 0]], axis=1)

    half = config.track_width / 2.0
    left = centers + half * normals
    right = centers - half * normals
    if np.linalg.norm(left, axis=1).min() < 1e-6:
        return None  # inner edge collapsed through the origin
    left_next = np.roll(left, -1, axis=0)
    right_next = np.roll(right, -1, axis=0)
    quads = np.stack([left, right, right_next, left_next], axis=1)

    # Reject degenerate tiles (extreme kinks make non-convex slivers).
    edge_len = np.linalg.norm(np.roll(centers, -1, axis=0) - centers, axis=1)
    if edge_len.min() < 1e-3:
        return None

    return Track(seed=seed, centers=centers, tangents=tangents, quads=quads,
                 total_length=float(total))


def points_in_quads(points: np.ndarray, quads: np.ndarray) -> np.ndarray:
    """Vectorized containment test of P points against Q convex quads.

    Quads must be in counter-clockwise order.  Returns a (P, Q) bool array.
    Boundary points count as inside.
    """
    points = np.atleast_2d(points)
    a = quads                                   # (Q, 4, 2)
    b = np.roll(quads, -1, axis=1)              # (Q, 4, 2)
    edge = b - a                                # (Q, 4, 2)
    rel = points[:, None, None, :] - a[None]    # (P, Q, 4, 2)
    cross = edge[None, ..., 0] * rel[..., 1] - edge[None, ..., 1] * rel[..., 0]
    return (cross >= -1e-12).all(axis=2)
