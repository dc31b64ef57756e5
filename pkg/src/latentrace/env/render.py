"""Software rasterizer for top-down ego-view observations.

Pure numpy, no display dependencies: the same ``EnvState`` always rasterizes
to bit-identical pixels.  The view is centered on the ego car (placed below
image center so most of the view faces forward) and rotated so the car's nose
points up.  Anything outside the view window, including the opponent, is
simply not drawn.
"""
from __future__ import annotations

import numpy as np

GRASS_A = (100, 200, 100)
GRASS_B = (110, 215, 110)
ROAD_A = (105, 105, 105)
ROAD_B = (115, 115, 115)
MARKER = (40, 40, 40)
GRASS_CELL = 6.0           # meters per checker cell
EGO_ROW_FRACTION = 0.70    # ego car center, as a fraction of image height


def render_ego_view(state, agent_id: int, size: int, extent: float) -> np.ndarray:
    car = state.cars[agent_id]
    scale = size / extent
    fwd = car.forward()
    right = np.array([fwd[1], -fwd[0]])
    center = np.array([size / 2.0, EGO_ROW_FRACTION * size])  # (col, row)

    def to_pixels(points: np.ndarray) -> np.ndarray:
        rel = np.atleast_2d(points) - car.position
        cols = center[0] + (rel @ right) * scale
        rows = center[1] - (rel @ fwd) * scale
        return np.stack([cols, rows], axis=1)

    img = _grass(car, size, scale, center, fwd, right)

    # road tiles, slightly alternating shade for a motion cue
    quads_px = to_pixels(state.track.quads.reshape(-1, 2)).reshape(-1, 4, 2)
    mins = quads_px.min(axis=1)
    maxs = quads_px.max(axis=1)
    visible = ((maxs[:, 0] >= 0) & (mins[:, 0] < size)
               & (maxs[:, 1] >= 0) & (mins[:, 1] < size))
    for i in np.flatnonzero(visible):
        _fill_convex(img, quads_px[i], ROAD_A if i % 2 == 0 else ROAD_B)

    for other in state.cars:
        _fill_convex(img, to_pixels(other.hull_corners()), other.color)
        _fill_convex(img, to_pixels(_cabin_corners(other)), MARKER)
    return img


def _grass(car, size: int, scale: float, center, fwd, right) -> np.ndarray:
    cols, rows = np.meshgrid(np.arange(size), np.arange(size), indexing="xy")
    x_right = (cols + 0.5 - center[0]) / scale
    y_up = (center[1] - (rows + 0.5)) / scale
    world = (car.position[None, None, :]
             + x_right[..., None] * right[None, None, :]
             + y_up[..., None] * fwd[None, None, :])
    checker = (np.floor(world[..., 0] / GRASS_CELL)
               + np.floor(world[..., 1] / GRASS_CELL)).astype(np.int64) % 2
    img = np.empty((size, size, 3), dtype=np.uint8)
    img[checker == 0] = GRASS_A
    img[checker == 1] = GRASS_B
    return img


def _cabin_corners(car) -> np.ndarray:
    # dark front-cabin rectangle so heading is visible in the image
    local = np.array([[-0.55, 0.2], [0.55, 0.2], [0.55, 1.4], [-0.55, 1.4]])
    return car.position + local @ car.rotation().T


def _fill_convex(img: np.ndarray, poly_px: np.ndarray, color) -> None:
    """Fill a convex polygon given in (col, row) pixel coordinates."""
    size = img.shape[0]
    # normalize to counter-clockwise in pixel space
    shoelace = 0.0
    for i in range(len(poly_px)):
        a, b = poly_px[i], poly_px[(i + 1) % len(poly_px)]
        shoelace += a[0] * b[1] - b[0] * a[1]
    if shoelace < 0:
        poly_px = poly_px[::-1]

    c0 = max(int(np.floor(poly_px[:, 0].min())), 0)
    c1 = min(int(np.ceil(poly_px[:, 0].max())) + 1, size)
    r0 = max(int(np.floor(poly_px[:, 1].min())), 0)
    r1 = min(int(np.ceil(poly_px[:, 1].max())) + 1, size)
    if c0 >= c1 or r0 >= r1:
        return

    cols, rows = np.meshgrid(np.arange(c0, c1) + 0.5, np.arange(r0, r1) + 0.5,
                             indexing="xy")
    inside = np.ones(cols.shape, dtype=bool)
    for i in range(len(poly_px)):
        ax, ay = poly_px[i]
        bx, by = poly_px[(i + 1) % len(poly_px)]
        cross = (bx - ax) * (rows - ay) - (by - ay) * (cols - ax)
        inside &= cross >= 0
    img[r0:r1, c0:c1][inside] = color
