"""Two-car racing environment: tile rewards, slip/collision physics, ego views.

The environment is functional: ``step(state, actions)`` returns a fresh
``EnvState`` and never mutates its input, so trajectories replay bit-exactly
from ``(seed, action sequence)``.  One ``step`` is one control step made of
``physics_substeps`` integrator substeps.

Scoring: every control step costs 0.1; the first car to visit a tile earns
1000/N, the second 500/N.  Cars entering the same tile within one control
step are both scored as first visitors.
"""
from __future__ import annotations

import colorsys
from dataclasses import dataclass, replace

import numpy as np

from ..config import EnvConfig
from . import dynamics
from .dynamics import CarState, make_car, resolve_collision, step_car
from .render import render_ego_view
from .track import Track, generate_track, points_in_quads

STEP_PENALTY = 0.1
FIRST_VISIT_TOTAL = 1000.0   # split over N tiles
SECOND_VISIT_TOTAL = 500.0
BACKWARD_SPEED_THRESHOLD = 0.5  # m/s along the reversed track direction


@dataclass(frozen=True)
class EnvAction:
    """One car's control input; components are clamped on construction."""

    steer: float
    gas: float
    brake: float

    def __post_init__(self):
        for name in ("steer", "gas", "brake"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"non-finite action component {name}")
        object.__setattr__(self, "steer", float(np.clip(self.steer, -1.0, 1.0)))
        object.__setattr__(self, "gas", float(np.clip(self.gas, 0.0, 1.0)))
        object.__setattr__(self, "brake", float(np.clip(self.brake, 0.0, 1.0)))

    def as_array(self) -> np.ndarray:
        return np.array([self.steer, self.gas, self.brake])

    @classmethod
    def from_array(cls, a) -> "EnvAction":
        a = np.asarray(a, dtype=float).reshape(3)
        return cls(steer=float(a[0]), gas=float(a[1]), brake=float(a[2]))


@dataclass(frozen=True)
class EnvState:
    """Full simulator ground truth at one control step."""

    track: Track
    cars: tuple[CarState, ...]
    visit_orders: np.ndarray      # (N, n_cars) int8; 0 = unvisited, else 1 or 2
    step_count: int
    rng_state: dict               # reset-time generator state, for bookkeeping

    @property
    def tile_ledger(self) -> tuple[tuple[int, ...], ...]:
        """Per tile, the car indices in visitation order."""
        out = []
        for tile in self.visit_orders:
            entries = [(order, car) for car, order in enumerate(tile) if order > 0]
            out.append(tuple(car for _, car in sorted(entries)))
        return tuple(out)

    def tiles_visited(self, car: int) -> int:
        return int((self.visit_orders[:, car] > 0).sum())


def compute_rewards(ledger_delta, n_tiles: int) -> np.ndarray:
    """Per-agent reward for one control step.

    ``ledger_delta[i]`` lists ``(tile, order)`` pairs newly credited to agent
    i this step.  Every agent pays the step penalty; each first visit pays
    1000/N and each second visit 500/N.
    """
    rewards = np.full(len(ledger_delta), -STEP_PENALTY)
    for agent, visits in enumerate(ledger_delta):
        seen = set()
        for tile, order in visits:
            if tile in seen:
                raise ValueError(f"tile {tile} credited twice to agent {agent}")
            seen.add(tile)
            if order == 1:
                rewards[agent] += FIRST_VISIT_TOTAL / n_tiles
            elif order == 2:
                rewards[agent] += SECOND_VISIT_TOTAL / n_tiles
            else:
                raise ValueError(f"visitation order must be 1 or 2, got {order}")
    return rewards


class RacingEnv:
    """Config holder; all state lives in the ``EnvState`` passed around."""

    def __init__(self, config: EnvConfig | None = None):
        self.config = config or EnvConfig()
        self.config.validate()

    # -- lifecycle -------------------------------------------------------

    def reset(self, seed: int) -> tuple[EnvState, list[np.ndarray]]:
        """Start a race: seeded track, randomized grid order and car colors."""
        cfg = self.config
        track = generate_track(seed, cfg)
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, 101])))

        grid = self._grid_slots(track)
        order = rng.permutation(cfg.n_cars)
        colors = self._draw_colors(rng, cfg.n_cars)
        cars = []
        for car_idx in range(cfg.n_cars):
            slot = grid[int(np.where(order == car_idx)[0][0])]
            cars.append(make_car(slot[0], slot[1], colors[car_idx]))

        state = EnvState(
            track=track,
            cars=tuple(cars),
            visit_orders=np.zeros((track.n_tiles, cfg.n_cars), dtype=np.int8),
            step_count=0,
            rng_state=rng.bit_generator.state,
        )
        return state, [self.render(state, i) for i in range(cfg.n_cars)]

    def _grid_slots(self, track: Track) -> list[tuple[np.ndarray, float]]:
        """Start slots: pole ahead on the centerline, second staggered behind."""
        slots = []
        lateral = [1.0, -1.0]
        for rank in range(self.config.n_cars):
            station = (2 - 2 * rank) % track.n_tiles
            t = track.tangents[station]
            normal = np.array([-t[1], t[0]])
            pos = track.centers[station] + lateral[rank] * 0.22 * self.config.track_width * normal
            heading = float(np.arctan2(-t[0], t[1]))
            slots.append((pos, heading))
        return slots

    @staticmethod
    def _draw_colors(rng: np.random.Generator, n: int) -> list[tuple[int, int, int]]:
        hues = [float(rng.uniform())]
        while len(hues) < n:
            h = float(rng.uniform())
            for _ in range(10):
                if min(abs(h - hues[0]), 1.0 - abs(h - hues[0])) >= 0.12:
                    break
                h = float(rng.uniform())
            else:
                h = (hues[0] + 0.5) % 1.0
            hues.append(h)
        return [
            tuple(int(round(255 * c)) for c in colorsys.hsv_to_rgb(h, 0.95, 0.95))
            for h in hues
        ]

    # -- stepping --------------------------------------------------------

    def step(
        self, state: EnvState, actions, render: bool = True,
    ) -> tuple[EnvState, list[np.ndarray] | None, np.ndarray, bool]:
        """Advance one control step; returns (state, observations, rewards, done).

        ``render=False`` skips observation rendering (scripted-only races).
        """
        cfg = self.config
        if state.step_count >= cfg.max_steps:
            raise RuntimeError("episode is already done")
        acts = [a if isinstance(a, EnvAction) else EnvAction.from_array(a)
                for a in actions]
        if len(acts) != cfg.n_cars:
            raise ValueError(f"expected {cfg.n_cars} actions, got {len(acts)}")

        cars = list(state.cars)
        newly_inside = np.zeros((state.track.n_tiles, cfg.n_cars), dtype=bool)
        dt = cfg.physics_dt
        for _ in range(cfg.physics_substeps):
            for i, act in enumerate(acts):
                friction = self._wheel_friction(cars[i], state.track)
                cars[i] = step_car(cars[i], act.steer, act.gas, act.brake,
                                   friction, dt)
            if cfg.n_cars == 2:
                cars[0], cars[1], _ = resolve_collision(cars[0], cars[1])
            inside = self._car_tile_contacts(cars, state.track)
            newly_inside |= inside

        visit_orders = state.visit_orders.copy()
        delta: list[list[tuple[int, int]]] = [[] for _ in range(cfg.n_cars)]
        for tile in np.flatnonzero(newly_inside.any(axis=1)):
            prior = int((visit_orders[tile] > 0).sum())
            for car in range(cfg.n_cars):
                if newly_inside[tile, car] and visit_orders[tile, car] == 0:
                    # simultaneous entrants share the pre-step order
                    order = min(prior + 1, 2)
                    visit_orders[tile, car] = order
                    delta[car].append((int(tile), order))

        rewards = compute_rewards(delta, state.track.n_tiles)
        if cfg.backward_penalty:
            for i, car in enumerate(cars):
                if self._moving_backward(car, state.track):
                    rewards[i] -= cfg.backward_penalty_value

        new_state = EnvState(
            track=state.track,
            cars=tuple(cars),
            visit_orders=visit_orders,
            step_count=state.step_count + 1,
            rng_state=state.rng_state,
        )
        done = new_state.step_count >= cfg.max_steps or bool(
            (visit_orders > 0).all())
        obs = ([self.render(new_state, i) for i in range(cfg.n_cars)]
               if render else None)
        return new_state, obs, rewards, done

    def _wheel_friction(self, car: CarState, track: Track) -> np.ndarray:
        on_track = points_in_quads(car.wheel_positions(), track.quads).any(axis=1)
        return np.where(on_track, 1.0, self.config.off_track_friction)

    def _car_tile_contacts(self, cars, track: Track) -> np.ndarray:
        """(N, n_cars) bool: tile contains the car center or any wheel."""
        out = np.zeros((track.n_tiles, len(cars)), dtype=bool)
        for i, car in enumerate(cars):
            pts = np.vstack([car.position[None, :], car.wheel_positions()])
            out[:, i] = points_in_quads(pts, track.quads).any(axis=0)
        return out

    def _moving_backward(self, car: CarState, track: Track) -> bool:
        station = int(np.argmin(np.linalg.norm(track.centers - car.position, axis=1)))
        along = float(car.linear_velocity @ track.tangents[station])
        return along < -BACKWARD_SPEED_THRESHOLD

    # -- observation -----------------------------------------------------

    def render(self, state: EnvState, agent_id: int) -> np.ndarray:
        """Ego-view observation for ``agent_id`` (0-based), float32 in [0, 1]."""
        img = self.render_rgb(state, agent_id)
        return img.astype(np.float32) / 255.0

    def render_rgb(self, state: EnvState, agent_id: int) -> np.ndarray:
        """Ego view as uint8 RGB; pure function of (config, state, agent_id)."""
        if not 0 <= agent_id < self.config.n_cars:
            raise ValueError(f"invalid agent_id {agent_id}")
        return render_ego_view(state, agent_id, self.config.image_size,
                               self.config.view_extent)
