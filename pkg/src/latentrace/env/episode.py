"""Episode containers: per-step observations, actions, rewards for all cars.

Observations are stored as uint8 frames (lossless; float observations are
uint8/255 by construction).  Export uses a versioned compressed ``.npz``
container that round-trips exactly.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

FORMAT_VERSION = 1


@dataclass
class EpisodeRecord:
    """One complete race: aligned (o_t, a_t, r_t) streams for every agent.

    ``obs[i]`` is a (T, S, S, 3) uint8 array; ``actions`` is (T, n_agents, 3)
    holding the executed (post-noise, post-clamp) controls; ``rewards`` is
    (T, n_agents).
    """

    obs: list[np.ndarray]
    actions: np.ndarray
    rewards: np.ndarray
    env_seed: int
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        t = self.length
        for i, o in enumerate(self.obs):
            if o.dtype != np.uint8:
                raise ValueError(f"obs[{i}] must be uint8 frames")
            if len(o) != t:
                raise ValueError("observation stream length mismatch")
        if not (len(self.actions) == len(self.rewards) == t):
            raise ValueError("action/reward stream length mismatch")

    @property
    def length(self) -> int:
        return len(self.actions)

    @property
    def n_agents(self) -> int:
        return len(self.obs)

    def get_obs(self, agent: int, t: int) -> np.ndarray:
        """Single float32 frame in [0, 1]; the per-frame observation accessor."""
        return self.obs[agent][t].astype(np.float32) / 255.0

    def obs_window(self, agent: int, start: int, stop: int) -> np.ndarray:
        return self.obs[agent][start:stop].astype(np.float32) / 255.0

    def total_return(self, agent: int) -> float:
        return float(self.rewards[:, agent].sum())

    def save(self, path: str | Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        arrays = {
            f"obs_agent{i}": o for i, o in enumerate(self.obs)
        }
        np.savez_compressed(
            path,
            format_version=np.int64(FORMAT_VERSION),
            n_agents=np.int64(self.n_agents),
            actions=self.actions.astype(np.float32),
            rewards=self.rewards.astype(np.float32),
            env_seed=np.int64(self.env_seed),
            meta_json=np.bytes_(json.dumps(self.meta).encode()),
            **arrays,
        )

    @classmethod
    def load(cls, path: str | Path) -> "EpisodeRecord":
        with np.load(path) as data:
            version = int(data["format_version"])
            if version != FORMAT_VERSION:
                raise ValueError(
                    f"unsupported episode format version {version} "
                    f"(expected {FORMAT_VERSION})"
                )
            n_agents = int(data["n_agents"])
            return cls(
                obs=[data[f"obs_agent{i}"] for i in range(n_agents)],
                actions=data["actions"],
                rewards=data["rewards"],
                env_seed=int(data["env_seed"]),
                meta=json.loads(bytes(data["meta_json"]).decode()),
            )


class EpisodeBuilder:
    """Accumulates per-step data during collection."""

    def __init__(self, n_agents: int, env_seed: int, meta: dict | None = None):
        self.n_agents = n_agents
        self.env_seed = env_seed
        self.meta = dict(meta or {})
        self._obs: list[list[np.ndarray]] = [[] for _ in range(n_agents)]
        self._actions: list[np.ndarray] = []
        self._rewards: list[np.ndarray] = []

    def add(self, obs: list[np.ndarray], actions: np.ndarray, rewards: np.ndarray):
        for i in range(self.n_agents):
            frame = obs[i]
            if frame.dtype != np.uint8:
                frame = np.clip(np.round(np.asarray(frame, dtype=np.float64) * 255.0),
                                0, 255).astype(np.uint8)
            self._obs[i].append(frame)
        self._actions.append(np.asarray(actions, dtype=np.float32).reshape(
            self.n_agents, -1))
        self._rewards.append(np.asarray(rewards, dtype=np.float32).reshape(
            self.n_agents))

    def build(self) -> EpisodeRecord:
        return EpisodeRecord(
            obs=[np.stack(frames) for frames in self._obs],
            actions=np.stack(self._actions),
            rewards=np.stack(self._rewards),
            env_seed=self.env_seed,
            meta=self.meta,
        )
