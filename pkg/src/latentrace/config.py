"""Configuration objects: environment, architecture presets, training variants.

All run configuration lives in two dataclasses (EnvConfig, TrainConfig) plus a
small set of named architecture presets.  Configs round-trip through a flat
``key = value`` text format; unknown keys are a hard error.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

VARIANTS = ("individual", "joint", "joint+observer")

ACTION_DIM = 3  # steer, gas, brake


class ConfigError(ValueError):
    """Invalid or unknown configuration input."""


@dataclass
class EnvConfig:
    """Two-car racing environment settings.

    One ``step`` call is one control step: ``physics_substeps`` integrator
    substeps of ``physics_dt`` seconds each, one reward, ``step_count += 1``.
    """

    image_size: int = 96              # square ego-view observation, pixels
    n_tiles: int = 100                # target number of track tiles N
    track_radius: float = 55.0        # nominal track loop radius, meters
    track_width: float = 10.0         # full track width, meters
    off_track_friction: float = 0.4   # tire friction multiplier on grass
    view_extent: float = 40.0         # world meters spanned by the image width
    physics_dt: float = 0.02          # integrator timestep, seconds
    physics_substeps: int = 2         # substeps per control step (action repeat)
    max_steps: int = 1000             # control steps per episode (T)
    n_cars: int = 2
    backward_penalty: bool = False    # optional penalty for driving backwards
    backward_penalty_value: float = 0.5

    def validate(self) -> None:
        if self.image_size < 8:
            raise ConfigError(f"image_size too small: {self.image_size}")
        if self.n_tiles < 3:
            raise ConfigError(f"n_tiles must be >= 3, got {self.n_tiles}")
        if not 0.0 < self.off_track_friction < 1.0:
            raise ConfigError(
                "off_track_friction must lie strictly inside (0, 1) so grass has "
                f"less grip than track, got {self.off_track_friction}"
            )
        if self.n_cars not in (1, 2):
            raise ConfigError(f"n_cars must be 1 or 2, got {self.n_cars}")
        if self.physics_substeps < 1:
            raise ConfigError("physics_substeps must be >= 1")
        if self.max_steps < 1:
            raise ConfigError("max_steps must be >= 1")
        if self.track_width <= 0 or self.track_radius <= self.track_width:
            raise ConfigError("track_radius must exceed track_width")


@dataclass(frozen=True)
class ArchPreset:
    """Network dimensions for one named architecture preset.

    Conv/deconv specs are ``(out_channels, kernel, stride)`` triples.  All
    per-agent sizes; joint sizes are ``n_agents`` times these.
    """

    name: str
    image_size: int
    deter_dim: int                  # deterministic state per agent
    stoch_dim: int                  # stochastic state per agent
    embed_dim: int                  # embedding length per encoder head
    rssm_hidden: int                # dense width inside the transition model
    head_hidden: int                # dense width of reward/value/action nets
    conv: tuple[tuple[int, int, int], ...]
    conv_dense: int | None          # optional projection flatten -> embed_dim
    deconv_in_channels: int         # channels of the 1x1 seed fed to deconvs
    deconv: tuple[tuple[int, int, int], ...]
    conv_activation: str = "relu"
    min_stddev: float = 0.1


ARCH_PRESETS: dict[str, ArchPreset] = {
    # 96x96 observations, full-size networks.
    "paper": ArchPreset(
        name="paper",
        image_size=96,
        deter_dim=200,
        stoch_dim=30,
        embed_dim=1024,
        rssm_hidden=600,
        head_hidden=400,
        conv=((32, 4, 3), (64, 4, 2), (128, 4, 2), (256, 4, 2)),
        conv_dense=None,  # flattened conv output is already 2*2*256 = 1024
        deconv_in_channels=1024,
        deconv=((128, 5, 2), (64, 5, 2), (32, 7, 2), (3, 6, 3)),
    ),
    # 64x64 observations, reduced widths for desk-scale training.
    "desk": ArchPreset(
        name="desk",
        image_size=64,
        deter_dim=64,
        stoch_dim=16,
        embed_dim=256,
        rssm_hidden=200,
        head_hidden=128,
        conv=((32, 4, 2), (64, 4, 2), (128, 4, 2)),
        conv_dense=256,
        deconv_in_channels=256,
        deconv=((128, 5, 2), (64, 5, 2), (32, 6, 2), (3, 6, 2)),
    ),
    # 16x16 observations, minimal dims; smooth activations so finite-difference
    # gradient checks are well conditioned in double precision.
    "tiny": ArchPreset(
        name="tiny",
        image_size=16,
        deter_dim=4,
        stoch_dim=2,
        embed_dim=16,
        rssm_hidden=32,
        head_hidden=32,
        conv=((8, 4, 2), (16, 3, 2)),
        conv_dense=16,
        deconv_in_channels=32,
        deconv=((16, 4, 2), (8, 4, 1), (3, 4, 2)),
        conv_activation="elu",
    ),
}


@dataclass
class TrainConfig:
    """Full training-run configuration: variant, schedule, and hyperparameters."""

    variant: str = "joint+observer"
    preset: str = "paper"
    episodes: int = 500               # K: collected (non-seed) episodes
    steps_per_episode: int = 1000     # T: control steps per race
    seq_length: int = 50              # L: replay window length
    horizon: int = 15                 # H: imagination horizon
    train_iters: int = 200            # S: updates after each episode
    batch_size: int = 50
    gamma: float = 0.99
    lambda_: float = 0.95
    kl_beta: float = 1.0
    model_lr: float = 6e-4
    value_lr: float = 6e-4
    actor_lr: float = 8e-5
    grad_clip: float = 100.0
    explore_noise: float = 0.3
    action_repeat: int = 2
    seed_episodes: int = 5
    replay_capacity: int = 0          # episodes; 0 = unbounded
    seed: int = 0
    env: EnvConfig = field(default_factory=EnvConfig)

    def validate(self) -> None:
        if self.variant not in VARIANTS:
            raise ConfigError(
                f"unknown variant {self.variant!r}; expected one of {VARIANTS}"
            )
        if self.preset not in ARCH_PRESETS:
            raise ConfigError(
                f"unknown preset {self.preset!r}; expected one of "
                f"{tuple(ARCH_PRESETS)}"
            )
        if self.env.image_size != ARCH_PRESETS[self.preset].image_size:
            raise ConfigError(
                f"env_image_size {self.env.image_size} does not match preset "
                f"{self.preset!r} ({ARCH_PRESETS[self.preset].image_size})"
            )
        for name in ("episodes", "steps_per_episode", "seq_length", "horizon",
                     "train_iters", "batch_size", "action_repeat"):
            if getattr(self, name) < (0 if name == "episodes" else 1):
                raise ConfigError(f"{name} out of range: {getattr(self, name)}")
        for name in ("gamma", "lambda_"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1]")
        if self.seq_length > self.steps_per_episode:
            raise ConfigError("seq_length cannot exceed steps_per_episode")
        self.env.validate()

    @property
    def arch(self) -> ArchPreset:
        return ARCH_PRESETS[self.preset]

    def config_hash(self) -> str:
        """Stable hash of the effective configuration (checkpoint compatibility)."""
        return hashlib.sha256(
            json.dumps(to_flat_dict(self), sort_keys=True).encode()
        ).hexdigest()[:16]


# --- flat key = value serialization -----------------------------------------

_ENV_PREFIX = "env_"


def to_flat_dict(cfg: TrainConfig) -> dict:
    out = {}
    for f in dataclasses.fields(TrainConfig):
        if f.name == "env":
            continue
        key = "lambda" if f.name == "lambda_" else f.name
        out[key] = getattr(cfg, f.name)
    for f in dataclasses.fields(EnvConfig):
        out[_ENV_PREFIX + f.name] = getattr(cfg.env, f.name)
    return out


def from_flat_dict(data: dict) -> TrainConfig:
    train_fields = {f.name: f for f in dataclasses.fields(TrainConfig)}
    env_fields = {f.name: f for f in dataclasses.fields(EnvConfig)}
    cfg = TrainConfig()
    errors = []
    for key, value in data.items():
        if key.startswith(_ENV_PREFIX) and key[len(_ENV_PREFIX):] in env_fields:
            name, target, fields = key[len(_ENV_PREFIX):], cfg.env, env_fields
        else:
            name = "lambda_" if key == "lambda" else key
            target, fields = cfg, train_fields
            if name not in train_fields or name == "env":
                errors.append(f"unknown config key: {key}")
                continue
        f = fields[name]
        try:
            setattr(target, name, _coerce(value, f.type, key))
        except ConfigError as e:
            errors.append(str(e))
    if errors:
        raise ConfigError("invalid config:\n  " + "\n  ".join(errors))
    cfg.validate()
    return cfg


def _coerce(value, type_str: str, key: str):
    if isinstance(value, str):
        value = value.strip()
        if type_str == "bool":
            low = value.lower()
            if low in ("true", "1", "yes", "on"):
                return True
            if low in ("false", "0", "no", "off"):
                return False
            raise ConfigError(f"{key}: expected a boolean, got {value!r}")
        if type_str == "int":
            try:
                return int(value)
            except ValueError:
                raise ConfigError(f"{key}: expected an integer, got {value!r}")
        if type_str == "float":
            try:
                return float(value)
            except ValueError:
                raise ConfigError(f"{key}: expected a number, got {value!r}")
        return value
    if type_str == "float" and isinstance(value, (int, float)):
        return float(value)
    if type_str == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{key}: expected an integer, got {value!r}")
        return value
    if type_str == "bool" and not isinstance(value, bool):
        raise ConfigError(f"{key}: expected a boolean, got {value!r}")
    return value


def load_config_file(path: str | Path) -> TrainConfig:
    """Parse a flat ``key = value`` config file (``#`` starts a comment)."""
    data = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        if key in data:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        data[key] = value.strip()
    return from_flat_dict(data)


def save_config_file(cfg: TrainConfig, path: str | Path) -> None:
    lines = [f"{key} = {_format(value)}" for key, value in to_flat_dict(cfg).items()]
    Path(path).write_text("\n".join(lines) + "\n")


def _format(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)
