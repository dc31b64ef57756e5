from .dynamics import CarState, resolve_collision, step_car
from .episode import EpisodeBuilder, EpisodeRecord
from .racing import EnvAction, EnvState, RacingEnv, compute_rewards
from .track import Track, TrackGenerationError, generate_track

__all__ = [
    "CarState", "EnvAction", "EnvState", "EpisodeBuilder", "EpisodeRecord",
    "RacingEnv", "Track", "TrackGenerationError", "compute_rewards",
    "generate_track", "resolve_collision", "step_car",
]
