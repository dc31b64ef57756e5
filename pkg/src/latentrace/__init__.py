"""Two-car latent world-model racing: environment, models, training, evaluation."""

__version__ = "0.1.0"
