"""Model hyperparameters."""

from __future__ import annotations

from dataclasses import dataclass

OPTIMIZERS = ("adam", "sgd")


@dataclass(frozen=True)
class ModelConfig:
    """Dimensions, threshold, and training knobs.

    encoding_dim is the length E of the precomputed video encoding;
    individual_dim is the length D of the trainable individual vectors.
    Binary-pair scoring at inference includes reflexive (a, a) pairs
    unless reflexive_pairs is off.
    """

    rng_seed: int
    encoding_dim: int = 64
    individual_dim: int = 300
    classifier_hidden: int = 64
    predicate_hidden: int = 64
    threshold: float = 0.5
    learning_rate: float = 0.001
    epochs: int = 100
    optimizer: str = "adam"
    reflexive_pairs: bool = True

    def __post_init__(self):
        if not isinstance(self.rng_seed, int) or self.rng_seed < 0:
            raise ValueError("rng_seed must be a non-negative integer")
        for name in (
            "encoding_dim",
            "individual_dim",
            "classifier_hidden",
            "predicate_hidden",
        ):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if not 0.0 < self.threshold < 1.0:
            raise ValueError("threshold must lie strictly between 0 and 1")
        if self.learning_rate <= 0.0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 0:
            raise ValueError("epochs must be non-negative")
        if self.optimizer not in OPTIMIZERS:
            raise ValueError(f"optimizer must be one of {OPTIMIZERS}")
