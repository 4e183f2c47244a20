"""Trainer configuration shared by the three embedding algorithms."""

from __future__ import annotations

from dataclasses import dataclass, field, asdict


DIMENSIONS = (50, 100, 200, 400, 800)


def glove_iterations_for(dimension: int) -> int:
    # 50 iterations below dimension 300, 100 at or above.
    return 50 if dimension < 300 else 100


@dataclass
class TrainerConfig:
    dimension: int = 100
    window: int = 5
    min_count: int = 5
    seed: int = 1
    # SGNS
    negative_samples: int = 5
    epochs: int = 5
    learning_rate: float = 0.025
    subsample_threshold: float = 1e-3
    negative_exponent: float = 0.75
    dynamic_window: bool = True
    workers: int = 1  # >1 is opt-in and nondeterministic
    # GloVe
    glove_iterations: int | None = None  # None -> dimension rule
    glove_learning_rate: float = 0.05
    x_max: float = 100.0
    alpha: float = 0.75
    # PPMI
    svd_exponent: float = 0.5
    ppmi_weighting: str = "flat"
    glove_weighting: str = "inverse"

    def __post_init__(self):
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if self.dimension < 1:
            raise ValueError("dimension must be >= 1")
        if self.min_count < 1:
            raise ValueError("min_count must be >= 1")
        for name in ("learning_rate", "glove_learning_rate"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")

    @property
    def effective_glove_iterations(self) -> int:
        if self.glove_iterations is not None:
            return self.glove_iterations
        return glove_iterations_for(self.dimension)

    def to_params(self) -> dict:
        return asdict(self)
