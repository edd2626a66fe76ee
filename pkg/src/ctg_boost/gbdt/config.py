from __future__ import annotations

from dataclasses import asdict, dataclass, fields


@dataclass(frozen=True)
class GbdtConfig:
    """Booster hyperparameters; defaults are the fetal-health configuration.

    ``min_child_weight`` is an absolute floor on a child's hessian sum.
    ``max_depth=None`` means unlimited depth.
    """

    learning_rate: float = 0.1
    num_leaves: int = 31
    max_depth: int | None = None
    min_samples_leaf: int = 20
    min_child_weight: float = 0.001
    min_split_gain: float = 0.0
    n_estimators: int = 100
    max_bins: int = 255
    seed: int = 123
    reg_alpha: float = 0.0
    reg_lambda: float = 0.0

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")
        if self.num_leaves < 2:
            raise ValueError("num_leaves must be >= 2")
        if self.n_estimators < 0:
            raise ValueError("n_estimators must be >= 0")
        if not 2 <= self.max_bins <= 255:
            raise ValueError("max_bins must lie in [2, 255]")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")
        if self.min_child_weight < 0:
            raise ValueError("min_child_weight must be >= 0")
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError("max_depth must be >= 1 or None")
        if self.reg_alpha < 0 or self.reg_lambda < 0:
            raise ValueError("regularization terms must be >= 0")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> GbdtConfig:
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    def replace(self, **changes) -> GbdtConfig:
        return type(self)(**{**self.to_dict(), **changes})
