"""Hyperparameter spaces for random search."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np


@dataclass(frozen=True)
class LogUniform:
    low: float
    high: float

    def draw(self, rng: np.random.Generator) -> float:
        return float(math.exp(rng.uniform(math.log(self.low), math.log(self.high))))


@dataclass(frozen=True)
class Uniform:
    low: float
    high: float

    def draw(self, rng: np.random.Generator) -> float:
        return float(rng.uniform(self.low, self.high))


@dataclass(frozen=True)
class IntRange:
    """Integers in ``[low, high]`` inclusive."""

    low: int
    high: int

    def draw(self, rng: np.random.Generator) -> int:
        return int(rng.integers(self.low, self.high + 1))


@dataclass(frozen=True)
class Choice:
    values: tuple

    def draw(self, rng: np.random.Generator) -> Any:
        v = self.values[int(rng.integers(0, len(self.values)))]
        return v.item() if hasattr(v, "item") else v


def draw_settings(space: dict, n: int, rng: np.random.Generator) -> list[dict]:
    """``n`` settings; parameters are drawn in sorted-name order for stability."""
    keys = sorted(space)
    return [{k: space[k].draw(rng) for k in keys} for _ in range(n)]
