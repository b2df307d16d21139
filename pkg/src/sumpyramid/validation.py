"""Input validation helpers in the spirit of sklearn.utils.validation."""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np


def check_text(value, name: str = "text") -> str:
    if not isinstance(value, str):
        raise TypeError(f"{name} must be a string, got {type(value).__name__}")
    return value


def check_tokens(value, name: str = "tokens") -> list[str]:
    if isinstance(value, str):
        raise TypeError(f"{name} must be a sequence of tokens, not a raw string")
    tokens = list(value)
    for tok in tokens:
        if not isinstance(tok, str):
            raise TypeError(f"{name} must contain only strings, got {type(tok).__name__}")
    return tokens


def check_positive_int(value, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise TypeError(f"{name} must be an integer, got {type(value).__name__}")
    if value < 1:
        raise ValueError(f"{name} must be >= 1, got {value}")
    return int(value)


def check_ratio(value, name: str) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value}")
    return value


def check_lengths(value, name: str = "lengths") -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    if np.any(arr < 0):
        raise ValueError(f"{name} must be non-negative")
    return arr

def check_random_state(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def check_same_length(a: Sequence, b: Sequence, names: tuple[str, str]) -> None:
    if len(a) != len(b):
        raise ValueError(f"{names[0]} and {names[1]} differ in length: {len(a)} vs {len(b)}")


def check_unique_ids(ids: Iterable[str], name: str = "ids") -> None:
    seen: set[str] = set()
    for i in ids:
        if i in seen:
            raise ValueError(f"{name} contains duplicate id {i!r}")
        seen.add(i)
