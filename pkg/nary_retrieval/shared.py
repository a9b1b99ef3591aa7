"""Module containing shared utility functions, errors and configuration for the retrieval package."""
import configparser
import logging
import os
import pathlib
from typing import Iterable, Optional, Type

import numpy as np

logger = logging.getLogger(__name__)

current_dir = os.path.join(pathlib.Path(__file__).parent.parent.resolve())


class DataError(ValueError):
    """Raised for malformed inputs: broken files, shape or arity mismatches, non-finite values."""


class NumericError(ArithmeticError):
    """Raised when a numerical routine breaks down (e.g. the objective stops being finite)."""


def init_config():
    """Initializes the configuration from the config.ini file."""
    cfg: configparser = configparser.RawConfigParser()
    cfg.read(os.path.join(os.path.join(current_dir, "config", "config.ini")))
    return cfg


config: configparser = init_config()


def reject_if(test: bool, error_message: str = "", error: Type[Exception] = RuntimeError):
    """Raises the given error type (RuntimeError by default) if the given test is True."""
    if test:
        raise error(error_message)


def ensure_finite(values: np.ndarray, what: str = "input"):
    """Raises a DataError if the array contains NaN or Inf."""
    reject_if(not np.all(np.isfinite(values)), f"{what} contains non-finite values", DataError)


def str_to_bool(bool_string: str) -> bool:
    """Converts a string to a boolean value."""
    return bool_string.strip().lower() in ["true", "1", "t", "yes"]


def parse_int_list(raw: Optional[str]) -> list[int]:
    """Parses a comma separated list of integers, e.g. '1,2,4'.

    :param raw: The comma separated string, may contain whitespace.
    :return: The parsed integers in the given order, an empty list for None or blank input.
    """
    if raw is None or not raw.strip():
        return []
    try:
        return [int(item) for item in raw.split(",") if item.strip()]
    except ValueError as e:
        raise ValueError(f"Could not parse integer list '{raw}': {e}") from e


def parse_str_list(raw: Optional[str]) -> list[str]:
    """Parses a comma separated list of tokens, stripping whitespace and dropping empty entries."""
    if raw is None:
        return []
    return [item.strip() for item in raw.split(",") if item.strip()]


def relative_decrease(previous: float, current: float) -> float:
    """Relative decrease of an objective between two iterations; 0 when previous is 0."""
    if previous == 0.0:
        return 0.0
    return (previous - current) / abs(previous)


def is_non_increasing(values: Iterable[float], rel_slack: float = 1e-9) -> bool:
    """Checks that a sequence never increases by more than rel_slack relative to the previous value."""
    values = list(values)
    return all(b <= a + rel_slack * max(abs(a), 1e-300) for a, b in zip(values, values[1:]))
