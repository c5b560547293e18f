################################################################################
# © Copyright 2020-2022 Zapata Computing Inc.
################################################################################
"""General-purpose utilities."""
import os
from contextlib import contextmanager
from typing import Any, Dict, Union

import numpy as np
import rapidjson as json

from .typing import AnyPath, DumpTarget, LoadSource

RNDSEED = 12345


def convert_array_to_dict(array: np.ndarray) -> dict:
    """Convert a real numpy array to a JSON-compatible dictionary.

    Args:
        array: a numpy array of any shape

    Returns:
        dictionary with the flattened values and the original shape
    """
    array = np.asarray(array, dtype=float)
    return {"shape": list(array.shape), "real": array.ravel().tolist()}


def convert_dict_to_array(dictionary: dict) -> np.ndarray:
    """Inverse of `convert_array_to_dict`.

    Args:
        dictionary: the dict containing the data

    Returns:
        array (numpy.array): a numpy array
    """
    array = np.array(dictionary["real"], dtype=float)
    return array.reshape(dictionary.get("shape", array.shape))


def format_float(value: float) -> str:
    """Shortest text representation that round-trips to the same double.

    Missing values (NaN) are rendered as an empty string.
    """
    if value is None or np.isnan(value):
        return ""
    return repr(float(value))


def load_json(file: LoadSource) -> Any:
    """Load a JSON document from a path or a file-like object."""
    with ensure_open(file) as f:
        return json.load(f)


def save_generic_dict(dictionary: Dict, filename: DumpTarget):
    """Save dictionary as json

    Args:
        dictionary (dict): the dict containing the data
    """
    with ensure_open(filename, "w") as f:
        f.write(json.dumps(dictionary, indent=2))


def spawn_seed(seed: int, *keys: int) -> int:
    """Derive an independent 32-bit seed from a base seed and integer keys.

    Used to give every resampling replicate (and every redraw of it) its own
    reproducible random stream, independent of execution order.
    """
    sequence = np.random.SeedSequence([int(seed) % 2**64, *map(int, keys)])
    return int(sequence.generate_state(1)[0])


def normalize_weights(weights: np.ndarray) -> np.ndarray:
    """Rescale weights so that the positive ones have mean 1.

    Zero weights (rows excluded from a resampled fit) stay zero.
    """
    weights = np.asarray(weights, dtype=float)
    positive = weights > 0
    if not positive.any():
        raise ValueError("Weights are all zero.")
    return weights / weights[positive].mean()


@contextmanager
def ensure_open(path_like: Union[LoadSource, DumpTarget], mode="r", encoding="utf-8"):
    # str | bytes | PathLike | Readable
    if isinstance(path_like, (str, bytes, os.PathLike)):
        with open(path_like, mode, encoding=encoding if "b" not in mode else None) as f:
            yield f
    else:
        # Readable | Writable
        if set(mode).intersection(set("wxa+")) and not path_like.writable():
            raise ValueError(f"File isn't writable, can't ensure mode {mode}")
        yield path_like


def ensure_directory(path: AnyPath) -> None:
    os.makedirs(path, exist_ok=True)
