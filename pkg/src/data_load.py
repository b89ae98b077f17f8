import json
import logging
import os
from pathlib import Path
from typing import Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from src.linalg import as_hermitian
from src.probability import as_distribution
from src.util.errors import UsageError

PathLike = Union[str, Path]


def _read_json(filepath: PathLike) -> dict:
    try:
        logging.info(f"Loading file: {filepath}")
        with open(filepath, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except json.JSONDecodeError as e:
        logging.error(f"Malformed JSON in {filepath}: {e}")
        raise UsageError(f"Malformed JSON in {filepath}: {e}") from e
    except OSError as e:
        logging.error(f"Could not read {filepath}: {e}")
        raise UsageError(f"Could not read {filepath}: {e}") from e
    if not isinstance(payload, dict):
        raise UsageError(f"{filepath}: expected a JSON object at top level")
    return payload


def _strict(value):
    """Non-finite floats become "inf", "-inf" or "nan" strings; numpy scalars become Python ones."""
    if isinstance(value, dict):
        return {str(k): _strict(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_strict(v) for v in value]
    if isinstance(value, np.ndarray):
        return _strict(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value) if np.isfinite(value) else str(float(value))
    return value


def _write_json(payload: dict, filepath: PathLike) -> Path:
    path = Path(filepath)
    os.makedirs(path.parent, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_strict(payload), fh, indent=2, allow_nan=False)
    logging.info(f"Saved {path}")
    return path


def distribution_from_dict(payload: dict, normalized: bool = True) -> np.ndarray:
    """
    Builds a table from ``{"shape": [...], "weights": [...]}`` (row-major).

    Raises:
        UsageError: missing keys or a weight count that does not match the shape.
    """
    try:
        shape = tuple(int(s) for s in payload["shape"])
        weights = np.asarray(payload["weights"], dtype=float).ravel()
    except (KeyError, TypeError, ValueError) as e:
        raise UsageError(f"Distribution JSON needs 'shape' and numeric 'weights': {e}") from e
    if any(s < 1 for s in shape) or weights.size != int(np.prod(shape)):
        raise UsageError(f"{weights.size} weights do not fill shape {shape}")
    return as_distribution(weights.reshape(shape), normalized=normalized)


def distribution_to_dict(p: np.ndarray) -> dict:
    return {"shape": list(p.shape), "weights": np.asarray(p, dtype=float).ravel().tolist()}


def load_distribution(filepath: PathLike, normalized: bool = True) -> np.ndarray:
    """
    Reads a distribution JSON file.

    Args:
        filepath (str): Path to the JSON file.
        normalized (bool): Require total weight 1.

    Returns:
        np.ndarray: The table, one axis per factor.
    """
    p = distribution_from_dict(_read_json(filepath), normalized=normalized)
    logging.info(f"Distribution loaded: shape {p.shape}")
    return p


def save_distribution(p: np.ndarray, filepath: PathLike) -> Path:
    return _write_json(distribution_to_dict(p), filepath)


def matrix_from_dict(payload: dict) -> Tuple[np.ndarray, Optional[Tuple[int, ...]]]:
    """
    Builds a hermitian matrix from ``{"dim", "re", "im"}``; ``im`` may be
    omitted for real matrices and an optional ``dims`` lists the tensor factors.
    """
    try:
        dim = int(payload["dim"])
        re = np.asarray(payload["re"], dtype=float)
        im = np.asarray(payload["im"], dtype=float) if "im" in payload else np.zeros_like(re)
    except (KeyError, TypeError, ValueError) as e:
        raise UsageError(f"Matrix JSON needs 'dim', 're' and 'im': {e}") from e
    if re.shape != (dim, dim) or im.shape != (dim, dim):
        raise UsageError(f"Matrix JSON: 're'/'im' must be {dim}x{dim}, got {re.shape} and {im.shape}")
    dims = payload.get("dims")
    if dims is not None:
        dims = tuple(int(d) for d in dims)
        if int(np.prod(dims)) != dim:
            raise UsageError(f"dims {dims} do not multiply to {dim}")
    return as_hermitian(re + 1j * im), dims


def matrix_to_dict(m: np.ndarray, dims: Sequence[int] = None) -> dict:
    m = np.asarray(m, dtype=complex)
    payload = {"dim": m.shape[0], "re": m.real.tolist(), "im": m.imag.tolist()}
    if dims is not None:
        payload["dims"] = [int(d) for d in dims]
    return payload


def load_matrix(filepath: PathLike) -> Tuple[np.ndarray, Optional[Tuple[int, ...]]]:
    """Reads a matrix JSON file; returns (matrix, dims or None)."""
    m, dims = matrix_from_dict(_read_json(filepath))
    logging.info(f"Matrix loaded: dim {m.shape[0]}, factors {dims}")
    return m, dims


def save_matrix(m: np.ndarray, filepath: PathLike, dims: Sequence[int] = None) -> Path:
    return _write_json(matrix_to_dict(m, dims), filepath)


def save_json(payload: dict, filepath: PathLike) -> Path:
    """Writes a result dict; non-finite numbers are stored as strings."""
    return _write_json(payload, filepath)


def distribution_to_frame(p: np.ndarray) -> pd.DataFrame:
    """One row per cell in row-major order: index columns x0, x1, ... and ``weight``."""
    p = np.asarray(p, dtype=float)
    index = np.indices(p.shape).reshape(p.ndim, -1)
    frame = pd.DataFrame({f"x{i}": index[i] for i in range(p.ndim)})
    frame["weight"] = p.ravel()
    return frame


def save_csv(frame: pd.DataFrame, filepath: PathLike) -> Path:
    path = Path(filepath)
    os.makedirs(path.parent, exist_ok=True)
    frame.to_csv(path, index=False)
    logging.info(f"Saved {path} ({frame.shape[0]} rows)")
    return path
