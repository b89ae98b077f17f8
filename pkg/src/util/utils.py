import logging

import numpy as np
from rich.logging import RichHandler


def setup_logging(level: str = "INFO"):
    """
    Configures centralized, colored logging through Rich for the whole project.
    Args:
        level (str): Log level (e.g. "INFO", "DEBUG", "WARNING", "ERROR")
    """
    logging.basicConfig(
        level=level,
        format="%(asctime)s | %(levelname)s | %(name)s | %(message)s",
        datefmt="[%H:%M:%S]",
        handlers=[
            RichHandler(
                rich_tracebacks=True,
                show_time=True,
                omit_repeated_times=True,
                show_path=True,
            )
        ],
    )


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """
    Builds a counter-based generator for a 64-bit seed.

    Independent streams are obtained by jumping the Philox counter, so the
    draws of stream ``i`` never depend on how many other streams were used.
    """
    bit_generator = np.random.Philox(seed & 0xFFFFFFFFFFFFFFFF)
    if stream:
        bit_generator = bit_generator.jumped(stream)
    return np.random.Generator(bit_generator)


def log2_or_inf(value: float, floor: float = 1e-300) -> float:
    """log2 with the optimum clamped below, so solver roundoff never yields -inf."""
    return float(np.log2(max(value, floor)))
