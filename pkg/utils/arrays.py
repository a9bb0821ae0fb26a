import numpy as np


def readonly(values, dtype=float) -> np.ndarray:
    """Copy ``values`` into a fresh array that cannot be written through."""
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


def as_dates(values) -> np.ndarray:
    return readonly(values, dtype="datetime64[D]")


def strictly_increasing(dates: np.ndarray) -> bool:
    return bool(np.all(dates[1:] > dates[:-1]))
