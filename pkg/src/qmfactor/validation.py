"""Input checks shared by the estimator and the command line."""
from __future__ import annotations

from decimal import Decimal, InvalidOperation

import numpy as np

from .exceptions import DomainError


def parse_int(value) -> int:
    """Integer from an int, an integral float, or text such as '1e10'."""
    if isinstance(value, (int, np.integer)):
        return int(value)
    try:
        d = Decimal(str(value).strip())
    except InvalidOperation:
        raise DomainError(f"not a number: {value!r}") from None
    if d != d.to_integral_value():
        raise DomainError(f"not an integer: {value!r}")
    return int(d)


def check_N(N, minimum: int = 9) -> int:
    N = parse_int(N)
    if N < minimum:
        raise DomainError(f"N must be >= {minimum}, got {N}")
    return N


def check_x(X) -> np.ndarray:
    """1-D int64 array of arguments from a scalar, a sequence or an (n, 1) array."""
    arr = np.asarray(X)
    if arr.ndim == 2:
        if arr.shape[1] != 1:
            raise DomainError(f"expected a single feature column, got shape {arr.shape}")
        arr = arr[:, 0]
    arr = np.atleast_1d(arr)
    if arr.ndim != 1:
        raise DomainError(f"expected 1-D input, got shape {arr.shape}")
    if arr.dtype.kind == "f":
        if not np.all(np.isfinite(arr)) or np.any(arr != np.round(arr)):
            raise DomainError("x must be integral")
    elif arr.dtype.kind not in "iu":
        raise DomainError(f"unsupported dtype {arr.dtype}")
    arr = arr.astype(np.int64)
    if np.any(arr < 2):
        raise DomainError("x must be >= 2")
    return arr


def parse_int_list(text: str) -> list[int]:
    return [parse_int(t) for t in str(text).split(",") if t.strip()]
