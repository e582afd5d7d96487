"""Input validation helpers shared by the estimator, oracle and CLI."""

from __future__ import annotations

import math
import numbers
from fractions import Fraction
from typing import Iterable, Optional

import numpy as np

from .lattice import Hierarchy


def as_fraction(x) -> Fraction:
    """Exact rational for ``x``; floats go through their shortest repr."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, numbers.Integral):
        return Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, numbers.Real):
        if not math.isfinite(x):
            raise ValueError(f"expected a finite number, got {x!r}")
        return Fraction(repr(float(x)))
    raise TypeError(f"expected a number, got {type(x).__name__}")


def check_unit_interval(name: str, x, *, closed_right: bool = False) -> Fraction:
    value = as_fraction(x)
    ok = 0 < value <= 1 if closed_right else 0 < value < 1
    if not ok:
        bracket = "]" if closed_right else ")"
        raise ValueError(f"{name} must lie in (0, 1{bracket}, got {x!r}")
    return value


def threshold(phi: Fraction, total: int) -> int:
    """Smallest integer count that is ``>= phi * total``."""
    return -((-phi.numerator * total) // phi.denominator)


def check_elements(X, hierarchy: Hierarchy) -> list:
    """Validate a batch of fully specified elements as a list of int tuples.

    Accepts a sequence of tuples, a 2-D array of shape ``(n, d)``, or for
    one-dimensional hierarchies a flat sequence. String entries are parsed
    with the dimension codec (dotted quads for 32-bit dimensions).
    """
    d = hierarchy.d
    if isinstance(X, np.ndarray):
        if X.ndim == 1 and d == 1:
            X = X.reshape(-1, 1)
        if X.ndim != 2 or X.shape[1] != d:
            raise ValueError(f"expected array of shape (n, {d}), got {X.shape}")
        rows = X.tolist()
    else:
        rows = list(X)
    out = []
    for k, row in enumerate(rows):
        if d == 1 and (isinstance(row, (str, bytes)) or not isinstance(row, Iterable)):
            row = (row,)
        row = tuple(row)
        if len(row) != d:
            raise ValueError(f"row {k}: expected {d} values, got {len(row)}")
        values = []
        for v, dim in zip(row, hierarchy.dims):
            if isinstance(v, str):
                v = dim.parse_value(v)
            elif isinstance(v, numbers.Integral):
                v = int(v)
            else:
                raise TypeError(f"row {k}: expected integer or string, got {type(v).__name__}")
            if not 0 <= v < (1 << dim.width):
                raise ValueError(f"row {k}: value {v} does not fit in {dim.width} bits")
            values.append(v)
        out.append(tuple(values))
    return out


def check_weights(sample_weight, n: int) -> Optional[list]:
    if sample_weight is None:
        return None
    weights = np.asarray(sample_weight).tolist()
    if len(weights) != n:
        raise ValueError(f"sample_weight has {len(weights)} entries for {n} samples")
    for w in weights:
        if isinstance(w, float) and w.is_integer():
            w = int(w)
        if not isinstance(w, numbers.Integral) or w < 1:
            raise ValueError(f"weights must be positive integers, got {w!r}")
    return [int(w) for w in weights]
