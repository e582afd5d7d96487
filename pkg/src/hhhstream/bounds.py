"""Worst-case guarantees on output size and conditioned-count error."""

from __future__ import annotations

import math
from fractions import Fraction

from .validation import as_fraction


def bound_output_size_1d(phi, epsilon) -> Fraction:
    """Maximum number of prefixes the 1D output can emit: ``1/(phi - 2 eps)``."""
    phi, epsilon = as_fraction(phi), as_fraction(epsilon)
    if not 2 * epsilon < phi:
        raise ValueError(f"bound requires epsilon < phi/2, got phi={phi}, epsilon={epsilon}")
    return 1 / (phi - 2 * epsilon)


def bound_cond_error_1d(phi, epsilon) -> Fraction:
    """Largest overestimate of any emitted conditioned count, as a fraction of N."""
    phi, epsilon = as_fraction(phi), as_fraction(epsilon)
    if not 2 * epsilon < phi:
        raise ValueError(f"bound requires epsilon < phi/2, got phi={phi}, epsilon={epsilon}")
    return epsilon / (phi - 2 * epsilon)


def bound_output_size_2d(phi, epsilon, antichain: int) -> float:
    """Maximum 2D output size for antichain size ``A`` and small enough epsilon.

    Evaluates ``2/(A eps) * (phi - (1+A) eps - sqrt((phi - (1+A) eps)^2 - A^2 eps))``.
    """
    phi, epsilon = as_fraction(phi), as_fraction(epsilon)
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    a = antichain
    slack = phi - (1 + a) * epsilon
    disc = slack * slack - a * a * epsilon
    if disc < 0:
        raise ValueError(f"epsilon too large for bound (discriminant {float(disc):.3g} < 0)")
    return 2 / (a * float(epsilon)) * (float(slack) - math.sqrt(disc))


def discriminant_2d(phi, epsilon, antichain: int) -> Fraction:
    phi, epsilon = as_fraction(phi), as_fraction(epsilon)
    slack = phi - (1 + antichain) * epsilon
    return slack * slack - antichain * antichain * epsilon
