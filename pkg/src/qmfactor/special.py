"""Complex log-gamma on the continuous branch (Stirling series after upward recurrence)."""
from __future__ import annotations

import cmath
import math

# B_{2m} / (2m (2m-1)) for m = 1..10
_STIRLING = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
    43867.0 / 244188.0,
    -174611.0 / 125400.0,
]

_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
_SHIFT = 16.0


def loggamma(z: complex) -> complex:
    """log Gamma(z) for Re z > 0, continuous in z (not the principal log of Gamma).

    Shifts z up to Re >= 16 with Gamma(z) = Gamma(z+m) / prod(z+k), then sums
    the Stirling series; the ten terms leave an error far below 1e-14 there.
    """
    z = complex(z)
    if z.real <= 0:
        raise ValueError("loggamma implemented for Re z > 0")
    shift = 0j
    m = max(0, math.ceil(_SHIFT - z.real))
    for k in range(m):
        shift += cmath.log(z + k)
    w = z + m
    inv = 1.0 / w
    inv2 = inv * inv
    series = 0j
    power = inv
    for c in _STIRLING:
        series += c * power
        power *= inv2
    return (w - 0.5) * cmath.log(w) - w + _HALF_LOG_2PI + series - shift


def delta_coulomb(E: float) -> float:
    """Unwrapped phase Arg Gamma(3/4 - iE/4), i.e. Im log Gamma."""
    if E < 0:
        raise ValueError("E must be non-negative")
    return loggamma(complex(0.75, -E / 4.0)).imag


def delta_coulomb_leading(E: float, with_constant: bool = False) -> float:
    """Large-E form (E/4)(1 - ln(E/4)), optionally with the Stirling constant -pi/8."""
    val = (E / 4.0) * (1.0 - math.log(E / 4.0))
    return val - math.pi / 8.0 if with_constant else val
