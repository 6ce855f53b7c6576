"""Certified enclosures of the critical constants.

``phi`` is the golden ratio, ``kappa1 = 2 log(phi) / log 2`` the critical
mean partial quotient, ``kappa2`` the upper critical value built from
``lambda_n = (n + sqrt(n^2 + 4)) / 2``, ``kappa4 = sqrt((kappa1 - 1) / log 2)``
and ``z`` the root of ``2 log(1 + z) = z log 2`` in ``[5, 6]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from qmark.errors import InvalidInput
from qmark.intervals import MAX_PRECISION, CertifiedInterval, Sign, decide_sign, enclose

MIN_PRECISION = 32
GUARD_BITS = 24

# quoted only for reference; nothing in the package asserts them
REFERENCE_BOUNDS = {"kappa2_lower_sqrt_coefficient": Fraction("0.06222"),
                    "kappa2_upper_sqrt_coefficient": Fraction("0.26489")}


def lambda_n(n: int, precision: int) -> CertifiedInterval:
    """``(n + sqrt(n^2 + 4)) / 2``, the larger root of ``x^2 = n x + 1``."""
    if n < 1:
        raise InvalidInput("lambda_n needs n >= 1")
    return (enclose(n * n + 4, precision).sqrt() + n) / 2


def _z_residual(z: Fraction, bits: int) -> CertifiedInterval:
    z_iv = enclose(z, bits)
    return 2 * (z_iv + 1).log() - z_iv * enclose(2, bits).log()


def _bisect_z(target_width: Fraction, bits: int) -> CertifiedInterval:
    # the residual is positive at 5, negative at 6 and decreasing in between
    lo, hi = Fraction(5), Fraction(6)
    while hi - lo > target_width:
        mid = (lo + hi) / 2
        sign, _ = decide_sign(lambda b: _z_residual(mid, b), bits, MAX_PRECISION)
        if sign is Sign.POSITIVE:
            lo = mid
        elif sign is Sign.NEGATIVE:
            hi = mid
        else:
            # mid is numerically indistinguishable from the root
            return CertifiedInterval.hull(mid - target_width, mid + target_width, bits)
    return CertifiedInterval.hull(lo, hi, bits)


@dataclass(frozen=True)
class Constants:
    precision: int
    phi: CertifiedInterval
    kappa1: CertifiedInterval
    kappa2: CertifiedInterval
    kappa4: CertifiedInterval
    z: CertifiedInterval
    log2: CertifiedInterval
    sqrt2: CertifiedInterval

    @property
    def alpha(self) -> CertifiedInterval:
        """``(kappa1 - 1) / log 2``, i.e. ``kappa4 ** 2``."""
        return (self.kappa1 - 1) / self.log2

    @property
    def eta(self) -> CertifiedInterval:
        return self.log2 / (self.kappa1 - 1)

    def lambda_n(self, n: int) -> CertifiedInterval:
        return lambda_n(n, self.precision + GUARD_BITS)

    def items(self):
        return [("phi", self.phi), ("kappa1", self.kappa1), ("kappa2", self.kappa2),
                ("kappa4", self.kappa4), ("z", self.z)]

    def to_json(self, digits: int = 20) -> dict:
        return {name: value.to_json(digits) for name, value in self.items()}


def _narrow_enough(value: CertifiedInterval, precision: int) -> bool:
    mag = max(abs(value.lower), abs(value.upper))
    return value.width <= Fraction(2, 1 << precision) * mag


@lru_cache(maxsize=32)
def constants(precision: int = 128) -> Constants:
    """All constants with relative width at most ``2**(1 - precision)``."""
    if precision < MIN_PRECISION:
        raise InvalidInput(f"precision must be at least {MIN_PRECISION} bits")
    guard = GUARD_BITS
    while True:
        bits = precision + guard
        log2 = enclose(2, bits).log()
        sqrt2 = enclose(2, bits).sqrt()
        phi = (enclose(5, bits).sqrt() + 1) / 2
        kappa1 = 2 * phi.log() / log2
        kappa4 = ((kappa1 - 1) / log2).sqrt()
        l4, l5 = lambda_n(4, bits).log(), lambda_n(5, bits).log()
        kappa2 = (4 * l5 - 5 * l4) / (l5 - l4 - sqrt2.log())
        z = _bisect_z(Fraction(1, 1 << (precision + 1)), bits)
        values = Constants(bits, phi, kappa1, kappa2, kappa4, z, log2, sqrt2)
        if all(_narrow_enough(v, precision) for _, v in values.items()):
            return values
        guard *= 2
