"""Scheme parameters and the desk-scale presets.

Parameters are (n, m, q, sigma) with the derived bit length L of q. The
asymptotic relations n=O(lambda), m=O(n), sigma=O(sqrt(n)), q=O(m^3.5) are
not enforced at desk scale; the ``toy`` preset instead passes an empirical
noise-margin gate (see ``qibe.scheme.noise_margin_estimate``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidInputError

__all__ = ["SchemeParams", "PRESETS", "preset_params", "is_prime"]

_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for all 64-bit integers."""
    if n < 2:
        return False
    for p in _MR_WITNESSES:
        if n % p == 0:
            return n == p
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class SchemeParams:
    """Lattice dimensions and noise width governing every other module.

    n      message/security dimension (qubits of plaintext)
    m      lattice dimension (columns of the public matrix A)
    q      prime modulus
    sigma  Gaussian parameter s of the integer sampler, mass ~ exp(-pi x^2 / s^2)
    """

    n: int
    m: int
    q: int
    sigma: float

    def __post_init__(self) -> None:
        if self.n < 1 or self.m < 1:
            raise InvalidInputError(f"invalid parameter: n={self.n}, m={self.m} must be >= 1")
        if self.q < 3 or not is_prime(self.q):
            raise InvalidInputError(f"invalid parameter: q={self.q} must be a prime >= 3")
        if not self.sigma > 0:
            raise InvalidInputError(f"invalid parameter: sigma={self.sigma} must be > 0")

    @property
    def L(self) -> int:
        """Bit length of q: the unique L with 2^(L-1) <= q < 2^L."""
        return self.q.bit_length()

    def require_trapdoor_capacity(self) -> None:
        """The basis backend needs m >= 6 n ceil(log2 q)."""
        need = 6 * self.n * math.ceil(math.log2(self.q))
        if self.m < need:
            raise InvalidInputError(
                f"invalid parameter: basis backend needs m >= {need}, got m={self.m}"
            )


# sigma=None means "derive from the measured trapdoor quality at keygen"
# (only meaningful for the basis backend; see qibe.scheme.qkeygen).
PRESETS: dict[str, dict] = {
    "toy": {"n": 4, "m": 64, "q": 12289, "sigma": 4.0, "backend": "oracle_key"},
    "tiny-basis": {"n": 2, "m": 84, "q": 101, "sigma": None, "backend": "basis"},
}


def preset_params(name: str) -> dict:
    """Return a copy of the named preset's raw fields.

    sigma may be None, meaning "derive from the measured trapdoor quality
    at key generation" (qkeygen fills it in for the basis backend).
    """
    try:
        return dict(PRESETS[name])
    except KeyError:
        raise InvalidInputError(
            f"invalid parameter: unknown preset {name!r} (have {sorted(PRESETS)})"
        ) from None
