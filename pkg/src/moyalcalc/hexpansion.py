"""Truncated semiclassical expansions a ~ sum_j h^j a_j.

An `HExpansion` stores coefficients for h-powers j = -order .. trunc, where
`order` is the growth exponent (a symbol of order m is O(h^{-m}); the main
corpus lives at order <= 0, so the leading stored power is -order >= 0).
Coefficients beyond `trunc` are *undefined*, never silently zero: requesting
one raises `TruncationError`.  Coefficients may be polynomial symbols or
sampled-grid symbols; the container only assumes the shared symbol protocol
(+, -, scalar *, derivative, max_abs).
"""

from __future__ import annotations

from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import DimensionMismatchError, TruncationError
from .phasespace import PhaseSpace, PolySymbol

__all__ = ["HExpansion", "lift"]


class HExpansion:
    """Finite h-expansion with strict truncation bookkeeping."""

    __slots__ = ("space", "order", "trunc", "coeffs")

    def __init__(self, space: PhaseSpace, order: int, trunc: int,
                 coeffs: Sequence):
        h_min = -order
        if trunc < h_min - 1:
            raise ValueError(f"trunc {trunc} below leading power {h_min} - 1")
        expected = trunc - h_min + 1
        if len(coeffs) != expected:
            raise ValueError(
                f"need {expected} coefficients for order {order}, trunc {trunc}; "
                f"got {len(coeffs)}"
            )
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "order", int(order))
        object.__setattr__(self, "trunc", int(trunc))
        object.__setattr__(self, "coeffs", tuple(coeffs))

    def __setattr__(self, *_):
        raise AttributeError("HExpansion is immutable")

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, space: PhaseSpace, trunc: int, order: int = 0) -> "HExpansion":
        n_coeffs = trunc + order + 1
        return cls(space, order, trunc, [PolySymbol.zero(space)] * n_coeffs)

    @classmethod
    def from_powers(cls, space: PhaseSpace, powers: Mapping[int, object],
                    trunc: int) -> "HExpansion":
        """Build from a map {h-power: coefficient}; order is inferred as
        -min(stored power, 0)."""
        if powers:
            h_min = min(min(powers), 0)
        else:
            h_min = 0
        if any(j > trunc for j in powers):
            raise TruncationError(
                f"coefficient at power {max(powers)} exceeds trunc {trunc}"
            )
        if powers:
            zero = next(iter(powers.values())) * 0
        else:
            zero = PolySymbol.zero(space)
        coeffs = [powers.get(j, zero) for j in range(h_min, trunc + 1)]
        return cls(space, -h_min, trunc, coeffs)

    # -- inspection ---------------------------------------------------------

    @property
    def h_min(self) -> int:
        return -self.order

    def coefficient(self, j: int):
        """Coefficient of h^j.  Structurally zero below the leading power;
        loudly undefined above trunc."""
        if j > self.trunc:
            raise TruncationError(
                f"h^{j} requested but expansion is truncated at h^{self.trunc}"
            )
        if j < self.h_min:
            return self._zero_coeff()
        return self.coeffs[j - self.h_min]

    def _zero_coeff(self):
        if self.coeffs:
            return self.coeffs[0] * 0
        return PolySymbol.zero(self.space)

    def coeff_norms(self) -> dict[int, float]:
        return {
            self.h_min + i: c.max_abs() for i, c in enumerate(self.coeffs)
        }

    def lowest_order(self, tol: float = 0.0) -> int | None:
        """Smallest h-power whose coefficient norm exceeds tol, or None."""
        for i, c in enumerate(self.coeffs):
            if c.max_abs() > tol:
                return self.h_min + i
        return None

    def is_zero(self, tol: float = 0.0) -> bool:
        return self.lowest_order(tol) is None

    # -- arithmetic ---------------------------------------------------------

    def _require_same_space(self, other: "HExpansion"):
        if self.space.n != other.space.n:
            raise DimensionMismatchError(
                f"phase spaces differ: n={self.space.n} vs n={other.space.n}"
            )

    def __add__(self, other):
        if isinstance(other, (int, float, complex)):
            other = lift(PolySymbol.constant(self.space, other), self.trunc)
        if not isinstance(other, HExpansion):
            return NotImplemented
        self._require_same_space(other)
        trunc = min(self.trunc, other.trunc)
        h_min = min(self.h_min, other.h_min)
        coeffs = [
            self.coefficient(j) + other.coefficient(j)
            for j in range(h_min, trunc + 1)
        ]
        return HExpansion(self.space, -h_min, trunc, coeffs)

    __radd__ = __add__

    def __neg__(self):
        return HExpansion(self.space, self.order, self.trunc,
                          [-c for c in self.coeffs])

    def __sub__(self, other):
        if isinstance(other, (int, float, complex)):
            other = lift(PolySymbol.constant(self.space, other), self.trunc)
        if not isinstance(other, HExpansion):
            return NotImplemented
        return self.__add__(-other)

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, scalar):
        """Scalar multiple.  Symbol-valued products go through the star
        product, never through this operator."""
        if not isinstance(scalar, (int, float, complex)):
            return NotImplemented
        return HExpansion(self.space, self.order, self.trunc,
                          [c * scalar for c in self.coeffs])

    __rmul__ = __mul__

    def times_h_power(self, k: int) -> "HExpansion":
        """Multiply by h^k (k may be negative); truncation shifts with it."""
        return HExpansion(self.space, self.order - k, self.trunc + k, self.coeffs)

    def truncate(self, new_trunc: int) -> "HExpansion":
        if new_trunc > self.trunc:
            raise TruncationError(
                f"cannot extend truncation {self.trunc} to {new_trunc}"
            )
        keep = new_trunc - self.h_min + 1
        if keep <= 0:
            return HExpansion(self.space, self.order, new_trunc, [])
        return HExpansion(self.space, self.order, new_trunc, self.coeffs[:keep])

    def asserting_exact_tail(self, new_trunc: int) -> "HExpansion":
        """Extend the truncation with zero coefficients.  Caller asserts the
        tail really is zero (e.g. a lifted polynomial); this is the only
        sanctioned way to deepen an expansion."""
        if new_trunc <= self.trunc:
            return self.truncate(new_trunc)
        pad = [self._zero_coeff()] * (new_trunc - self.trunc)
        return HExpansion(self.space, self.order, new_trunc,
                          list(self.coeffs) + pad)

    def map_coeffs(self, fn: Callable) -> "HExpansion":
        return HExpansion(self.space, self.order, self.trunc,
                          [fn(c) for c in self.coeffs])

    def conjugate(self) -> "HExpansion":
        return self.map_coeffs(lambda c: c.conjugate())

    def prune(self, tol: float) -> "HExpansion":
        return self.map_coeffs(lambda c: c.prune(tol))

    # -- evaluation ---------------------------------------------------------

    def evaluate(self, points, h: float):
        """Numerical value sum_j h^j a_j(points) of the truncated series."""
        pts = np.asarray(points)
        out: np.ndarray | complex = 0j
        for i, c in enumerate(self.coeffs):
            j = self.h_min + i
            out = out + (h ** j) * c.evaluate(pts)
        return out

    # -- comparison & serialization ----------------------------------------

    def __eq__(self, other):
        if not isinstance(other, HExpansion):
            return NotImplemented
        return (self.space.n == other.space.n and self.order == other.order
                and self.trunc == other.trunc and self.coeffs == other.coeffs)

    def __hash__(self):
        return hash((self.space.n, self.order, self.trunc, self.coeffs))

    def allclose(self, other: "HExpansion", tol: float = 1e-12) -> bool:
        self._require_same_space(other)
        trunc = min(self.trunc, other.trunc)
        h_min = min(self.h_min, other.h_min)
        for j in range(h_min, trunc + 1):
            if (self.coefficient(j) - other.coefficient(j)).max_abs() > tol:
                return False
        return True

    def to_json_obj(self) -> dict:
        return {
            "order": self.order,
            "trunc": self.trunc,
            "coeffs": [c.to_json_obj() for c in self.coeffs],
        }

    @classmethod
    def from_json_obj(cls, space: PhaseSpace, obj: dict) -> "HExpansion":
        coeffs = [PolySymbol.from_json_obj(space, rec) for rec in obj["coeffs"]]
        return cls(space, obj["order"], obj["trunc"], coeffs)

    def __repr__(self):
        bits = []
        for i, c in enumerate(self.coeffs):
            j = self.h_min + i
            if not getattr(c, "is_zero", False):
                bits.append(f"h^{j}*{c!r}")
        body = " + ".join(bits) if bits else "0"
        return f"HExpansion[trunc={self.trunc}]({body})"


def lift(symbol: PolySymbol, trunc: int) -> HExpansion:
    """Lift a plain symbol to an order-0 expansion with exact zero tail."""
    zero = symbol * 0
    return HExpansion(symbol.space, 0, trunc,
                      [symbol] + [zero] * trunc)
