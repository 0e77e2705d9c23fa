"""Phase-space geometry and polynomial symbols.

Coordinates are ordered (x_1, ..., x_n, xi_1, ..., xi_n).  Every algebraic
convention downstream (star product, flows, quantization) is anchored to the
Poisson bracket defined here:

    {f, g} = sum_j (d_xi_j f * d_x_j g  -  d_x_j f * d_xi_j g)

so that {x, xi} = -1 and H_q = {q, .} generates the standard Hamilton
equations  x' = d_xi q,  xi' = -d_x q.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from types import MappingProxyType
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .errors import RegionError

__all__ = [
    "PhaseSpace",
    "PolySymbol",
    "poisson_bracket",
    "hamiltonian_field_apply",
    "hamiltonian_vector_field",
    "Region",
    "Cutoff",
    "CUTOFF_PROFILES",
    "dumps_stable",
]


def dumps_stable(obj) -> str:
    """Serialize to JSON with a stable key order and exact float round-trip."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


@dataclass(frozen=True)
class PhaseSpace:
    """R^{2n} with coordinates (x_1..x_n, xi_1..xi_n)."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"need n >= 1, got {self.n}")

    @property
    def dim(self) -> int:
        return 2 * self.n

    @property
    def coord_names(self) -> tuple[str, ...]:
        if self.n == 1:
            return ("x", "xi")
        return tuple(f"x{j}" for j in range(self.n)) + tuple(
            f"xi{j}" for j in range(self.n)
        )

    def omega_matrix(self) -> np.ndarray:
        """Symplectic form matrix: omega(v, w) = v^T Omega w with
        Omega = [[0, I], [-I, 0]] in (x, xi) block order."""
        n = self.n
        out = np.zeros((2 * n, 2 * n))
        out[:n, n:] = np.eye(n)
        out[n:, :n] = -np.eye(n)
        return out


def _canon_exp(exp: Sequence[int], dim: int) -> tuple[int, ...]:
    t = tuple(int(e) for e in exp)
    if len(t) != dim:
        raise ValueError(f"exponent length {len(t)} != phase-space dim {dim}")
    if any(e < 0 for e in t):
        raise ValueError(f"negative exponent in {t}")
    return t


class PolySymbol:
    """Polynomial symbol: finite sum of complex-coefficient monomials.

    Terms are stored as a map from exponent multi-indices of length 2n to
    nonzero complex coefficients; exact zeros are dropped on construction so
    equality is structural.  Instances are immutable.
    """

    __slots__ = ("space", "_terms")

    def __init__(self, space: PhaseSpace, terms: Mapping[Sequence[int], complex] | None = None):
        object.__setattr__(self, "space", space)
        clean: dict[tuple[int, ...], complex] = {}
        if terms:
            for exp, coeff in terms.items():
                c = complex(coeff)
                if c != 0:
                    key = _canon_exp(exp, space.dim)
                    prev = clean.get(key, 0j)
                    tot = prev + c
                    if tot == 0:
                        clean.pop(key, None)
                    else:
                        clean[key] = tot
        object.__setattr__(self, "_terms", clean)

    def __setattr__(self, *_):
        raise AttributeError("PolySymbol is immutable")

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, space: PhaseSpace) -> "PolySymbol":
        return cls(space, {})

    @classmethod
    def constant(cls, space: PhaseSpace, value: complex) -> "PolySymbol":
        return cls(space, {(0,) * space.dim: value})

    @classmethod
    def one(cls, space: PhaseSpace) -> "PolySymbol":
        return cls.constant(space, 1.0)

    @classmethod
    def coordinate(cls, space: PhaseSpace, index: int) -> "PolySymbol":
        """The coordinate function x_index (index < n) or xi_{index-n}."""
        if not 0 <= index < space.dim:
            raise ValueError(f"coordinate index {index} out of range")
        exp = [0] * space.dim
        exp[index] = 1
        return cls(space, {tuple(exp): 1.0})

    @classmethod
    def monomial(cls, space: PhaseSpace, exp: Sequence[int], coeff: complex = 1.0) -> "PolySymbol":
        return cls(space, {tuple(exp): coeff})

    # -- inspection ---------------------------------------------------------

    @property
    def terms(self) -> Mapping[tuple[int, ...], complex]:
        return MappingProxyType(self._terms)

    @property
    def is_zero(self) -> bool:
        return not self._terms

    def degree(self) -> int:
        """Total degree; -1 for the zero symbol."""
        if not self._terms:
            return -1
        return max(sum(e) for e in self._terms)

    def max_abs(self) -> float:
        return max((abs(c) for c in self._terms.values()), default=0.0)

    def is_real(self, tol: float = 0.0) -> bool:
        return all(abs(c.imag) <= tol for c in self._terms.values())

    def constant_term(self) -> complex:
        return self._terms.get((0,) * self.space.dim, 0j)

    # -- algebra ------------------------------------------------------------

    def _require_same_space(self, other: "PolySymbol"):
        if self.space.n != other.space.n:
            from .errors import DimensionMismatchError

            raise DimensionMismatchError(
                f"phase spaces differ: n={self.space.n} vs n={other.space.n}"
            )

    def __add__(self, other):
        if isinstance(other, (int, float, complex)):
            other = PolySymbol.constant(self.space, other)
        if not isinstance(other, PolySymbol):
            return NotImplemented
        self._require_same_space(other)
        out = dict(self._terms)
        for exp, c in other._terms.items():
            out[exp] = out.get(exp, 0j) + c
        return PolySymbol(self.space, out)

    __radd__ = __add__

    def __neg__(self):
        return PolySymbol(self.space, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, float, complex)):
            other = PolySymbol.constant(self.space, other)
        return self.__add__(-other)

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            c = complex(other)
            if c == 0:
                return PolySymbol.zero(self.space)
            return PolySymbol(self.space, {e: c * v for e, v in self._terms.items()})
        if not isinstance(other, PolySymbol):
            return NotImplemented
        self._require_same_space(other)
        out: dict[tuple[int, ...], complex] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                key = tuple(a + b for a, b in zip(e1, e2))
                out[key] = out.get(key, 0j) + c1 * c2
        return PolySymbol(self.space, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        result = PolySymbol.one(self.space)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base if k > 1 else base
            k >>= 1
        return result

    def conjugate(self) -> "PolySymbol":
        return PolySymbol(self.space, {e: c.conjugate() for e, c in self._terms.items()})

    def derivative(self, index: int) -> "PolySymbol":
        """Partial derivative along coordinate `index` (0-based, x's first)."""
        out = {}
        for exp, c in self._terms.items():
            e = exp[index]
            if e:
                new = list(exp)
                new[index] = e - 1
                key = tuple(new)
                out[key] = out.get(key, 0j) + c * e
        return PolySymbol(self.space, out)

    def prune(self, tol: float) -> "PolySymbol":
        """Drop coefficients with |c| <= tol (numeric cleanup only)."""
        return PolySymbol(
            self.space, {e: c for e, c in self._terms.items() if abs(c) > tol}
        )

    # -- evaluation & composition ------------------------------------------

    def __call__(self, points) -> np.ndarray | complex:
        return self.evaluate(points)

    def evaluate(self, points) -> np.ndarray | complex:
        """Evaluate at one point or an array of points of shape (..., 2n)."""
        pts = np.asarray(points)
        scalar_input = pts.ndim == 1
        if pts.shape[-1] != self.space.dim:
            raise ValueError(
                f"points last axis {pts.shape[-1]} != dim {self.space.dim}"
            )
        out = np.zeros(pts.shape[:-1], dtype=complex)
        for exp, c in self._terms.items():
            term = np.full(pts.shape[:-1], c, dtype=complex)
            for i, e in enumerate(exp):
                if e:
                    term = term * pts[..., i] ** e
            out = out + term
        if scalar_input:
            return complex(out)
        return out

    def compose(self, substitutions: Sequence["PolySymbol"]) -> "PolySymbol":
        """Substitute coordinate i -> substitutions[i]; exact composition."""
        if len(substitutions) != self.space.dim:
            raise ValueError("need one substitution per coordinate")
        space = substitutions[0].space
        # powers[i][e] = substitutions[i] ** e, built on demand
        powers: list[list[PolySymbol]] = [[PolySymbol.one(space)] for _ in substitutions]
        out = PolySymbol.zero(space)
        for exp, c in self._terms.items():
            term = PolySymbol.constant(space, c)
            for i, e in enumerate(exp):
                cache = powers[i]
                while len(cache) <= e:
                    cache.append(cache[-1] * substitutions[i])
                if e:
                    term = term * cache[e]
            out = out + term
        return out

    def compose_affine(self, matrix: np.ndarray, shift: np.ndarray | None = None) -> "PolySymbol":
        """Exact pullback by the affine map rho -> matrix @ rho + shift."""
        A = np.asarray(matrix, dtype=float)
        d = self.space.dim
        if A.shape != (d, d):
            raise ValueError(f"matrix shape {A.shape} != ({d},{d})")
        b = np.zeros(d) if shift is None else np.asarray(shift, dtype=float)
        subs = []
        for i in range(d):
            terms: dict[tuple[int, ...], complex] = {}
            for j in range(d):
                if A[i, j] != 0:
                    exp = [0] * d
                    exp[j] = 1
                    terms[tuple(exp)] = A[i, j]
            if b[i] != 0:
                terms[(0,) * d] = terms.get((0,) * d, 0j) + b[i]
            subs.append(PolySymbol(self.space, terms))
        return self.compose(subs)

    # -- serialization & display -------------------------------------------

    def to_json_obj(self) -> list[dict]:
        return [
            {"exp": list(exp), "re": c.real, "im": c.imag}
            for exp, c in sorted(self._terms.items())
        ]

    @classmethod
    def from_json_obj(cls, space: PhaseSpace, obj: Iterable[dict]) -> "PolySymbol":
        terms = {}
        for rec in obj:
            terms[tuple(rec["exp"])] = complex(rec["re"], rec["im"])
        return cls(space, terms)

    def __eq__(self, other):
        if not isinstance(other, PolySymbol):
            return NotImplemented
        return self.space.n == other.space.n and self._terms == other._terms

    def __hash__(self):
        return hash((self.space.n, frozenset(self._terms.items())))

    def allclose(self, other: "PolySymbol", tol: float = 1e-12) -> bool:
        diff = self - other
        return diff.max_abs() <= tol

    def _monomial_str(self, exp) -> str:
        names = self.space.coord_names
        parts = []
        for name, e in zip(names, exp):
            if e == 1:
                parts.append(name)
            elif e > 1:
                parts.append(f"{name}**{e}")
        return "*".join(parts) if parts else "1"

    def __repr__(self):
        if not self._terms:
            return "PolySymbol(0)"
        bits = []
        for exp, c in sorted(self._terms.items())[:8]:
            bits.append(f"({c:.6g})*{self._monomial_str(exp)}")
        tail = " + ..." if len(self._terms) > 8 else ""
        return "PolySymbol(" + " + ".join(bits) + tail + ")"


def poisson_bracket(f: PolySymbol, g: PolySymbol) -> PolySymbol:
    """{f, g} under the pinned convention: sum_j (d_xi_j f d_x_j g - d_x_j f d_xi_j g).

    Anchors: {x, xi} = -1, {x**2, xi**2} = -4*x*xi, and the scaled star
    commutator i/h (f#g - g#f) has this bracket as its h^0 coefficient.
    """
    f._require_same_space(g)
    n = f.space.n
    out = PolySymbol.zero(f.space)
    for j in range(n):
        out = out + f.derivative(n + j) * g.derivative(j)
        out = out - f.derivative(j) * g.derivative(n + j)
    return out


def hamiltonian_field_apply(q: PolySymbol, g: PolySymbol) -> PolySymbol:
    """H_q(g) = {q, g}: directional derivative of g along the Hamilton field of q."""
    return poisson_bracket(q, g)


def hamiltonian_vector_field(q: PolySymbol) -> tuple[PolySymbol, ...]:
    """Components of H_q: (d_xi_1 q, ..., d_xi_n q, -d_x_1 q, ..., -d_x_n q)."""
    n = q.space.n
    return tuple(q.derivative(n + j) for j in range(n)) + tuple(
        -q.derivative(j) for j in range(n)
    )


# ---------------------------------------------------------------------------
# Regions and cutoffs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Region:
    """Working region of phase space: ball, box, or the full torus.

    Balls and boxes are simply connected; a full-torus region is not, and
    operations that require simple connectivity (one-form integration,
    corrector construction) refuse it.
    """

    kind: str
    n: int
    center: tuple[float, ...] | None = None
    radius: float | None = None
    intervals: tuple[tuple[float, float], ...] | None = None

    @classmethod
    def ball(cls, center: Sequence[float], radius: float) -> "Region":
        center = tuple(float(c) for c in center)
        if len(center) % 2:
            raise ValueError("center must have even length (2n coordinates)")
        if radius <= 0:
            raise RegionError("ball radius must be positive")
        return cls(kind="ball", n=len(center) // 2, center=center, radius=float(radius))

    @classmethod
    def box(cls, intervals: Sequence[Sequence[float]]) -> "Region":
        ivs = tuple((float(a), float(b)) for a, b in intervals)
        if len(ivs) % 2:
            raise ValueError("need an interval per coordinate (2n of them)")
        if any(a >= b for a, b in ivs):
            raise RegionError("box intervals must be nonempty")
        return cls(kind="box", n=len(ivs) // 2, intervals=ivs)

    @classmethod
    def full_torus(cls, n: int = 1) -> "Region":
        return cls(kind="full_torus", n=n)

    @property
    def dim(self) -> int:
        return 2 * self.n

    @property
    def simply_connected(self) -> bool:
        return self.kind != "full_torus"

    def require_simply_connected(self, what: str):
        if not self.simply_connected:
            raise RegionError(f"{what} requires a simply connected region, got {self.kind}")

    def bounding_box(self) -> tuple[tuple[float, float], ...]:
        if self.kind == "ball":
            return tuple(
                (c - self.radius, c + self.radius) for c in self.center
            )
        if self.kind == "box":
            return self.intervals
        return tuple((0.0, 1.0) for _ in range(self.dim))

    def contains(self, points, pad: float = 0.0) -> np.ndarray:
        """Boolean mask; pad > 0 shrinks the region by that margin."""
        pts = np.asarray(points, dtype=float)
        if self.kind == "ball":
            d = pts - np.asarray(self.center)
            return np.sqrt((d * d).sum(axis=-1)) <= self.radius - pad
        if self.kind == "box":
            ok = np.ones(pts.shape[:-1], dtype=bool)
            for i, (a, b) in enumerate(self.intervals):
                ok &= (pts[..., i] >= a + pad) & (pts[..., i] <= b - pad)
            return ok
        return np.ones(pts.shape[:-1], dtype=bool)

    def grid(self, points_per_axis: int) -> np.ndarray:
        """Uniform sample grid, shape (M, 2n).  Balls are sampled on the
        bounding box and masked; the torus grid is [0,1) without endpoint."""
        if self.kind == "full_torus":
            axes = [
                np.arange(points_per_axis) / points_per_axis
                for _ in range(self.dim)
            ]
        else:
            axes = [
                np.linspace(a, b, points_per_axis)
                for a, b in self.bounding_box()
            ]
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=-1)
        if self.kind == "ball":
            pts = pts[self.contains(pts)]
        return pts

    def center_point(self) -> np.ndarray:
        if self.kind == "ball":
            return np.asarray(self.center, dtype=float)
        if self.kind == "box":
            return np.asarray([(a + b) / 2 for a, b in self.intervals])
        return np.zeros(self.dim)


def _smoothstep3(s):
    return s * s * (3.0 - 2.0 * s)


def _smoothstep5(s):
    return s**3 * (10.0 + s * (-15.0 + 6.0 * s))


def _smoothstep9(s):
    # C^4 at both ends; used where scans need fast microlocal decay.
    return s**5 * (126.0 + s * (-420.0 + s * (540.0 + s * (-315.0 + 70.0 * s))))


def _raised_cosine(s):
    return 0.5 * (1.0 - np.cos(np.pi * s))


CUTOFF_PROFILES: dict[str, Callable] = {
    "smoothstep3": _smoothstep3,
    "smoothstep5": _smoothstep5,
    "smoothstep9": _smoothstep9,
    "raised_cosine": _raised_cosine,
}


@dataclass(frozen=True)
class Cutoff:
    """Plateau bump subordinate to a region.

    Identically 1 on the region scaled by `plateau`, 0 outside the region,
    with a piecewise-polynomial C^2 (default) transition.  On the symbolic
    backend cutoffs travel as metadata; they are sampled only on numeric
    grids.
    """

    region: Region
    profile: str = "smoothstep5"
    plateau: float = 0.5

    def __post_init__(self):
        if self.profile not in CUTOFF_PROFILES:
            raise ValueError(
                f"unknown profile {self.profile!r}; have {sorted(CUTOFF_PROFILES)}"
            )
        if not 0.0 < self.plateau < 1.0:
            raise ValueError("plateau fraction must lie in (0, 1)")
        if self.region.kind == "full_torus":
            raise RegionError("cutoff needs a ball or box support region")

    def evaluate(self, points, periodic: bool = False) -> np.ndarray:
        """Sample the cutoff; periodic=True measures distances mod 1."""
        pts = np.asarray(points, dtype=float)
        ramp = CUTOFF_PROFILES[self.profile]
        if self.region.kind == "ball":
            d = pts - np.asarray(self.region.center)
            if periodic:
                d = d - np.round(d)
            r = np.sqrt((d * d).sum(axis=-1))
            r_in = self.plateau * self.region.radius
            s = np.clip((r - r_in) / (self.region.radius - r_in), 0.0, 1.0)
            return 1.0 - ramp(s)
        out = np.ones(pts.shape[:-1])
        for i, (a, b) in enumerate(self.region.intervals):
            c = 0.5 * (a + b)
            w = 0.5 * (b - a)
            u = pts[..., i] - c
            if periodic:
                u = u - np.round(u)
            t = np.clip((np.abs(u) - self.plateau * w) / (w - self.plateau * w), 0.0, 1.0)
            out = out * (1.0 - ramp(t))
        return out

    def inner_region(self) -> Region:
        """Region where the cutoff is identically 1."""
        if self.region.kind == "ball":
            return Region.ball(self.region.center, self.plateau * self.region.radius)
        ivs = []
        for a, b in self.region.intervals:
            c, w = 0.5 * (a + b), 0.5 * (b - a)
            ivs.append((c - self.plateau * w, c + self.plateau * w))
        return Region.box(ivs)

    def __call__(self, points, periodic: bool = False) -> np.ndarray:
        return self.evaluate(points, periodic=periodic)
