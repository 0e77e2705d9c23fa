"""Finite-dimensional quantization on the unit two-torus.

The quantum model at grid size N acts on C^N with h tied to the grid,
h = 1/(2 pi N).  With omega = exp(2 pi i / N), C = diag(omega^j) and the
cyclic up-shift (S u)_j = u_{j-1}, the plane wave e_{m,n}(x, xi) =
exp(2 pi i (m x + n xi)) quantizes to

    Op(e_{m,n}) = exp(i pi m n / N) C^m S^{-n},
    i.e. (Op(e_{m,n}) u)_j = exp(i pi m n / N) omega^{j m} u_{j+n}.

Two exact identities anchor everything downstream:

* composition:  Op(e_k1) Op(e_k2) = exp(-i pi sigma / N) Op(e_{k1+k2})
  with sigma = m1 n2 - n1 m2;
* the trig star product carries the same phase at h = 1/(2 pi N):
  e_k1 # e_k2 = exp(-2 pi^2 i h sigma) e_{k1+k2},

so quantization intertwines # with matrix multiplication *without error*.
Truncating # at order K replaces the phase by its Taylor polynomial; the
composition scans measure exactly that remainder.

Symbols with full N x N frequency content (pullbacks a o kappa) bypass the
term list: they are quantized from grid samples through one FFT per matrix
diagonal, and the same route runs backwards as exact de-quantization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import ConventionError
from .flows import SymplecticMap
from .phasespace import PhaseSpace

__all__ = [
    "TorusGrid",
    "TrigSymbol",
    "star_trig",
    "poisson_bracket_trig",
    "weyl_quantize",
    "quantize_samples",
    "dequantize",
    "op_norm",
    "compose_vs_star_residual",
    "split_flow_for_trig",
]

_MAX_N = 1024


@dataclass(frozen=True)
class TorusGrid:
    """N-point discretization of the torus; fixes h = 1/(2 pi N)."""

    N: int

    def __post_init__(self):
        if not 4 <= self.N <= _MAX_N:
            raise ValueError(f"grid size must lie in [4, {_MAX_N}], got {self.N}")

    @property
    def h(self) -> float:
        return 1.0 / (2.0 * math.pi * self.N)

    def positions(self) -> np.ndarray:
        return np.arange(self.N) / self.N

    def phase_points(self) -> np.ndarray:
        """(N, N, 2) array of (x_j, xi_k) sample points."""
        x = self.positions()
        xx, ww = np.meshgrid(x, x, indexing="ij")
        return np.stack([xx, ww], axis=-1)

    def frequencies(self) -> np.ndarray:
        """Centered integer frequencies [-N/2, N/2) in FFT storage order."""
        return np.fft.fftfreq(self.N, d=1.0 / self.N).astype(int)


class TrigSymbol:
    """Finite trigonometric polynomial on the torus T^2 (n = 1).

    Terms map integer frequency pairs (m, n) to complex coefficients of
    exp(2 pi i (m x + n xi)); zeros are dropped so equality is structural.
    """

    __slots__ = ("_terms",)

    space = PhaseSpace(1)

    def __init__(self, terms: Mapping[tuple[int, int], complex] | None = None):
        clean: dict[tuple[int, int], complex] = {}
        if terms:
            for key, coeff in terms.items():
                c = complex(coeff)
                if c != 0:
                    k = (int(key[0]), int(key[1]))
                    tot = clean.get(k, 0j) + c
                    if tot == 0:
                        clean.pop(k, None)
                    else:
                        clean[k] = tot
        object.__setattr__(self, "_terms", clean)

    def __setattr__(self, *_):
        raise AttributeError("TrigSymbol is immutable")

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls) -> "TrigSymbol":
        return cls()

    @classmethod
    def constant(cls, value: complex) -> "TrigSymbol":
        return cls({(0, 0): value})

    @classmethod
    def harmonic(cls, m: int, n: int, coeff: complex = 1.0) -> "TrigSymbol":
        return cls({(m, n): coeff})

    @classmethod
    def cosine(cls, m: int, n: int, amplitude: float = 1.0) -> "TrigSymbol":
        """amplitude * cos(2 pi (m x + n xi)); real by construction."""
        return cls({(m, n): amplitude / 2.0, (-m, -n): amplitude / 2.0})

    @classmethod
    def sine(cls, m: int, n: int, amplitude: float = 1.0) -> "TrigSymbol":
        return cls({(m, n): amplitude / 2j, (-m, -n): -amplitude / 2j})

    # -- inspection ---------------------------------------------------------

    @property
    def terms(self) -> Mapping[tuple[int, int], complex]:
        from types import MappingProxyType

        return MappingProxyType(self._terms)

    @property
    def is_zero(self) -> bool:
        return not self._terms

    def max_freq(self) -> int:
        return max((max(abs(m), abs(n)) for m, n in self._terms), default=0)

    def max_abs(self) -> float:
        return max((abs(c) for c in self._terms.values()), default=0.0)

    def is_real(self, tol: float = 0.0) -> bool:
        for (m, n), c in self._terms.items():
            mirror = self._terms.get((-m, -n), 0j)
            if abs(c - mirror.conjugate()) > tol:
                return False
        return True

    # -- algebra ------------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, (int, float, complex)):
            other = TrigSymbol.constant(other)
        if not isinstance(other, TrigSymbol):
            return NotImplemented
        out = dict(self._terms)
        for k, c in other._terms.items():
            out[k] = out.get(k, 0j) + c
        return TrigSymbol(out)

    __radd__ = __add__

    def __neg__(self):
        return TrigSymbol({k: -c for k, c in self._terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, float, complex)):
            other = TrigSymbol.constant(other)
        if not isinstance(other, TrigSymbol):
            return NotImplemented
        return self.__add__(-other)

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            return TrigSymbol({k: c * other for k, c in self._terms.items()})
        if not isinstance(other, TrigSymbol):
            return NotImplemented
        out: dict[tuple[int, int], complex] = {}
        for (m1, n1), c1 in self._terms.items():
            for (m2, n2), c2 in other._terms.items():
                k = (m1 + m2, n1 + n2)
                out[k] = out.get(k, 0j) + c1 * c2
        return TrigSymbol(out)

    __rmul__ = __mul__

    def conjugate(self) -> "TrigSymbol":
        return TrigSymbol(
            {(-m, -n): c.conjugate() for (m, n), c in self._terms.items()})

    def derivative(self, index: int) -> "TrigSymbol":
        """d/dx (index 0) or d/dxi (index 1)."""
        if index not in (0, 1):
            raise ValueError("torus symbols have coordinates x (0) and xi (1)")
        return TrigSymbol({
            (m, n): c * (2j * math.pi) * (m if index == 0 else n)
            for (m, n), c in self._terms.items()
        })

    def evaluate(self, points) -> np.ndarray | complex:
        pts = np.asarray(points, dtype=float)
        single = pts.ndim == 1
        if pts.shape[-1] != 2:
            raise ValueError("points must have a trailing axis of length 2")
        out = np.zeros(pts.shape[:-1], dtype=complex)
        for (m, n), c in self._terms.items():
            out += c * np.exp(2j * math.pi * (m * pts[..., 0] + n * pts[..., 1]))
        if single:
            return complex(out)
        return out

    def __call__(self, points):
        return self.evaluate(points)

    def allclose(self, other: "TrigSymbol", tol: float = 1e-12) -> bool:
        return (self - other).max_abs() <= tol

    def __eq__(self, other):
        if not isinstance(other, TrigSymbol):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def __repr__(self):
        if not self._terms:
            return "TrigSymbol(0)"
        bits = [f"({c:.4g})*e[{m},{n}]"
                for (m, n), c in sorted(self._terms.items())[:6]]
        tail = " + ..." if len(self._terms) > 6 else ""
        return "TrigSymbol(" + " + ".join(bits) + tail + ")"


# ---------------------------------------------------------------------------
# star product and bracket on trig symbols
# ---------------------------------------------------------------------------


def _sigma(k1: tuple[int, int], k2: tuple[int, int]) -> int:
    return k1[0] * k2[1] - k1[1] * k2[0]


def _phase_factor(h: float, sigma: int, trunc: int | None) -> complex:
    full = -2j * math.pi ** 2 * h * sigma
    if trunc is None:
        return complex(np.exp(full))
    out = 0j
    term = 1.0 + 0j
    for k in range(trunc + 1):
        if k:
            term = term * full / k
        out += term
    return out


def star_trig(a: TrigSymbol, b: TrigSymbol, h: float,
              trunc: int | None = None) -> TrigSymbol:
    """a # b on the torus.  trunc=None gives the exact product (the full
    phase exp(-2 pi^2 i h sigma) per frequency pair); an integer K keeps the
    Taylor polynomial of that phase through h^K, which is the K-truncated
    Weyl star applied to trig symbols."""
    out: dict[tuple[int, int], complex] = {}
    for k1, c1 in a.terms.items():
        for k2, c2 in b.terms.items():
            key = (k1[0] + k2[0], k1[1] + k2[1])
            val = c1 * c2 * _phase_factor(h, _sigma(k1, k2), trunc)
            out[key] = out.get(key, 0j) + val
    return TrigSymbol(out)


def poisson_bracket_trig(f: TrigSymbol, g: TrigSymbol) -> TrigSymbol:
    """{f, g} under the pinned convention; for plane waves
    {e_k1, e_k2} = 4 pi^2 sigma(k1, k2) e_{k1+k2}."""
    out: dict[tuple[int, int], complex] = {}
    for k1, c1 in f.terms.items():
        for k2, c2 in g.terms.items():
            s = _sigma(k1, k2)
            if s:
                key = (k1[0] + k2[0], k1[1] + k2[1])
                out[key] = out.get(key, 0j) + 4.0 * math.pi ** 2 * s * c1 * c2
    return TrigSymbol(out)


# ---------------------------------------------------------------------------
# quantization
# ---------------------------------------------------------------------------


def _check_band(max_freq: int, N: int):
    if max_freq >= N // 2:
        raise ConventionError(
            f"frequency {max_freq} reaches the Nyquist band of an N={N} grid; "
            "aliasing would silently corrupt the operator")


def weyl_quantize(symbol: TrigSymbol, grid: TorusGrid) -> np.ndarray:
    """Matrix of Op(symbol), assembled one term at a time."""
    N = grid.N
    _check_band(symbol.max_freq(), N)
    j = np.arange(N)
    out = np.zeros((N, N), dtype=complex)
    for (m, n), c in symbol.terms.items():
        vals = c * np.exp(1j * math.pi * m * n / N) * np.exp(2j * math.pi * m * j / N)
        out[j, (j + n) % N] += vals
    return out


def quantize_samples(values: np.ndarray, grid: TorusGrid) -> np.ndarray:
    """Quantize a symbol given by samples f(x_j, xi_k) on the N x N grid.

    Frequencies are read off with a 2-D FFT over the centered band
    [-N/2, N/2)^2; each matrix diagonal then comes from one inverse FFT.
    Exact for band-limited symbols, spectrally accurate for smooth ones.
    """
    N = grid.N
    vals = np.asarray(values, dtype=complex)
    if vals.shape != (N, N):
        raise ValueError(f"need samples on the ({N}, {N}) grid, got {vals.shape}")
    coeffs = np.fft.fft2(vals) / (N * N)  # c[m, n] in FFT storage order
    freqs = grid.frequencies()
    # gamma[m, n] = c[m, n] * exp(i pi m n / N) with centered m, n
    gamma = coeffs * np.exp(1j * math.pi * np.outer(freqs, freqs) / N)
    # diagonal n holds d_n[j] = sum_m gamma[m, n] omega^{j m} = N * ifft over m
    diags = N * np.fft.ifft(gamma, axis=0)  # [j, n]
    out = np.zeros((N, N), dtype=complex)
    j = np.arange(N)
    for idx, n in enumerate(freqs):
        out[j, (j + n) % N] = diags[:, idx]
    return out


def dequantize(matrix: np.ndarray, grid: TorusGrid) -> np.ndarray:
    """Exact inverse of `quantize_samples`: symbol samples on the N x N grid."""
    N = grid.N
    A = np.asarray(matrix, dtype=complex)
    if A.shape != (N, N):
        raise ValueError(f"need an ({N}, {N}) matrix, got {A.shape}")
    freqs = grid.frequencies()
    j = np.arange(N)
    diags = np.empty((N, N), dtype=complex)  # [j, n-index]
    for idx, n in enumerate(freqs):
        diags[:, idx] = A[j, (j + n) % N]
    gamma = np.fft.fft(diags, axis=0) / N
    coeffs = gamma * np.exp(-1j * math.pi * np.outer(freqs, freqs) / N)
    return np.fft.ifft2(coeffs) * (N * N)


def trig_from_samples(values: np.ndarray, grid: TorusGrid,
                      tol: float = 0.0) -> TrigSymbol:
    """Interpolating trig polynomial of grid samples (centered band)."""
    N = grid.N
    coeffs = np.fft.fft2(np.asarray(values, dtype=complex)) / (N * N)
    freqs = grid.frequencies()
    terms = {}
    for a, m in enumerate(freqs):
        for b, n in enumerate(freqs):
            c = coeffs[a, b]
            if abs(c) > tol:
                terms[(m, n)] = c
    return TrigSymbol(terms)


def op_norm(A: np.ndarray) -> float:
    """Spectral norm (largest singular value)."""
    return float(np.linalg.svd(np.asarray(A), compute_uv=False)[0])


def compose_vs_star_residual(a: TrigSymbol, b: TrigSymbol, grid: TorusGrid,
                             trunc: int | None) -> float:
    """|| Op(a) Op(b) - Op(a #_K b) || / (||Op(a)|| ||Op(b)||).

    Zero to rounding for trunc=None; for finite K the residual is the
    Taylor remainder of the composition phases, O(h^{K+1})."""
    A = weyl_quantize(a, grid)
    B = weyl_quantize(b, grid)
    C = weyl_quantize(star_trig(a, b, grid.h, trunc), grid)
    denom = op_norm(A) * op_norm(B)
    if denom == 0.0:
        return 0.0
    return op_norm(A @ B - C) / denom


# ---------------------------------------------------------------------------
# classical flows for separable trig Hamiltonians
# ---------------------------------------------------------------------------


def separable_parts(q: TrigSymbol) -> tuple[TrigSymbol, TrigSymbol]:
    """Split q = V(x) + T(xi); raises if any term mixes x and xi."""
    v_terms, t_terms = {}, {}
    for (m, n), c in q.terms.items():
        if m and n:
            raise ValueError(
                f"term e[{m},{n}] mixes x and xi; splitting needs V(x) + T(xi)")
        if n == 0:
            v_terms[(m, n)] = c
        else:
            t_terms[(m, n)] = c
    return TrigSymbol(v_terms), TrigSymbol(t_terms)


def _axis_callables(sym: TrigSymbol, axis: int):
    """grad/Hessian callables (on the 1-d block) for an axis-only symbol."""
    d1 = sym.derivative(axis)
    d2 = d1.derivative(axis)

    def at(u, s):
        pts = np.zeros(u.shape[:-1] + (2,))
        pts[..., axis] = u[..., 0]
        return s.evaluate(pts).real

    def grad(u):
        return at(u, d1)[..., None]

    def hess(u):
        return at(u, d2)[..., None, None]

    return grad, hess


def split_flow_for_trig(q: TrigSymbol, time: float, steps: int,
                        order: int = 4) -> SymplecticMap:
    """Classical flow of a separable trig Hamiltonian by exact-kick splitting."""
    V, T = separable_parts(q)
    if not (V.is_real(1e-12) and T.is_real(1e-12)):
        raise ValueError("flow needs a real Hamiltonian")
    v_grad, v_hess = _axis_callables(V, 0)
    t_grad, t_hess = _axis_callables(T, 1)
    return SymplecticMap.split_flow(
        PhaseSpace(1), v_grad, v_hess, t_grad, t_hess, time, steps, order)
