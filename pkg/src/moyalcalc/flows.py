"""Classical side: symplectic maps and Hamiltonian flows.

A `SymplecticMap` bundles forward/inverse point maps with a Jacobian.  Affine
maps keep their (matrix, shift) data and pull polynomials back exactly; flow
maps integrate Hamilton's equations

    x' = d_xi q,   xi' = -d_x q

with the implicit midpoint rule; the tangent map is advanced by the matching
Cayley update, which keeps the numerical Jacobian symplectic to rounding even
at coarse steps.  Separable Hamiltonians V(x) + T(xi) get an exact-kick
splitting integrator (order 2 or 4) instead.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

from .phasespace import PhaseSpace, PolySymbol, hamiltonian_vector_field

__all__ = [
    "SymplecticMap",
    "symplectic_defect",
]

_MIDPOINT_TOL = 1e-13
_MIDPOINT_MAX_ITER = 60


def _as_points(points, dim: int) -> tuple[np.ndarray, bool]:
    pts = np.asarray(points, dtype=float)
    single = pts.ndim == 1
    if pts.shape[-1] != dim:
        raise ValueError(f"points last axis {pts.shape[-1]} != dim {dim}")
    return (pts[None, :] if single else pts), single


def symplectic_defect(matrix: np.ndarray, omega: np.ndarray) -> float:
    """max |L^T Omega L - Omega|, elementwise over any batch of matrices."""
    L = np.asarray(matrix, dtype=float)
    d = np.swapaxes(L, -1, -2) @ omega @ L - omega
    return float(np.abs(d).max())


def _poly_field(q: PolySymbol):
    comps = hamiltonian_vector_field(q)
    n2 = q.space.dim

    def field(pts):
        return np.stack([c.evaluate(pts).real for c in comps], axis=-1)

    rows = [[comps[i].derivative(j) for j in range(n2)] for i in range(n2)]

    def field_jac(pts):
        out = np.empty(pts.shape[:-1] + (n2, n2))
        for i in range(n2):
            for j in range(n2):
                out[..., i, j] = rows[i][j].evaluate(pts).real
        return out

    return field, field_jac


def _midpoint_integrate(field, field_jac, pts, time, steps, with_jac):
    d = pts.shape[-1]
    dt = time / steps
    J = None
    if with_jac:
        J = np.broadcast_to(np.eye(d), pts.shape[:-1] + (d, d)).copy()
    eye = np.eye(d)
    for _ in range(steps):
        m = pts + 0.5 * dt * field(pts)
        for _ in range(_MIDPOINT_MAX_ITER):
            m_new = pts + 0.5 * dt * field(m)
            shift = np.abs(m_new - m).max()
            m = m_new
            if shift < _MIDPOINT_TOL * (1.0 + np.abs(m).max()):
                break
        else:
            raise RuntimeError(
                f"implicit midpoint iteration stalled at dt={dt:.3g}; "
                "increase steps")
        if with_jac:
            A = field_jac(m)
            rhs = (eye + 0.5 * dt * A) @ J
            J = np.linalg.solve(eye - 0.5 * dt * A, rhs)
        pts = 2.0 * m - pts
    return pts, J


def _kick_pair(v_grad, v_hess, t_grad, t_hess, n):
    """Exact elementary maps for q = V(x) + T(xi):

    a V-kick of duration s moves xi by -s grad V(x); a T-drift moves x by
    +s grad T(xi).  Both have closed-form symplectic Jacobians.
    """

    def kick(pts, s, J):
        x, xi = pts[..., :n], pts[..., n:]
        new = np.concatenate([x, xi - s * v_grad(x)], axis=-1)
        if J is not None:
            blk = np.broadcast_to(np.eye(2 * n), pts.shape[:-1] + (2 * n, 2 * n)).copy()
            blk[..., n:, :n] = -s * v_hess(x)
            J = blk @ J
        return new, J

    def drift(pts, s, J):
        x, xi = pts[..., :n], pts[..., n:]
        new = np.concatenate([x + s * t_grad(xi), xi], axis=-1)
        if J is not None:
            blk = np.broadcast_to(np.eye(2 * n), pts.shape[:-1] + (2 * n, 2 * n)).copy()
            blk[..., :n, n:] = s * t_hess(xi)
            J = blk @ J
        return new, J

    return kick, drift


# Suzuki-Yoshida composition weights for the order-4 splitting.
_YOSHIDA_W1 = 1.0 / (2.0 - 2.0 ** (1.0 / 3.0))
_YOSHIDA_W0 = 1.0 - 2.0 * _YOSHIDA_W1


class SymplecticMap:
    """Phase-space diffeomorphism with inverse and tangent map.

    Instances are immutable; composition and inversion return new maps.
    Affine instances additionally expose exact (matrix, shift) data and
    exact polynomial pullbacks.
    """

    __slots__ = ("space", "_forward", "_inverse", "_jacobian", "matrix", "shift")

    def __init__(self, space: PhaseSpace, forward, inverse=None, jacobian=None,
                 matrix=None, shift=None):
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "_forward", forward)
        object.__setattr__(self, "_inverse", inverse)
        object.__setattr__(self, "_jacobian", jacobian)
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "shift", shift)

    def __setattr__(self, *_):
        raise AttributeError("SymplecticMap is immutable")

    # -- constructors -------------------------------------------------------

    @classmethod
    def identity(cls, space: PhaseSpace) -> "SymplecticMap":
        return cls.linear(np.eye(space.dim), space=space)

    @classmethod
    def linear(cls, matrix, shift=None, space: PhaseSpace | None = None,
               tol: float = 1e-10) -> "SymplecticMap":
        """Affine map rho -> L rho + c.  L must satisfy L^T Omega L = Omega."""
        L = np.asarray(matrix, dtype=float)
        if L.ndim != 2 or L.shape[0] != L.shape[1] or L.shape[0] % 2:
            raise ValueError(f"need a square even-dimensional matrix, got {L.shape}")
        space = space or PhaseSpace(L.shape[0] // 2)
        omega = space.omega_matrix()
        defect = symplectic_defect(L, omega)
        if defect > tol:
            raise ValueError(
                f"matrix is not symplectic: |L^T Omega L - Omega| = {defect:.3g}")
        c = np.zeros(space.dim) if shift is None else np.asarray(shift, dtype=float)
        if c.shape != (space.dim,):
            raise ValueError(f"shift shape {c.shape} != ({space.dim},)")
        return cls(space,
                   forward=lambda pts: pts @ L.T + c,
                   inverse=None,  # built on demand from (L, c)
                   jacobian=None,
                   matrix=L, shift=c)

    @classmethod
    def from_callables(cls, space: PhaseSpace, forward: Callable,
                       inverse: Callable | None = None,
                       jacobian: Callable | None = None) -> "SymplecticMap":
        return cls(space, forward, inverse, jacobian)

    @classmethod
    def flow(cls, q: PolySymbol, time: float, steps: int | None = None) -> "SymplecticMap":
        """Time-`time` Hamiltonian flow of a polynomial Hamiltonian.

        Implicit midpoint with `steps` fixed steps (default resolves the
        interval at dt <= 1/256).  The imaginary part of q is ignored.
        """
        space = q.space
        field, field_jac = _poly_field(q)
        if steps is None:
            steps = max(16, int(math.ceil(abs(time) * 256.0)))

        def forward(pts):
            out, _ = _midpoint_integrate(field, field_jac, pts, time, steps, False)
            return out

        def inverse(pts):
            out, _ = _midpoint_integrate(field, field_jac, pts, -time, steps, False)
            return out

        def jacobian(pts):
            _, J = _midpoint_integrate(field, field_jac, pts, time, steps, True)
            return J

        return cls(space, forward, inverse, jacobian)

    @classmethod
    def split_flow(cls, space: PhaseSpace, v_grad, v_hess, t_grad, t_hess,
                   time: float, steps: int, order: int = 4) -> "SymplecticMap":
        """Flow of the separable Hamiltonian q = V(x) + T(xi) by exact-kick
        splitting.  The gradient/Hessian callables act on the x (resp. xi)
        block alone, shapes (..., n) -> (..., n) and (..., n, n)."""
        if order not in (2, 4):
            raise ValueError("splitting order must be 2 or 4")
        n = space.n
        kick, drift = _kick_pair(v_grad, v_hess, t_grad, t_hess, n)

        def strang(pts, s, J):
            pts, J = kick(pts, 0.5 * s, J)
            pts, J = drift(pts, s, J)
            pts, J = kick(pts, 0.5 * s, J)
            return pts, J

        def step(pts, s, J):
            if order == 2:
                return strang(pts, s, J)
            pts, J = strang(pts, _YOSHIDA_W1 * s, J)
            pts, J = strang(pts, _YOSHIDA_W0 * s, J)
            pts, J = strang(pts, _YOSHIDA_W1 * s, J)
            return pts, J

        def run(pts, total, with_jac):
            J = None
            if with_jac:
                J = np.broadcast_to(
                    np.eye(2 * n), pts.shape[:-1] + (2 * n, 2 * n)).copy()
            dt = total / steps
            for _ in range(steps):
                pts, J = step(pts, dt, J)
            return pts, J

        return cls(space,
                   forward=lambda pts: run(pts, time, False)[0],
                   inverse=lambda pts: run(pts, -time, False)[0],
                   jacobian=lambda pts: run(pts, time, True)[1])

    # -- structure ----------------------------------------------------------

    @property
    def is_affine(self) -> bool:
        return self.matrix is not None

    def __call__(self, points):
        pts, single = _as_points(points, self.space.dim)
        out = self._forward(pts)
        return out[0] if single else out

    def inverse(self) -> "SymplecticMap":
        if self.is_affine:
            Linv = np.linalg.inv(self.matrix)
            return SymplecticMap.linear(Linv, -Linv @ self.shift, space=self.space)
        if self._inverse is None:
            raise ValueError("map carries no inverse")
        return SymplecticMap(self.space, self._inverse, self._forward,
                             self._jacobian and self._inverse_jacobian)

    def _inverse_jacobian(self, pts):
        back = self._inverse(pts)
        return np.linalg.inv(self._jacobian(back))

    def then(self, other: "SymplecticMap") -> "SymplecticMap":
        """Composite doing `self` first, then `other` (other o self)."""
        if self.space.n != other.space.n:
            raise ValueError("maps live on different phase spaces")
        if self.is_affine and other.is_affine:
            return SymplecticMap.linear(
                other.matrix @ self.matrix,
                other.matrix @ self.shift + other.shift,
                space=self.space)

        def forward(pts):
            return other._forward(self._forward(pts))

        inverse = None
        if (self._inverse or self.is_affine) and (other._inverse or other.is_affine):
            self_inv = self.inverse()
            other_inv = other.inverse()

            def inverse(pts):
                return self_inv._forward(other_inv._forward(pts))

        jacobian = None
        if (self._jacobian or self.is_affine) and (other._jacobian or other.is_affine):

            def jacobian(pts):
                mid = self._forward(pts)
                return other.jacobian(mid) @ self.jacobian(pts)

        return SymplecticMap(self.space, forward, inverse, jacobian)

    def jacobian(self, points) -> np.ndarray:
        pts, single = _as_points(points, self.space.dim)
        if self._jacobian is not None:
            J = self._jacobian(pts)
        elif self.is_affine:
            J = np.broadcast_to(
                self.matrix, pts.shape[:-1] + self.matrix.shape).copy()
        else:
            raise ValueError("map carries no Jacobian")
        return J[0] if single else J

    def max_symplectic_defect(self, points) -> float:
        """max |J^T Omega J - Omega| over the sample points."""
        J = self.jacobian(points)
        return symplectic_defect(J, self.space.omega_matrix())

    # -- pullback -----------------------------------------------------------

    def pullback(self, p: PolySymbol) -> PolySymbol:
        """p o (this map), exactly.  Affine maps only; anything else has no
        polynomial pullback."""
        if not self.is_affine:
            raise ValueError("exact pullback needs an affine map")
        return p.compose_affine(self.matrix, self.shift)

    def push(self, p: PolySymbol) -> PolySymbol:
        """p o (inverse map), exactly (affine maps only)."""
        inv = self.inverse()
        return inv.pullback(p)

    def __repr__(self):
        if self.is_affine:
            off = "" if not self.shift.any() else ", affine"
            return f"SymplecticMap(linear {self.matrix.shape[0]}x{self.matrix.shape[1]}{off})"
        return f"SymplecticMap(n={self.space.n}, callable)"
