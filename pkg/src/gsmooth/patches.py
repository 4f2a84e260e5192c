"""Tensor-product Bezier patches on the unit square.

A patch of bidegree (p, q) maps [0,1]^2 into R^d (d in {1,2,3}) and is stored
as a (p+1) x (q+1) x d control net.  Everything here is exact polynomial
arithmetic: evaluation uses convex Bernstein recurrences, differentiation uses
control-net differencing, so downstream jet extraction carries no truncation
error.  Patches are immutable after construction and safe to share.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ContractError, DomainError

#: slack allowed when checking that a parameter lies in [0,1]
DOMAIN_TOL = 1e-12


def bernstein_values(degree: int, x: float) -> np.ndarray:
    """All Bernstein basis values B_{i,degree}(x), i = 0..degree.

    Built with the triangular convex recurrence; exact for degree 0 and stable
    for x in [0,1].  The recurrence is also valid (if no longer convex) for x
    outside the unit interval, which chart-extended evaluations rely on.
    """
    b = np.zeros(degree + 1)
    b[0] = 1.0
    for d in range(1, degree + 1):
        for i in range(d, 0, -1):
            b[i] = x * b[i - 1] + (1.0 - x) * b[i]
        b[0] = (1.0 - x) * b[0]
    return b


def bernstein_derivative_row(degree: int, order: int, x: float) -> np.ndarray:
    """Row w such that f^(order)(x) = w @ b for Bernstein coefficients b.

    Uses the exact identity  f^(r)(x) = degree!/(degree-r)! * sum_j
    B_{j,degree-r}(x) * (forward difference of order r of b starting at j);
    differentiating past the degree gives the zero row.
    """
    w = np.zeros(degree + 1)
    if order > degree:
        return w
    scale = math.factorial(degree) / math.factorial(degree - order)
    lower = bernstein_values(degree - order, x)
    for j in range(degree - order + 1):
        for i in range(order + 1):
            w[j + i] += scale * lower[j] * ((-1) ** (order - i)) * math.comb(order, i)
    return w


def chebyshev_sites(count: int) -> np.ndarray:
    """`count` distinct interpolation sites in (0,1), Chebyshev-distributed."""
    j = np.arange(count)
    return 0.5 + 0.5 * np.cos(np.pi * (2 * j + 1) / (2 * count))


def interpolate_bernstein(sites: np.ndarray, values: np.ndarray, degree: int) -> np.ndarray:
    """Bernstein coefficients of the degree-`degree` interpolant of the data.

    Exact whenever the sampled function is a polynomial of degree <= `degree`.
    Requires len(sites) == degree + 1 with distinct sites.
    """
    sites = np.asarray(sites, dtype=float)
    if sites.shape[0] != degree + 1:
        raise ContractError(
            f"need {degree + 1} sites for degree {degree}, got {sites.shape[0]}"
        )
    vand = np.vstack([bernstein_values(degree, s) for s in sites])
    return np.linalg.solve(vand, np.asarray(values, dtype=float))


class EdgeId(Enum):
    """One of the four sides of the unit square.

    Each side carries a canonical parameterization ``e(s)`` (the free
    coordinate runs with s, the fixed one stays at 0 or 1) and an affine
    edge-adapted chart (t, v): t is the signed inward-normal parameter
    (t = 0 on the edge, t > 0 inside the square) and v the edge parameter.
    """

    U0 = "u=0"
    U1 = "u=1"
    V0 = "v=0"
    V1 = "v=1"

    def point(self, s: float) -> np.ndarray:
        """The edge parameterization e(s)."""
        return self.from_local(0.0, s)

    def tangent(self) -> np.ndarray:
        """d e(s) / ds, constant along the edge."""
        if self in (EdgeId.U0, EdgeId.U1):
            return np.array([0.0, 1.0])
        return np.array([1.0, 0.0])

    def inward_normal(self) -> np.ndarray:
        """Unit normal pointing into the square."""
        return {
            EdgeId.U0: np.array([1.0, 0.0]),
            EdgeId.U1: np.array([-1.0, 0.0]),
            EdgeId.V0: np.array([0.0, 1.0]),
            EdgeId.V1: np.array([0.0, -1.0]),
        }[self]

    def chart(self) -> tuple[np.ndarray, np.ndarray]:
        """(A, b) with (t, v) = A @ (u1, u2) + b.  A is orthogonal for all
        four sides, so the inverse chart is u = A.T @ ((t, v) - b)."""
        if self is EdgeId.U0:
            return np.array([[1.0, 0.0], [0.0, 1.0]]), np.array([0.0, 0.0])
        if self is EdgeId.U1:
            return np.array([[-1.0, 0.0], [0.0, 1.0]]), np.array([1.0, 0.0])
        if self is EdgeId.V0:
            return np.array([[0.0, 1.0], [1.0, 0.0]]), np.array([0.0, 0.0])
        return np.array([[0.0, -1.0], [1.0, 0.0]]), np.array([1.0, 0.0])

    def to_local(self, u) -> np.ndarray:
        A, b = self.chart()
        return A @ np.asarray(u, dtype=float) + b

    def from_local(self, t: float, v: float) -> np.ndarray:
        A, b = self.chart()
        return A.T @ (np.array([float(t), float(v)]) - b)


def _check_param(u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.shape != (2,):
        raise ContractError(f"parameter point must have shape (2,), got {u.shape}")
    if np.any(u < -DOMAIN_TOL) or np.any(u > 1.0 + DOMAIN_TOL):
        raise DomainError(f"parameter point {u} outside [0,1]^2")
    return np.clip(u, 0.0, 1.0)


@dataclass(frozen=True)
class TensorPatch:
    """Immutable tensor-product Bezier patch.

    control_net has shape (p+1, q+1, d); entry [i, j] is the control point
    with Bernstein weights B_{i,p}(u1) * B_{j,q}(u2).
    """

    control_net: np.ndarray

    def __post_init__(self):
        net = np.array(self.control_net, dtype=float)
        if net.ndim != 3:
            raise ContractError(f"control net must be 3-d, got ndim={net.ndim}")
        if net.shape[2] not in (1, 2, 3):
            raise ContractError(f"output dimension must be 1, 2 or 3, got {net.shape[2]}")
        if not np.all(np.isfinite(net)):
            raise ContractError("control net contains non-finite coordinates")
        net.flags.writeable = False
        object.__setattr__(self, "control_net", net)

    @property
    def degree_u(self) -> int:
        return self.control_net.shape[0] - 1

    @property
    def degree_v(self) -> int:
        return self.control_net.shape[1] - 1

    @property
    def out_dim(self) -> int:
        return self.control_net.shape[2]

    def eval(self, u) -> np.ndarray:
        """Value at parameter u in [0,1]^2 (convex Bernstein combination)."""
        u = _check_param(u)
        wu = bernstein_values(self.degree_u, u[0])
        wv = bernstein_values(self.degree_v, u[1])
        return np.einsum("i,ijd,j->d", wu, self.control_net, wv)

    def eval_grid(self, su: np.ndarray, sv: np.ndarray) -> np.ndarray:
        """Values on the tensor grid su x sv, shape (len(su), len(sv), d)."""
        cu = np.vstack([bernstein_values(self.degree_u, x) for x in np.asarray(su, float)])
        cv = np.vstack([bernstein_values(self.degree_v, x) for x in np.asarray(sv, float)])
        return np.einsum("ai,ijd,bj->abd", cu, self.control_net, cv)

    def partial_derivative_patch(self, du: int, dv: int) -> "TensorPatch":
        """Exact derivative patch d^(du+dv) / du1^du du2^dv.

        Differencing the control net; differentiating past the degree in
        either direction yields the zero patch of bidegree (0, 0).
        """
        if du < 0 or dv < 0:
            raise ContractError("derivative orders must be nonnegative")
        if du > self.degree_u or dv > self.degree_v:
            return TensorPatch(np.zeros((1, 1, self.out_dim)))
        net = self.control_net
        for _ in range(du):
            p = net.shape[0] - 1
            net = p * (net[1:] - net[:-1])
        for _ in range(dv):
            q = net.shape[1] - 1
            net = q * (net[:, 1:] - net[:, :-1])
        return TensorPatch(net)

    def elevate(self, p_new: int, q_new: int) -> "TensorPatch":
        """Same map re-expressed at bidegree (p_new, q_new) >= (p, q)."""
        if p_new < self.degree_u or q_new < self.degree_v:
            raise ContractError(
                f"cannot reduce bidegree ({self.degree_u},{self.degree_v}) "
                f"to ({p_new},{q_new})"
            )
        net = self.control_net
        while net.shape[0] - 1 < p_new:
            net = _elevate_axis(net)
        while net.shape[1] - 1 < q_new:
            net = _elevate_axis(net.transpose(1, 0, 2)).transpose(1, 0, 2)
        return TensorPatch(net)

    def edge_trace(self, edge: EdgeId, s: float) -> np.ndarray:
        """Value along the named side at edge parameter s: eval(e(s))."""
        if s < -DOMAIN_TOL or s > 1.0 + DOMAIN_TOL:
            raise DomainError(f"edge parameter {s} outside [0,1]")
        return self.eval(edge.point(float(np.clip(s, 0.0, 1.0))))

    def edge_degrees(self, edge: EdgeId) -> tuple[int, int]:
        """(normal degree, tangent degree) relative to the given side."""
        if edge in (EdgeId.U0, EdgeId.U1):
            return self.degree_u, self.degree_v
        return self.degree_v, self.degree_u

    def edge_rows(self, edge: EdgeId) -> np.ndarray:
        """Control net reindexed so axis 0 counts rows away from `edge`.

        Row r of the result is the r-th control row measured from the side,
        with the column index running along the side's canonical v direction;
        the patch in edge-local coordinates (t, v) has exactly this net.
        """
        net = self.control_net
        if edge is EdgeId.U0:
            return net
        if edge is EdgeId.U1:
            return net[::-1]
        if edge is EdgeId.V0:
            return net.transpose(1, 0, 2)
        return net.transpose(1, 0, 2)[::-1]

    @staticmethod
    def from_edge_rows(rows: np.ndarray, edge: EdgeId) -> "TensorPatch":
        """Inverse of :meth:`edge_rows`."""
        rows = np.asarray(rows, dtype=float)
        if edge is EdgeId.U0:
            return TensorPatch(rows)
        if edge is EdgeId.U1:
            return TensorPatch(rows[::-1])
        if edge is EdgeId.V0:
            return TensorPatch(rows.transpose(1, 0, 2))
        return TensorPatch(rows[::-1].transpose(1, 0, 2))

    @staticmethod
    def constant(value, degree_u: int = 1, degree_v: int = 1) -> "TensorPatch":
        value = np.atleast_1d(np.asarray(value, dtype=float))
        net = np.tile(value, (degree_u + 1, degree_v + 1, 1))
        return TensorPatch(net)

    @staticmethod
    def identity(degree_u: int = 1, degree_v: int = 1) -> "TensorPatch":
        """The patch realizing (u1, u2) -> (u1, u2)."""
        gu = np.linspace(0.0, 1.0, degree_u + 1)
        gv = np.linspace(0.0, 1.0, degree_v + 1)
        net = np.stack(np.meshgrid(gu, gv, indexing="ij"), axis=-1)
        return TensorPatch(net)


def _elevate_axis(net: np.ndarray) -> np.ndarray:
    """Raise the degree along axis 0 by one (convex corner-cutting formula)."""
    p = net.shape[0] - 1
    out = np.zeros((p + 2,) + net.shape[1:])
    out[0] = net[0]
    out[p + 1] = net[p]
    for i in range(1, p + 1):
        a = i / (p + 1)
        out[i] = a * net[i - 1] + (1.0 - a) * net[i]
    return out
