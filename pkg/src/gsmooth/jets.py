"""Truncated multivariate Taylor jets.

A jet of order k is the Taylor expansion of a map R^m -> R^d at a base point,
truncated after total degree k.  Coefficients are stored *Taylor-normalized*
(partial derivative divided by the factorial of the multi-index), densely, in
graded-lexicographic multi-index order.  With that normalization composition
is pure truncated power-series substitution and needs no factorial
bookkeeping.

The algebra is generic in m and d; only extraction is tied to tensor-product
Bezier patches.  Jets are immutable values and all operations are pure
functions, so everything here is safe for concurrent use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import ContractError, SingularJacobianError, UnsupportedOrderError
from .patches import TensorPatch, bernstein_derivative_row, _check_param

#: largest supported jet order; bounds table sizes and keeps composition cheap
MAX_ORDER = 4

#: tolerance for matching an outer jet's base point to an inner jet's value
BASE_POINT_TOL = 1e-9

#: Jacobian determinant threshold below which inversion is refused
SINGULAR_DET_TOL = 1e-12


@lru_cache(maxsize=None)
def multi_indices(dim: int, order: int) -> tuple[tuple[int, ...], ...]:
    """All exponent tuples alpha with |alpha| <= order, graded-lex ordered.

    Grading first (total degree ascending), plain tuple order within a grade:
    for dim=2, order=2 this is (0,0), (0,1), (1,0), (0,2), (1,1), (2,0).
    """
    if dim < 1 or order < 0:
        raise ContractError(f"bad multi-index table request dim={dim} order={order}")
    out: list[tuple[int, ...]] = []
    for total in range(order + 1):
        out.extend(sorted(_compositions(total, dim)))
    return tuple(out)


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


@lru_cache(maxsize=None)
def _index_of(dim: int, order: int) -> dict:
    return {a: i for i, a in enumerate(multi_indices(dim, order))}


@lru_cache(maxsize=None)
def _product_table(dim: int, order: int):
    """Index triples (ia, ib, iout) of all monomial products that survive
    truncation, for vectorized truncated multiplication."""
    idx = _index_of(dim, order)
    ia, ib, iout = [], [], []
    for a, i in idx.items():
        for b, j in idx.items():
            s = tuple(x + y for x, y in zip(a, b))
            if sum(s) <= order:
                ia.append(i)
                ib.append(j)
                iout.append(idx[s])
    return np.array(ia), np.array(ib), np.array(iout)


def truncated_product(dim: int, order: int, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Coefficients of (a * b) with all terms of degree > order dropped."""
    ia, ib, iout = _product_table(dim, order)
    out = np.zeros(len(multi_indices(dim, order)))
    np.add.at(out, iout, a[ia] * b[ib])
    return out


def _check_order(k: int) -> int:
    if k < 0:
        raise ContractError(f"jet order must be >= 0, got {k}")
    if k > MAX_ORDER:
        raise UnsupportedOrderError(f"jet order {k} exceeds supported maximum {MAX_ORDER}")
    return int(k)


@dataclass(frozen=True)
class Jet:
    """Order-k Taylor jet of a map R^m -> R^d at `base_point`.

    coeffs has shape (binomial(m+k, k), d); row i holds, for every output
    component, the Taylor coefficient of the monomial multi_indices(m, k)[i]
    (that is, the partial derivative divided by alpha!).
    """

    order: int
    in_dim: int
    out_dim: int
    base_point: np.ndarray = field()
    coeffs: np.ndarray = field()

    def __post_init__(self):
        _check_order(self.order)
        base = np.array(self.base_point, dtype=float).reshape(self.in_dim)
        coeffs = np.array(self.coeffs, dtype=float)
        n_mono = len(multi_indices(self.in_dim, self.order))
        if coeffs.shape != (n_mono, self.out_dim):
            raise ContractError(
                f"coefficient table must have shape ({n_mono}, {self.out_dim}), "
                f"got {coeffs.shape}"
            )
        if not (np.all(np.isfinite(coeffs)) and np.all(np.isfinite(base))):
            raise ContractError("jet contains non-finite coefficients")
        base.flags.writeable = False
        coeffs.flags.writeable = False
        object.__setattr__(self, "base_point", base)
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def value(self) -> np.ndarray:
        """Order-0 part: the underlying map's value at the base point."""
        return self.coeffs[0]

    @property
    def jacobian(self) -> np.ndarray:
        """First-order part as a (d, m) matrix."""
        if self.order < 1:
            raise ContractError("order-0 jet has no Jacobian")
        jac = np.zeros((self.out_dim, self.in_dim))
        idx = _index_of(self.in_dim, self.order)
        for axis in range(self.in_dim):
            alpha = tuple(1 if a == axis else 0 for a in range(self.in_dim))
            jac[:, axis] = self.coeffs[idx[alpha]]
        return jac

    def truncate(self, new_order: int) -> "Jet":
        """Drop all terms of total degree > new_order."""
        new_order = _check_order(new_order)
        if new_order > self.order:
            raise ContractError(f"cannot truncate order {self.order} up to {new_order}")
        keep = len(multi_indices(self.in_dim, new_order))
        return Jet(new_order, self.in_dim, self.out_dim, self.base_point, self.coeffs[:keep])

    @staticmethod
    def constant(value, base_point, order: int) -> "Jet":
        value = np.atleast_1d(np.asarray(value, dtype=float))
        base_point = np.atleast_1d(np.asarray(base_point, dtype=float))
        m, d = base_point.shape[0], value.shape[0]
        coeffs = np.zeros((len(multi_indices(m, order)), d))
        coeffs[0] = value
        return Jet(order, m, d, base_point, coeffs)

    @staticmethod
    def linear(matrix, base_point, order: int, value=None) -> "Jet":
        """Jet of an affine map x -> value + matrix @ (x - base_point).

        With value omitted the map is the plain linear map x -> matrix @ x.
        """
        matrix = np.asarray(matrix, dtype=float)
        base_point = np.atleast_1d(np.asarray(base_point, dtype=float))
        d, m = matrix.shape
        if base_point.shape[0] != m:
            raise ContractError("base point size does not match matrix columns")
        if value is None:
            value = matrix @ base_point
        value = np.atleast_1d(np.asarray(value, dtype=float))
        coeffs = np.zeros((len(multi_indices(m, order)), d))
        coeffs[0] = value
        if order >= 1:
            idx = _index_of(m, order)
            for axis in range(m):
                alpha = tuple(1 if a == axis else 0 for a in range(m))
                coeffs[idx[alpha]] = matrix[:, axis]
        return Jet(order, m, d, base_point, coeffs)

    @staticmethod
    def identity(base_point, order: int) -> "Jet":
        base_point = np.atleast_1d(np.asarray(base_point, dtype=float))
        m = base_point.shape[0]
        return Jet.linear(np.eye(m), base_point, order)

    @staticmethod
    def from_table(table: dict, base_point, order: int, out_dim: int) -> "Jet":
        """Build a jet from {multi_index: coefficient vector} entries."""
        base_point = np.atleast_1d(np.asarray(base_point, dtype=float))
        m = base_point.shape[0]
        idx = _index_of(m, order)
        coeffs = np.zeros((len(idx), out_dim))
        for alpha, c in table.items():
            if sum(alpha) <= order:
                coeffs[idx[tuple(alpha)]] = c
        return Jet(order, m, out_dim, base_point, coeffs)


def jet_extract(patch: TensorPatch, u, k: int) -> Jet:
    """Exact order-k jet of a Bezier patch at parameter u.

    Taylor coefficients come from Bernstein derivative rows (control-net
    differencing evaluated in a lower-degree basis), so they are the exact
    polynomial derivatives, not finite-difference estimates.
    """
    k = _check_order(k)
    u = _check_param(u)
    rows = jet_extraction_matrix(patch.degree_u, patch.degree_v, (u[0], u[1]), k)
    coeffs = rows @ patch.control_net.reshape(-1, patch.out_dim)
    return Jet(k, 2, patch.out_dim, u, coeffs)


def jet_extraction_matrix(p: int, q: int, u: tuple[float, float], k: int) -> np.ndarray:
    """Matrix E with (jet coefficients) = E @ (flattened control net).

    Shape (binomial(2+k, k), (p+1)*(q+1)); row alpha is the linear functional
    net -> d^alpha patch(u) / alpha!.
    """
    rows = []
    for a1, a2 in multi_indices(2, k):
        ru = bernstein_derivative_row(p, a1, u[0]) / math.factorial(a1)
        rv = bernstein_derivative_row(q, a2, u[1]) / math.factorial(a2)
        rows.append(np.outer(ru, rv).ravel())
    return np.vstack(rows)


def substitution_matrix(inner: Jet) -> np.ndarray:
    """Matrix S realizing composition with `inner` from the right.

    For any outer jet g based at inner.value, the composed coefficients are
    S @ g.coeffs: column beta of S holds the truncated coefficients of the
    monomial prod_j (inner_j - inner.value_j)^beta_j.  Composition is thereby
    linear in the outer jet, which the constraint assembly exploits.
    """
    m, k = inner.in_dim, inner.order
    n_in = len(multi_indices(m, k))
    outer_monos = multi_indices(inner.out_dim, k)
    idx_out = _index_of(inner.out_dim, k)
    # non-constant part of each inner component: driving the substitution
    # with the constant dropped keeps the triangular truncation exact
    delta = inner.coeffs.copy()
    delta[0] = 0.0
    cols = np.zeros((n_in, len(outer_monos)))
    cols[0, 0] = 1.0
    for col, beta in enumerate(outer_monos):
        if sum(beta) == 0:
            continue
        j = next(a for a, e in enumerate(beta) if e > 0)
        prev = tuple(e - 1 if a == j else e for a, e in enumerate(beta))
        cols[:, col] = truncated_product(m, k, cols[:, idx_out[prev]], delta[:, j])
    return cols


def jet_compose(outer: Jet, inner: Jet) -> Jet:
    """Order-k jet of (outer map) o (inner map) at inner.base_point.

    Truncated power-series substitution; requires equal orders, matching
    dimensions, and outer.base_point == inner.value within BASE_POINT_TOL.
    """
    if inner.out_dim != outer.in_dim:
        raise ContractError(
            f"composition dimension mismatch: inner maps into R^{inner.out_dim}, "
            f"outer expects R^{outer.in_dim}"
        )
    if inner.order != outer.order:
        raise ContractError(
            f"composition order mismatch: {outer.order} vs {inner.order}"
        )
    gap = float(np.max(np.abs(outer.base_point - inner.value)))
    if gap > BASE_POINT_TOL:
        raise ContractError(
            f"outer base point differs from inner value by {gap:.3e} "
            f"(tolerance {BASE_POINT_TOL:.0e})"
        )
    coeffs = substitution_matrix(inner) @ outer.coeffs
    return Jet(inner.order, inner.in_dim, outer.out_dim, inner.base_point, coeffs)


def jet_invert(j: Jet) -> Jet:
    """Jet of the local inverse map, based at j's value.

    The linear part is inverted directly; higher orders follow from the
    frozen-Jacobian Newton iteration g <- g - A^-1 (j o g - id) on truncated
    series, which gains at least one correct order per sweep.
    """
    if j.in_dim != j.out_dim:
        raise ContractError(f"only square jets invert, got {j.in_dim} -> {j.out_dim}")
    if j.order < 1:
        raise ContractError("order-0 jets carry no invertible linear part")
    a = j.jacobian
    det = float(np.linalg.det(a))
    if abs(det) <= SINGULAR_DET_TOL:
        raise SingularJacobianError(
            f"Jacobian determinant {det:.3e} below invertibility threshold", det=det
        )
    a_inv = np.linalg.inv(a)
    g = Jet.linear(a_inv, j.value, j.order, value=j.base_point)
    identity = Jet.identity(j.value, j.order)
    for _ in range(j.order - 1):
        residual = jet_compose(j, g).coeffs - identity.coeffs
        g = Jet(g.order, g.in_dim, g.out_dim, g.base_point, g.coeffs - residual @ a_inv.T)
    return g


def jet_distance(a: Jet, b: Jet) -> float:
    """Largest absolute coefficient difference; 0 iff the jets are identical."""
    if (a.order, a.in_dim, a.out_dim) != (b.order, b.in_dim, b.out_dim):
        raise ContractError(
            f"jet shape mismatch: order/dims {(a.order, a.in_dim, a.out_dim)} "
            f"vs {(b.order, b.in_dim, b.out_dim)}"
        )
    gap = float(np.max(np.abs(a.base_point - b.base_point)))
    if gap > BASE_POINT_TOL:
        raise ContractError(f"jets based at different points (gap {gap:.3e})")
    return float(np.max(np.abs(a.coeffs - b.coeffs)))
