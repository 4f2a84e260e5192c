"""Desk-scale Galerkin solver over a smooth cap basis.

The basis functions are the members of a smoothness space composed with the
inverse geometry, b_j o phi^-1.  All integrals are pulled back to parameter
space (|det J| weights, J^-T gradient transforms), so assembly never inverts
the geometry numerically; dense linear algebra throughout, which is all these
problem sizes (dimension well under 500) call for.

Dirichlet data is imposed weakly: a boundary L2 penalty plus the symmetric
flux-consistency terms, so that solutions lying in the discrete space are
recovered exactly instead of carrying an O(1/weight) consistency error.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, FoldError, InversionError
from .jets import jet_compose, jet_extract, jet_invert, multi_indices
from .patches import bernstein_derivative_row, bernstein_values
from .spaces import GSmoothSpace

#: Dirichlet penalty weight
PENALTY_WEIGHT = 1e6


@dataclass
class _PatchQuad:
    """Cached per-patch quadrature data."""

    points: np.ndarray          # (nq, 2) parameter nodes
    physical: np.ndarray        # (nq, 2) images under the geometry
    weight_det: np.ndarray      # (nq,) quadrature weight * |det J|
    values: np.ndarray          # (dim, nq) basis values
    grads_phys: np.ndarray      # (dim, nq, 2) physical basis gradients


@dataclass
class _BoundaryQuad:
    physical: np.ndarray        # (nq, 2)
    weight_ds: np.ndarray       # (nq,) quadrature weight * |d gamma / ds|
    values: np.ndarray          # (dim, nq)
    normal_derivs: np.ndarray   # (dim, nq)


@dataclass
class DiscreteProblem:
    """Assembled mass/stiffness operators plus boundary penalty machinery."""

    space: GSmoothSpace
    quadrature_order: int
    mass: np.ndarray
    stiffness: np.ndarray
    load: np.ndarray
    boundary_mass: np.ndarray
    boundary_flux: np.ndarray
    _patch_quads: list[_PatchQuad] = field(repr=False, default_factory=list)
    _boundary_quads: list[_BoundaryQuad] = field(repr=False, default_factory=list)

    @property
    def dimension(self) -> int:
        return self.space.dimension


def _gauss_01(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (x + 1.0), 0.5 * w


def _basis_nets(space: GSmoothSpace, patch_index: int) -> np.ndarray:
    """(dim, p+1, q+1) scalar control nets of all basis functions on a patch."""
    p, q = space.complex.bidegree
    per = space.complex.dof_per_patch
    block = space.basis[:, patch_index * per:(patch_index + 1) * per]
    return block.reshape(space.dimension, p + 1, q + 1)


def _collocation(degree: int, xs: np.ndarray, deriv: int = 0) -> np.ndarray:
    if deriv == 0:
        return np.vstack([bernstein_values(degree, x) for x in xs])
    return np.vstack([bernstein_derivative_row(degree, deriv, x) for x in xs])


def assemble(space: GSmoothSpace, quadrature_order: int | None = None) -> DiscreteProblem:
    """Mass and stiffness matrices of the composed basis over the cap.

    quadrature_order is the number of Gauss points per direction per patch;
    the default is bidegree + 2.  A nonpositive Jacobian determinant at any
    node aborts assembly with a fold error.
    """
    complex_ = space.complex
    if complex_.geometry is None:
        raise ContractError("assemble needs a complex with geometry set")
    p, q = complex_.bidegree
    if quadrature_order is None:
        quadrature_order = max(p, q) + 2
    if quadrature_order < max(p, q) + 1:
        raise ContractError(
            f"quadrature order {quadrature_order} below minimum {max(p, q) + 1}"
        )
    dim = space.dimension
    mass = np.zeros((dim, dim))
    stiffness = np.zeros((dim, dim))
    patch_quads = []
    xg, wg = _gauss_01(quadrature_order)
    for pi in range(complex_.n):
        geo = complex_.geometry[pi]
        nets = _basis_nets(space, pi)
        cu0, cu1 = _collocation(p, xg), _collocation(p, xg, 1)
        cv0, cv1 = _collocation(q, xg), _collocation(q, xg, 1)
        vals = np.einsum("ai,nij,bj->nab", cu0, nets, cv0)
        dusq = np.einsum("ai,nij,bj->nab", cu1, nets, cv0)
        dvsq = np.einsum("ai,nij,bj->nab", cu0, nets, cv1)
        # geometry Jacobian at the tensor nodes
        gnet = geo.control_net
        jux = np.einsum("ai,ijd,bj->abd", cu1, gnet, cv0)
        jvx = np.einsum("ai,ijd,bj->abd", cu0, gnet, cv1)
        det = jux[..., 0] * jvx[..., 1] - jux[..., 1] * jvx[..., 0]
        if np.any(det <= 0.0):
            raise FoldError(
                f"patch {pi}: nonpositive Jacobian determinant at a quadrature node"
            )
        # physical gradient: J^-T (du, dv)
        gx = (jvx[..., 1] * dusq - jux[..., 1] * dvsq) / det
        gy = (-jvx[..., 0] * dusq + jux[..., 0] * dvsq) / det
        wdet = np.einsum("a,b,ab->ab", wg, wg, det)
        mass += np.einsum("nab,mab,ab->nm", vals, vals, wdet)
        stiffness += np.einsum("nab,mab,ab->nm", gx, gx, wdet)
        stiffness += np.einsum("nab,mab,ab->nm", gy, gy, wdet)
        phys = np.einsum("ai,ijd,bj->abd", cu0, gnet, cv0)
        patch_quads.append(_PatchQuad(
            points=np.stack(np.meshgrid(xg, xg, indexing="ij"), -1).reshape(-1, 2),
            physical=phys.reshape(-1, 2),
            weight_det=wdet.reshape(-1),
            values=vals.reshape(dim, -1),
            grads_phys=np.stack([gx, gy], axis=-1).reshape(dim, -1, 2),
        ))
    boundary_quads = _assemble_boundary(space, quadrature_order)
    bmass = np.zeros((dim, dim))
    bflux = np.zeros((dim, dim))
    for bq in boundary_quads:
        bmass += np.einsum("nq,mq,q->nm", bq.values, bq.values, bq.weight_ds)
        bflux += np.einsum("nq,mq,q->nm", bq.values, bq.normal_derivs, bq.weight_ds)
    return DiscreteProblem(
        space, quadrature_order, mass, stiffness, np.zeros(dim),
        bmass, bflux, patch_quads, boundary_quads,
    )


def _assemble_boundary(space: GSmoothSpace, order: int) -> list[_BoundaryQuad]:
    complex_ = space.complex
    p, q = complex_.bidegree
    dim = space.dimension
    xg, wg = _gauss_01(order)
    out = []
    for pi, edge in complex_.boundary_edges:
        geo = complex_.geometry[pi]
        nets = _basis_nets(space, pi)
        pts = np.array([edge.point(s) for s in xg])
        cu0 = _collocation(p, pts[:, 0]); cu1 = _collocation(p, pts[:, 0], 1)
        cv0 = _collocation(q, pts[:, 1]); cv1 = _collocation(q, pts[:, 1], 1)
        vals = np.einsum("qi,nij,qj->nq", cu0, nets, cv0)
        du = np.einsum("qi,nij,qj->nq", cu1, nets, cv0)
        dv = np.einsum("qi,nij,qj->nq", cu0, nets, cv1)
        gnet = geo.control_net
        jux = np.einsum("qi,ijd,qj->qd", cu1, gnet, cv0)
        jvx = np.einsum("qi,ijd,qj->qd", cu0, gnet, cv1)
        det = jux[:, 0] * jvx[:, 1] - jux[:, 1] * jvx[:, 0]
        gx = (jvx[:, 1] * du - jux[:, 1] * dv) / det
        gy = (-jvx[:, 0] * du + jux[:, 0] * dv) / det
        tangent_param = edge.tangent()
        gamma_dot = jux * tangent_param[0] + jvx * tangent_param[1]
        ds = np.linalg.norm(gamma_dot, axis=1)
        # outward physical normal: cofactor transform of the parameter normal
        n_par = -edge.inward_normal()
        nx = (jvx[:, 1] * n_par[0] - jux[:, 1] * n_par[1]) / det
        ny = (-jvx[:, 0] * n_par[0] + jux[:, 0] * n_par[1]) / det
        norm = np.hypot(nx, ny)
        nx, ny = nx / norm, ny / norm
        normal_derivs = gx * nx + gy * ny
        phys = np.einsum("qi,ijd,qj->qd", cu0, gnet, cv0)
        out.append(_BoundaryQuad(
            physical=phys, weight_ds=wg * ds, values=vals, normal_derivs=normal_derivs,
        ))
    return out


def load_vector(problem: DiscreteProblem, f) -> np.ndarray:
    """Galerkin load: integral of f against every composed basis function."""
    out = np.zeros(problem.dimension)
    for pq in problem._patch_quads:
        fx = np.array([f(x) for x in pq.physical])
        out += pq.values @ (fx * pq.weight_det)
    return out


def _boundary_loads(problem: DiscreteProblem, g) -> tuple[np.ndarray, np.ndarray]:
    """(boundary mass load, boundary flux load) of the Dirichlet datum g."""
    mass_load = np.zeros(problem.dimension)
    flux_load = np.zeros(problem.dimension)
    for bq in problem._boundary_quads:
        gx = np.array([g(x) for x in bq.physical])
        mass_load += bq.values @ (gx * bq.weight_ds)
        flux_load += bq.normal_derivs @ (gx * bq.weight_ds)
    return mass_load, flux_load


def l2_project(problem: DiscreteProblem, target) -> np.ndarray:
    """Coefficients of the L2-orthogonal projection of `target` onto the
    composed basis (target is a callable on physical points)."""
    rhs = load_vector(problem, target)
    try:
        return np.linalg.solve(problem.mass, rhs)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - desk scale SPD
        raise ContractError(f"mass solve failed: {exc}") from exc


def solve_reaction(
    problem: DiscreteProblem,
    rhs,
    boundary,
    penalty: float = PENALTY_WEIGHT,
) -> np.ndarray:
    """Solve (-laplace + 1) u = rhs with Dirichlet data `boundary`.

    Weak imposition: boundary L2 penalty plus symmetric flux-consistency
    terms.  Members of the discrete space are therefore reproduced exactly
    (up to quadrature), which gives the manufactured test its oracle.
    """
    a = (problem.stiffness + problem.mass
         - problem.boundary_flux - problem.boundary_flux.T
         + penalty * problem.boundary_mass)
    b = load_vector(problem, rhs)
    mass_load, flux_load = _boundary_loads(problem, boundary)
    b += penalty * mass_load - flux_load
    try:
        return np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise ContractError(f"constrained solve failed: {exc}") from exc


def l2_error(problem: DiscreteProblem, coeffs: np.ndarray, target) -> float:
    """L2 norm of (discrete function - target) over the physical domain."""
    coeffs = np.asarray(coeffs, dtype=float)
    total = 0.0
    for pq in problem._patch_quads:
        uh = coeffs @ pq.values
        tx = np.array([target(x) for x in pq.physical])
        total += float(np.sum((uh - tx) ** 2 * pq.weight_det))
    return float(np.sqrt(total))


def domain_area(problem: DiscreteProblem) -> float:
    """Quadrature of |det J| over all patches."""
    return float(sum(np.sum(pq.weight_det) for pq in problem._patch_quads))


class SpaceMember:
    """A member of the smoothness space as a physical-space function.

    Point location inverts the geometry with grid seeding; derivatives come
    from composing the field jet with the inverted geometry jet, so values,
    gradients and Laplacians are exact wherever the inversion converges.
    """

    def __init__(self, space: GSmoothSpace, coeffs: np.ndarray):
        from .isogeo import make_elements  # local import to avoid a cycle

        self.space = space
        self.coeffs = np.asarray(coeffs, dtype=float)
        self.elements = make_elements(space, self.coeffs)

    def locate(self, x) -> tuple[int, np.ndarray]:
        """(patch index, parameter) of a physical point, nearest patch first."""
        x = np.asarray(x, dtype=float)
        order = np.argsort([
            float(np.min(np.sum((e._seed_grid()[1] - x) ** 2, axis=1)))
            for e in self.elements
        ])
        last: InversionError | None = None
        for pi in order:
            try:
                return int(pi), self.elements[pi].invert(x)
            except InversionError as exc:
                last = exc
        raise last if last is not None else InversionError("no patches", residual=None)

    def value(self, x) -> float:
        pi, u = self.locate(x)
        return float(self.elements[pi].fieldpatch.eval(u)[0])

    def laplacian(self, x) -> float:
        pi, u = self.locate(x)
        return self.laplacian_param(pi, u)

    def laplacian_param(self, patch_index: int, u) -> float:
        elem = self.elements[patch_index]
        composed = jet_compose(
            jet_extract(elem.fieldpatch, u, 2),
            jet_invert(jet_extract(elem.geometry, u, 2)),
        )
        idx = {a: i for i, a in enumerate(multi_indices(2, 2))}
        return float(2.0 * (composed.coeffs[idx[(2, 0)], 0]
                            + composed.coeffs[idx[(0, 2)], 0]))

    def reaction_rhs(self, x) -> float:
        """(-laplace + 1) applied to the member, at a physical point."""
        pi, u = self.locate(x)
        value = float(self.elements[pi].fieldpatch.eval(u)[0])
        return value - self.laplacian_param(pi, u)
