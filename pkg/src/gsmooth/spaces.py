"""Linear spaces of smoothly joined patch tuples around a central vertex.

A cap complex is n unit squares glued cyclically around one shared corner:
patch i's side u=0 meets patch i+1's side v=0 under the standard symmetric
vertex reparameterization.  The smoothness space of order k is the joint
nullspace of all sampled per-edge jet-matching constraints; both the planar
geometry and every scalar field are drawn from that one space, which is what
makes the resulting elements smooth across the interfaces.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import shapely

from .errors import ContractError, DegenerateSpaceError, FoldError, OverlapError
from .gluing import Reparameterization, check_gk, standard_repar
from .jets import jet_extraction_matrix, multi_indices, substitution_matrix
from .patches import EdgeId, TensorPatch, chebyshev_sites

#: relative singular-value cutoff separating constraint range from nullspace
RANK_RTOL = 1e-9


@dataclass(frozen=True)
class EdgeRecord:
    """Interior edge: patch_a's edge_a glued to patch_b's edge_b via rho."""

    patch_a: int
    edge_a: EdgeId
    patch_b: int
    edge_b: EdgeId
    rho: Reparameterization

    def __post_init__(self):
        if self.rho.edge_from is not self.edge_a or self.rho.edge_to is not self.edge_b:
            raise ContractError("edge record and reparameterization disagree on edges")


@dataclass
class PatchComplex:
    """n patches with edge adjacencies; the image of its geometry is the
    physical domain the Galerkin module integrates over."""

    n: int
    bidegree: tuple[int, int]
    edges: list[EdgeRecord]
    boundary_edges: list[tuple[int, EdgeId]]
    geometry: list[TensorPatch] | None = None
    geometry_coeffs: np.ndarray | None = None
    fields: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def dof_per_patch(self) -> int:
        p, q = self.bidegree
        return (p + 1) * (q + 1)

    @property
    def n_dof(self) -> int:
        return self.n * self.dof_per_patch

    def validate(self):
        """Structural invariants: one rho per interior edge, consistent
        cyclic order, and (with geometry set) matching interface curves."""
        if len(self.edges) != self.n:
            raise ContractError(f"cap complex needs {self.n} interior edges")
        for i, rec in enumerate(self.edges):
            if rec.patch_b != (rec.patch_a + 1) % self.n:
                raise ContractError(f"edge {i} breaks the cyclic patch order")
        if self.geometry is not None:
            if len(self.geometry) != self.n:
                raise ContractError("geometry must provide one patch per domain")
            for rec in self.edges:
                pa, pb = self.geometry[rec.patch_a], self.geometry[rec.patch_b]
                gap = max(
                    float(np.max(np.abs(
                        pa.eval(rec.rho.edge_point(s))
                        - pb.eval(rec.rho.apply(rec.rho.edge_point(s)))
                    )))
                    for s in np.linspace(0.0, 1.0, 9)
                )
                if gap > 1e-10:
                    raise ContractError(
                        f"interface of patches {rec.patch_a}/{rec.patch_b} "
                        f"mismatches by {gap:.3e}"
                    )

    def patch_nets(self, stacked: np.ndarray, out_dim: int = 1) -> list[TensorPatch]:
        """Materialize a stacked coefficient vector as per-patch patches."""
        p, q = self.bidegree
        per = self.dof_per_patch
        stacked = np.asarray(stacked, dtype=float).reshape(out_dim, self.n_dof)
        out = []
        for i in range(self.n):
            net = np.stack(
                [stacked[d, i * per:(i + 1) * per].reshape(p + 1, q + 1)
                 for d in range(out_dim)],
                axis=-1,
            )
            out.append(TensorPatch(net))
        return out


def build_complex(n: int, bidegree: tuple[int, int] = (3, 3)) -> PatchComplex:
    """Cap topology: n abstract unit squares around one central vertex.

    The central vertex is corner (0,0) of every patch; interior edge i glues
    patch i's u=0 side to patch (i+1)%n's v=0 side with the standard
    reparameterization, so the shear's v=0 end sits at the vertex.
    """
    if n < 3:
        raise ContractError(f"a cap needs n >= 3 patches, got {n}")
    p, q = bidegree
    if p < 3 or q < 3:
        raise ContractError(f"bidegree must be at least (3,3), got {bidegree}")
    edges = [
        EdgeRecord(i, EdgeId.U0, (i + 1) % n, EdgeId.V0, standard_repar(n))
        for i in range(n)
    ]
    boundary = [(i, e) for i in range(n) for e in (EdgeId.U1, EdgeId.V1)]
    return PatchComplex(n, (p, q), edges, boundary)


def assemble_constraints(complex_: PatchComplex, k: int) -> np.ndarray:
    """Dense matrix of all sampled jet-matching conditions.

    Row block per edge and Chebyshev site: every jet coefficient of f_a minus
    the corresponding coefficient of f_b o rho, expressed as a linear
    functional of the stacked per-patch scalar control values.  The site
    count makes the sampled conditions exact for the polynomial degrees at
    hand, so the nullspace is the true smoothness space, not a least-squares
    surrogate.
    """
    p, q = complex_.bidegree
    per = complex_.dof_per_patch
    n_mono = len(multi_indices(2, k))
    rows = []
    for rec in complex_.edges:
        deg_rho = rec.rho.shear_degree() + 1
        n_sites = (p + q) * deg_rho + 1
        for s in chebyshev_sites(n_sites):
            u1 = rec.rho.edge_point(float(s))
            u2 = rec.rho.apply(u1)
            ea = jet_extraction_matrix(p, q, (u1[0], u1[1]), k)
            eb = jet_extraction_matrix(p, q, (u2[0], u2[1]), k)
            sub = substitution_matrix(rec.rho.jet(u1, k))
            block = np.zeros((n_mono, complex_.n_dof))
            block[:, rec.patch_a * per:(rec.patch_a + 1) * per] = ea
            block[:, rec.patch_b * per:(rec.patch_b + 1) * per] = -(sub @ eb)
            rows.append(block)
    return np.vstack(rows)


@dataclass(frozen=True)
class GSmoothSpace:
    """Orthonormal basis of the order-k smoothness space of a cap complex.

    basis has shape (dimension, n_dof): each row, reshaped per patch, is a
    tuple of scalar control nets satisfying every interior-edge jet-matching
    condition.
    """

    complex: PatchComplex
    k: int
    basis: np.ndarray
    constraint_residual: float

    @property
    def dimension(self) -> int:
        return self.basis.shape[0]

    def project(self, stacked: np.ndarray) -> np.ndarray:
        """Coefficients of the orthogonal projection of stacked control
        values onto the space."""
        return self.basis @ np.asarray(stacked, dtype=float).ravel()

    def projection_residual(self, stacked: np.ndarray) -> float:
        stacked = np.asarray(stacked, dtype=float).ravel()
        back = self.basis.T @ (self.basis @ stacked)
        return float(np.max(np.abs(back - stacked)))

    def constant_coeffs(self, value: float = 1.0) -> np.ndarray:
        """Coefficients representing the constant function."""
        return self.project(np.full(self.complex.n_dof, value))


def build_gsmooth_space(complex_: PatchComplex, k: int) -> GSmoothSpace:
    """SVD nullspace of the sampled jet-matching constraints."""
    if k < 0 or k > 2:
        raise ContractError(f"supported smoothness orders are 0, 1, 2; got {k}")
    constraints = assemble_constraints(complex_, k)
    _, sigma, vh = np.linalg.svd(constraints, full_matrices=True)
    cutoff = RANK_RTOL * (sigma[0] if sigma.size else 1.0)
    rank = int(np.sum(sigma > cutoff))
    basis = vh[rank:]
    if basis.shape[0] == 0:
        raise DegenerateSpaceError(
            "constraint nullspace is empty; the constants always satisfy the "
            "jet-matching conditions, so the assembly is inconsistent"
        )
    residual = _basis_residual(complex_, k, basis)
    return GSmoothSpace(complex_, k, basis, residual)


def _basis_residual(complex_: PatchComplex, k: int, basis: np.ndarray) -> float:
    """Worst per-edge jet mismatch over all basis vectors (sampled)."""
    worst = 0.0
    for vec in basis:
        patches = complex_.patch_nets(vec)
        for rec in complex_.edges:
            rep = check_gk(patches[rec.patch_a], patches[rec.patch_b], rec.rho,
                           k, n_samples=9, tol=np.inf)
            worst = max(worst, rep.max_mismatch)
    return worst


def sample_field(space: GSmoothSpace, coeffs: np.ndarray) -> list[TensorPatch]:
    """Materialize a member of the space as per-patch scalar patches."""
    coeffs = np.asarray(coeffs, dtype=float).ravel()
    if coeffs.shape[0] != space.dimension:
        raise ContractError(
            f"coefficient vector has length {coeffs.shape[0]}, "
            f"space dimension is {space.dimension}"
        )
    return space.complex.patch_nets(coeffs @ space.basis)


def regular_layout_nets(n: int, bidegree: tuple[int, int], radius: float = 1.0) -> np.ndarray:
    """Stacked target control values of the regular n-gon sector layout.

    Patch i is the bilinear span of the unit vectors at angles 2*pi*i/n and
    2*pi*(i+1)/n, elevated to the working bidegree; shape (2, n_dof).
    """
    p, q = bidegree
    out = []
    for i in range(n):
        a = np.array([np.cos(2 * np.pi * i / n), np.sin(2 * np.pi * i / n)])
        b = np.array([np.cos(2 * np.pi * (i + 1) / n), np.sin(2 * np.pi * (i + 1) / n)])
        net = np.zeros((2, 2, 2))
        net[1, 0] = radius * a
        net[0, 1] = radius * b
        net[1, 1] = radius * (a + b)
        out.append(TensorPatch(net).elevate(p, q).control_net)
    nets = np.stack(out)  # (n, p+1, q+1, 2)
    return nets.transpose(3, 0, 1, 2).reshape(2, -1)


def make_geometry(
    space: GSmoothSpace,
    target: np.ndarray | None = None,
    grid: int = 20,
) -> PatchComplex:
    """Select an injective planar geometry from the space.

    Fits the x and y coordinate functions to the regular sector layout (or a
    caller-provided stacked target) by orthogonal projection, then audits the
    result: the Jacobian determinant must keep one sign on a grid x grid
    sample per patch, and the sampled patch interiors must be pairwise
    disjoint.  Stores the chosen coefficients on the complex and returns it.
    """
    if space.dimension < 3:
        raise ContractError(
            f"space dimension {space.dimension} too small to embed a planar "
            "geometry (needs >= 3)"
        )
    complex_ = space.complex
    if target is None:
        target = regular_layout_nets(complex_.n, complex_.bidegree)
    target = np.asarray(target, dtype=float).reshape(2, complex_.n_dof)
    coeffs = np.vstack([space.project(target[0]), space.project(target[1])])
    patches = complex_.patch_nets(coeffs @ space.basis, out_dim=2)
    audit_injectivity(patches, grid=grid)
    complex_.geometry = patches
    complex_.geometry_coeffs = coeffs
    complex_.validate()
    return complex_


def audit_injectivity(patches: list[TensorPatch], grid: int = 20) -> float:
    """Numerical injectivity audit; returns the smallest sampled |det J|.

    Raises FoldError on a Jacobian sign change within any patch and
    OverlapError when two sampled patch interiors intersect.
    """
    samples = np.linspace(0.0, 1.0, grid)
    min_det = np.inf
    polys = []
    for idx, patch in enumerate(patches):
        du = patch.partial_derivative_patch(1, 0)
        dv = patch.partial_derivative_patch(0, 1)
        gu = du.eval_grid(samples, samples)
        gv = dv.eval_grid(samples, samples)
        det = gu[..., 0] * gv[..., 1] - gu[..., 1] * gv[..., 0]
        if np.min(det) < 0.0 < np.max(det) or np.any(det == 0.0):
            raise FoldError(
                f"patch {idx}: Jacobian determinant changes sign "
                f"(range [{np.min(det):.3e}, {np.max(det):.3e}])"
            )
        min_det = min(min_det, float(np.min(np.abs(det))))
        polys.append(_boundary_polygon(patch))
    for i in range(len(polys)):
        for j in range(i + 1, len(polys)):
            inter = polys[i].buffer(-1e-9).intersection(polys[j].buffer(-1e-9))
            if inter.area > 1e-10:
                raise OverlapError(
                    f"patches {i} and {j} overlap (sampled area {inter.area:.3e})"
                )
    return min_det


def _boundary_polygon(patch: TensorPatch, res: int = 40) -> shapely.Polygon:
    s = np.linspace(0.0, 1.0, res)
    ring = []
    for edge, flip in ((EdgeId.V0, False), (EdgeId.U1, False),
                       (EdgeId.V1, True), (EdgeId.U0, True)):
        pts = [patch.edge_trace(edge, t) for t in s]
        if flip:
            pts = pts[::-1]
        ring.extend(pts[:-1])
    return shapely.Polygon(np.asarray(ring))
