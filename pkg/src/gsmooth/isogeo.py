"""Iso-geometric elements and interface smoothness verification.

An iso-geometric element is the physical-space function f o phi^-1 built from
a scalar field f and an injective planar geometry phi on the same patch, with
both drawn from one smoothness space.  Two independent verifiers probe the
smoothness of the composed function across a patch interface:

* ``lemma_check`` works in jet space: it composes the field jet with the
  inverted geometry jet on each side and compares the results.  Exact up to
  rounding, no step-size parameter.
* ``crosscheck_fd`` works in physical space: one-sided finite-difference
  directional derivatives from both sides of the interface, with a step
  halving to expose the O(h^2) decay a genuinely C^1 function must show.

Keeping the two verifiers independent separates "is the construction smooth"
from "is the jet engine correct".
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, InversionError, SamplingError, SingularJacobianError
from .gluing import Reparameterization, SmoothnessReport
from .jets import jet_compose, jet_extract, jet_invert
from .patches import TensorPatch
from .spaces import GSmoothSpace, sample_field

#: Newton convergence target on |phi(u) - x|
NEWTON_TOL = 1e-12
NEWTON_MAX_ITER = 50

#: resolution of the per-patch seeding grid for Newton starts
SEED_GRID = 20


def invert_map(phi: TensorPatch, x, guess) -> np.ndarray:
    """Parameter u in [0,1]^2 with phi(u) = x, by damped-free Newton.

    Iterates from `guess`, clamping each update into the unit square; callers
    are responsible for x actually lying in the patch image -- divergence is
    reported as InversionError carrying the last residual, never silently
    accepted.
    """
    if phi.out_dim != 2:
        raise ContractError("only planar (d=2) geometries can be inverted")
    x = np.asarray(x, dtype=float)
    u = np.clip(np.asarray(guess, dtype=float), 0.0, 1.0)
    du = phi.partial_derivative_patch(1, 0)
    dv = phi.partial_derivative_patch(0, 1)
    residual = np.inf
    for _ in range(NEWTON_MAX_ITER):
        r = phi.eval(u) - x
        residual = float(np.linalg.norm(r))
        if residual < NEWTON_TOL:
            return u
        jac = np.column_stack([du.eval(u), dv.eval(u)])
        det = float(np.linalg.det(jac))
        if abs(det) < 1e-14:
            raise SingularJacobianError(
                f"singular geometry Jacobian at u={u} during inversion", det=det
            )
        u = np.clip(u - np.linalg.solve(jac, r), 0.0, 1.0)
    raise InversionError(
        f"Newton did not reach {NEWTON_TOL:g} within {NEWTON_MAX_ITER} "
        f"iterations (last residual {residual:.3e})",
        residual=residual,
    )


@dataclass
class IsoGeoElement:
    """One patch of a physical-space function f o phi^-1."""

    geometry: TensorPatch
    fieldpatch: TensorPatch
    patch_index: int = 0
    #: provenance: geometry and field drawn from the same smoothness space
    iso_geometric: bool = True
    _seeds: tuple[np.ndarray, np.ndarray] | None = field(
        default=None, repr=False, compare=False
    )

    def __post_init__(self):
        if self.geometry.out_dim != 2:
            raise ContractError("element geometry must map into the plane")
        if self.fieldpatch.out_dim != 1:
            raise ContractError("element field must be scalar")

    def _seed_grid(self):
        if self._seeds is None:
            s = np.linspace(0.0, 1.0, SEED_GRID)
            params = np.stack(np.meshgrid(s, s, indexing="ij"), axis=-1).reshape(-1, 2)
            images = self.geometry.eval_grid(s, s).reshape(-1, 2)
            self._seeds = (params, images)
        return self._seeds

    def seed_for(self, x) -> np.ndarray:
        """Starting parameter: nearest point of a coarse sample grid."""
        params, images = self._seed_grid()
        d2 = np.sum((images - np.asarray(x, dtype=float)) ** 2, axis=1)
        return params[int(np.argmin(d2))]

    def invert(self, x, guess=None) -> np.ndarray:
        return invert_map(self.geometry, x, self.seed_for(x) if guess is None else guess)

    def __call__(self, x, guess=None) -> float:
        return float(self.fieldpatch.eval(self.invert(x, guess))[0])


def make_elements(space: GSmoothSpace, field_coeffs: np.ndarray) -> list[IsoGeoElement]:
    """Pair the complex's geometry with a field member, patch by patch."""
    if space.complex.geometry is None:
        raise ContractError("complex has no geometry; run make_geometry first")
    patches = sample_field(space, field_coeffs)
    return [
        IsoGeoElement(geo, f, patch_index=i)
        for i, (geo, f) in enumerate(zip(space.complex.geometry, patches))
    ]


def eval_element(elem: IsoGeoElement, x) -> float:
    """Value of f o phi^-1 at physical point x (grid-seeded Newton)."""
    return elem(x)


def _composed_jet(elem: IsoGeoElement, u, k: int):
    """Jet of f o phi^-1 at the physical image of parameter u."""
    geo = jet_extract(elem.geometry, u, k)
    det = float(np.linalg.det(geo.jacobian))
    return jet_compose(jet_extract(elem.fieldpatch, u, k), jet_invert(geo)), det


def lemma_check(
    elem1: IsoGeoElement,
    elem2: IsoGeoElement,
    rho: Reparameterization,
    k: int,
    n_samples: int = 25,
    tol: float = 1e-8,
) -> SmoothnessReport:
    """Compare composed-element jets from both sides of an interface.

    At physical interface points phi1(e1(s)) the jet of f1 o phi1^-1 is held
    against the jet of f2 o phi2^-1 computed at e2(s).  Any base-point gap
    between the two (a broken-G0 geometry) is folded into the reported
    mismatch, so the detector also fires on matching-curve violations instead
    of erroring out.
    """
    params = np.linspace(0.0, 1.0, n_samples)
    mismatch = np.empty_like(params)
    min_det = np.inf
    for i, s in enumerate(params):
        u1 = rho.edge_point(s)
        u2 = rho.apply(u1)
        j1, det1 = _composed_jet(elem1, u1, k)
        j2, det2 = _composed_jet(elem2, u2, k)
        min_det = min(min_det, abs(det1), abs(det2))
        base_gap = float(np.max(np.abs(j1.base_point - j2.base_point)))
        coeff_gap = float(np.max(np.abs(j1.coeffs - j2.coeffs)))
        mismatch[i] = max(base_gap, coeff_gap)
    worst = float(np.max(mismatch))
    return SmoothnessReport(
        k, params, mismatch, worst, tol, worst < tol, min_jacobian_det=float(min_det)
    )


def _one_sided_derivative(elem: IsoGeoElement, x0, f0: float, direction, h: float,
                          guess) -> float:
    """Second-order one-sided directional derivative using points x0 + h*d,
    x0 + 2h*d only (stays on one side of the interface)."""
    x0 = np.asarray(x0, dtype=float)
    d = np.asarray(direction, dtype=float)
    f1 = elem(x0 + h * d, guess)
    f2 = elem(x0 + 2.0 * h * d, guess)
    return (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * h)


def crosscheck_fd(
    elem1: IsoGeoElement,
    elem2: IsoGeoElement,
    rho: Reparameterization,
    n_samples: int = 5,
    h: float = 1e-4,
    ratio_band: tuple[float, float] = (3.0, 5.0),
    floor: float = 1e-8,
) -> SmoothnessReport:
    """Physical-space gradient match across an interface, with step halving.

    One-sided finite differences along two directions transversal to the
    interface are taken from each side; for a C^1 composition the side
    mismatch decays like O(h^2), so mismatch(h)/mismatch(h/2) should sit near
    4.  The verdict passes when the halved-step mismatch is below `floor`
    (exact cases) or the decay ratio falls inside `ratio_band`.
    """
    params = np.linspace(0.2, 0.9, n_samples)  # keep probe rays inside both images
    per_sample = np.empty_like(params)
    halved = np.empty_like(params)
    for i, s in enumerate(params):
        u1 = rho.edge_point(s)
        u2 = rho.apply(u1)
        x0 = elem1.geometry.eval(u1)
        f0 = float(elem1.fieldpatch.eval(u1)[0])
        f0_b = float(elem2.fieldpatch.eval(u2)[0])
        # physical tangent and the inward direction of side 1
        geo1 = jet_extract(elem1.geometry, u1, 1)
        tangent = geo1.jacobian @ rho.edge_from.tangent()
        tangent /= np.linalg.norm(tangent)
        inward = geo1.jacobian @ rho.edge_from.inward_normal()
        inward /= np.linalg.norm(inward)
        directions = [inward, _normalize(inward + 0.4 * tangent)]
        try:
            def side_gap(step: float) -> float:
                worst = 0.0
                for d in directions:
                    g1 = _one_sided_derivative(elem1, x0, f0, d, step, u1)
                    g2 = _one_sided_derivative(elem2, x0, f0_b, -d, step, u2)
                    worst = max(worst, abs(g1 + g2))
                return worst

            per_sample[i] = side_gap(h)
            halved[i] = side_gap(h / 2.0)
        except InversionError as exc:
            raise SamplingError(
                f"finite-difference probe at s={s:.3f} left the patch images"
            ) from exc
    worst = float(np.max(per_sample))
    worst_halved = float(np.max(halved))
    if worst_halved < floor:
        ratio = float("nan")
        verdict = True
    else:
        ratio = worst / worst_halved
        verdict = ratio_band[0] <= ratio <= ratio_band[1]
    return SmoothnessReport(
        1, params, per_sample, worst, floor, verdict, fd_ratio=ratio
    )


def _normalize(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)
