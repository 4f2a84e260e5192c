"""Shared test machinery: an exact polynomial oracle and geometry draws.

The oracle represents bivariate polynomials as {(i, j): coeff} monomial
dicts and performs full (untruncated) arithmetic.  With integer coefficients
and dyadic evaluation points every operation except the final Taylor-shift
accumulation is exact in double precision, which keeps the oracle's own error
around 1e-15 -- far below the tolerances it arbitrates.
"""

from __future__ import annotations

from math import comb

import numpy as np

from gsmooth.jets import Jet, multi_indices
from gsmooth.patches import TensorPatch

Poly = dict  # {(i, j): float}


def poly_mul(a: Poly, b: Poly) -> Poly:
    out: Poly = {}
    for (i1, j1), c1 in a.items():
        for (i2, j2), c2 in b.items():
            key = (i1 + i2, j1 + j2)
            out[key] = out.get(key, 0.0) + c1 * c2
    return out


def poly_add(a: Poly, b: Poly, scale: float = 1.0) -> Poly:
    out = dict(a)
    for key, c in b.items():
        out[key] = out.get(key, 0.0) + scale * c
    return out


def poly_compose(outer: Poly, inner_x: Poly, inner_y: Poly) -> Poly:
    """outer(inner_x(u, v), inner_y(u, v)), fully expanded."""
    deg_x = max((i for i, _ in outer), default=0)
    deg_y = max((j for _, j in outer), default=0)
    pow_x = {0: {(0, 0): 1.0}}
    pow_y = {0: {(0, 0): 1.0}}
    for n in range(1, deg_x + 1):
        pow_x[n] = poly_mul(pow_x[n - 1], inner_x)
    for n in range(1, deg_y + 1):
        pow_y[n] = poly_mul(pow_y[n - 1], inner_y)
    out: Poly = {}
    for (i, j), c in outer.items():
        out = poly_add(out, poly_mul(pow_x[i], pow_y[j]), scale=c)
    return out


def poly_eval(poly: Poly, x: float, y: float) -> float:
    return sum(c * x**i * y**j for (i, j), c in poly.items())


def poly_taylor(poly: Poly, x0: float, y0: float, k: int) -> Poly:
    """Taylor coefficients (derivative / alpha!) at (x0, y0), |alpha| <= k.

    An exact binomial shift of the monomial expansion; this is the
    independent differentiation path the jet engine is checked against.
    """
    out: Poly = {}
    for (i, j), c in poly.items():
        for a in range(min(i, k) + 1):
            for b in range(min(j, k - a) + 1):
                out[(a, b)] = out.get((a, b), 0.0) + (
                    c * comb(i, a) * comb(j, b) * x0 ** (i - a) * y0 ** (j - b)
                )
    return {key: v for key, v in out.items() if sum(key) <= k}


def random_poly(rng, degree: int = 4, span: int = 3, scale: float = 0.125) -> Poly:
    """Random polynomial of total degree <= degree.

    Coefficients are integers in [-span, span] times a dyadic scale, so all
    oracle arithmetic on them stays exact while composed values keep O(1)
    magnitude (absolute comparison tolerances assume that).
    """
    return {
        (i, j): float(rng.integers(-span, span + 1)) * scale
        for i in range(degree + 1)
        for j in range(degree + 1 - i)
    }


def dyadic_point(rng, denominator: int = 16) -> float:
    """Random dyadic rational in (0, 1): exact in binary floating point."""
    return float(rng.integers(1, denominator)) / denominator


def oracle_jet(polys: list[Poly], base: tuple[float, float], k: int) -> Jet:
    """Jet built from the oracle's Taylor tables (one poly per component)."""
    tables = [poly_taylor(p, base[0], base[1], k) for p in polys]
    merged = {}
    for alpha in multi_indices(2, k):
        merged[alpha] = [t.get(alpha, 0.0) for t in tables]
    return Jet.from_table(merged, list(base), k, len(polys))


def patch_to_polys(patch: TensorPatch) -> list[Poly]:
    """Monomial expansion of a Bezier patch, one dict per output component."""
    p, q = patch.degree_u, patch.degree_v
    out = [{} for _ in range(patch.out_dim)]
    for i in range(p + 1):
        bu = _bernstein_poly(p, i)
        for j in range(q + 1):
            bv = _bernstein_poly(q, j)
            for d in range(patch.out_dim):
                c = float(patch.control_net[i, j, d])
                if c == 0.0:
                    continue
                for a, ca in enumerate(bu):
                    for b, cb in enumerate(bv):
                        key = (a, b)
                        out[d][key] = out[d].get(key, 0.0) + c * ca * cb
    return out


def _bernstein_poly(degree: int, i: int) -> list[float]:
    """Monomial coefficients of B_{i,degree}: comb(p,i) x^i (1-x)^(p-i)."""
    coeffs = [0.0] * (degree + 1)
    for r in range(degree - i + 1):
        coeffs[i + r] = comb(degree, i) * comb(degree - i, r) * (-1.0) ** r
    return coeffs


def draw_injective_geometry(space, rng, scale: float = 0.15, min_det: float = 0.05,
                            tries: int = 40) -> np.ndarray:
    """Random geometry coefficients from the space with a usable Jacobian.

    Perturbs the audited base geometry by a random member and rejects draws
    whose interface Jacobian determinant dips below min_det (the smoothness
    identity needs invertible geometry jets, which a blind random member does
    not guarantee).  Returns the (2, dim) coefficient array.
    """
    from gsmooth.jets import jet_extract

    base = space.complex.geometry_coeffs
    assert base is not None, "space's complex needs a geometry first"
    for _ in range(tries):
        coeffs = base + scale * rng.standard_normal(base.shape)
        patches = space.complex.patch_nets(coeffs @ space.basis, out_dim=2)
        ok = True
        for rec in space.complex.edges:
            for s in np.linspace(0.0, 1.0, 9):
                u1 = rec.rho.edge_point(s)
                u2 = rec.rho.apply(u1)
                d1 = np.linalg.det(jet_extract(patches[rec.patch_a], u1, 1).jacobian)
                d2 = np.linalg.det(jet_extract(patches[rec.patch_b], u2, 1).jacobian)
                if min(abs(d1), abs(d2)) < min_det or d1 * d2 <= 0:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            return coeffs
    raise AssertionError("no usable geometry draw found; widen the tries budget")
