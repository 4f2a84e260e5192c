import numpy as np
import pytest

from gsmooth.errors import ContractError, FoldError
from gsmooth.galerkin import (
    SpaceMember,
    assemble,
    domain_area,
    l2_error,
    l2_project,
    solve_reaction,
)
from gsmooth.isogeo import lemma_check, make_elements
from gsmooth.spaces import build_complex, build_gsmooth_space, make_geometry


@pytest.fixture(scope="module")
def problem(cap_factory):
    return assemble(cap_factory(5))


def test_default_quadrature_order(problem):
    assert problem.quadrature_order == 5


def test_quadrature_order_minimum(cap_factory):
    with pytest.raises(ContractError):
        assemble(cap_factory(5), 3)


def test_constant_mass_identity(problem, cap_factory):
    # c^T M c for the constant-1 coefficients equals the domain area; the
    # oracle integrates |det J| with a much finer rule
    space = cap_factory(5)
    c = space.constant_coeffs(1.0)
    fine = assemble(space, 12)
    assert abs(c @ problem.mass @ c - domain_area(fine)) < 1e-9


def test_stiffness_annihilates_constants(problem, cap_factory):
    c = cap_factory(5).constant_coeffs(1.0)
    assert np.max(np.abs(problem.stiffness @ c)) < 1e-9


def test_mass_symmetric_and_positive(problem):
    assert np.max(np.abs(problem.mass - problem.mass.T)) < 1e-12
    assert np.linalg.eigvalsh(problem.mass).min() > 0.0


def test_stiffness_positive_semidefinite(problem):
    eigs = np.linalg.eigvalsh((problem.stiffness + problem.stiffness.T) / 2)
    assert eigs.min() > -1e-10


def test_quadrature_robustness(cap_factory):
    # entrywise stability once the rule has converged on the rational
    # stiffness integrand (the mass integrand is polynomial and converges
    # much earlier)
    space = cap_factory(5)
    a = assemble(space, 12)
    b = assemble(space, 14)
    assert np.max(np.abs(a.mass - b.mass)) < 1e-10
    assert np.max(np.abs(a.stiffness - b.stiffness)) < 1e-10


def test_projection_reproduces_members(problem, cap_factory, rng):
    space = cap_factory(5)
    c_star = rng.standard_normal(space.dimension)
    member = SpaceMember(space, c_star)
    c = l2_project(problem, member.value)
    assert np.max(np.abs(c - c_star)) < 1e-9


def test_projection_of_zero(problem):
    c = l2_project(problem, lambda x: 0.0)
    assert np.max(np.abs(c)) < 1e-12


def test_projection_error_shrinks_with_degree():
    def target(x):
        return float(np.sin(1.7 * x[0] + 0.3) * np.exp(0.4 * x[1]))

    errors = []
    for bidegree in ((3, 3), (4, 4)):
        complex_ = build_complex(5, bidegree)
        space = build_gsmooth_space(complex_, 1)
        make_geometry(space)
        prob = assemble(space, 8)
        coeffs = l2_project(prob, target)
        errors.append(l2_error(prob, coeffs, target))
    assert errors[1] < errors[0] / 2.0


def test_reaction_recovers_member(cap_factory, rng):
    space = cap_factory(5)
    prob = assemble(space, 8)
    c_star = rng.standard_normal(space.dimension)
    member = SpaceMember(space, c_star)
    c = solve_reaction(prob, member.reaction_rhs, member.value)
    assert np.max(np.abs(c - c_star)) < 1e-6


def test_reaction_zero_data_gives_zero(problem):
    c = solve_reaction(problem, lambda x: 0.0, lambda x: 0.0)
    assert np.max(np.abs(c)) < 1e-10


def test_reaction_beats_best_constant_fit(cap_factory):
    # out-of-space smooth target: the solve must do far better than the
    # best constant approximation
    def u_exact(x):
        return float(np.sin(x[0]) * np.cos(0.8 * x[1]))

    def rhs(x):
        # (-laplace + 1) u for the target above
        return float((1.64 + 1.0) * u_exact(x))

    space = cap_factory(5)
    prob = assemble(space, 8)
    c = solve_reaction(prob, rhs, u_exact)
    err = l2_error(prob, c, u_exact)
    ones = space.constant_coeffs(1.0)
    best_c = l2_project(prob, u_exact) @ prob.mass @ ones / (ones @ prob.mass @ ones)
    const_err = l2_error(prob, best_c * ones, u_exact)
    assert err < const_err / 10.0


def test_solution_field_is_smooth(cap_factory, rng):
    # the solved coefficients feed back through the jet verifier
    space = cap_factory(5)
    prob = assemble(space, 8)
    member = SpaceMember(space, rng.standard_normal(space.dimension))
    c = solve_reaction(prob, member.reaction_rhs, member.value)
    elements = make_elements(space, c)
    for rec in space.complex.edges:
        report = lemma_check(elements[rec.patch_a], elements[rec.patch_b],
                             rec.rho, 1, 25, tol=1e-7)
        assert report.verdict


def test_assemble_requires_geometry():
    space = build_gsmooth_space(build_complex(3), 1)
    with pytest.raises(ContractError):
        assemble(space)


def test_fold_detection(cap_factory):
    # flipping one geometry patch's orientation must abort assembly
    space = cap_factory(5)
    import copy

    broken = copy.copy(space.complex)
    broken.geometry = list(space.complex.geometry)
    net = np.array(broken.geometry[0].control_net)
    net[..., 1] *= -1.0
    from gsmooth.patches import TensorPatch

    broken.geometry[0] = TensorPatch(net)
    crippled = type(space)(broken, space.k, space.basis, space.constraint_residual)
    with pytest.raises(FoldError):
        assemble(crippled)


def test_space_member_point_location(cap_factory, rng):
    space = cap_factory(5)
    c = rng.standard_normal(space.dimension)
    member = SpaceMember(space, c)
    for pi in (0, 3):
        u = rng.random(2) * 0.8 + 0.1
        x = space.complex.geometry[pi].eval(u)
        patch, u_found = member.locate(x)
        assert np.linalg.norm(
            space.complex.geometry[patch].eval(u_found) - x
        ) < 1e-11
