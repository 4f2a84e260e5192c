from math import comb

import numpy as np
import pytest

from gsmooth.errors import ContractError, DomainError
from gsmooth.patches import EdgeId, TensorPatch


def bernstein_sum(patch, u):
    """Direct Bernstein double sum -- the naive oracle for eval()."""
    p, q = patch.degree_u, patch.degree_v
    out = np.zeros(patch.out_dim)
    for i in range(p + 1):
        bu = comb(p, i) * u[0] ** i * (1 - u[0]) ** (p - i)
        for j in range(q + 1):
            bv = comb(q, j) * u[1] ** j * (1 - u[1]) ** (q - j)
            out += bu * bv * patch.control_net[i, j]
    return out


def test_eval_constant():
    patch = TensorPatch.constant([4.0], 2, 3)
    for u in [(0, 0), (0.3, 0.9), (1, 1)]:
        assert np.allclose(patch.eval(u), [4.0])


def test_eval_identity_center():
    patch = TensorPatch.identity()
    assert np.allclose(patch.eval((0.5, 0.5)), [0.5, 0.5])


def test_eval_matches_direct_sum(rng):
    patch = TensorPatch(rng.standard_normal((4, 4, 3)))
    for _ in range(10):
        u = rng.random(2)
        assert np.max(np.abs(patch.eval(u) - bernstein_sum(patch, u))) < 1e-13


def test_eval_domain_error():
    patch = TensorPatch.identity()
    with pytest.raises(DomainError):
        patch.eval((-0.2, 0.5))
    with pytest.raises(DomainError):
        patch.eval((0.5, 1.2))


def test_corner_reproduction(rng):
    patch = TensorPatch(rng.standard_normal((4, 5, 2)))
    net = patch.control_net
    assert np.array_equal(patch.eval((0, 0)), net[0, 0])
    assert np.array_equal(patch.eval((1, 0)), net[-1, 0])
    assert np.array_equal(patch.eval((0, 1)), net[0, -1])
    assert np.array_equal(patch.eval((1, 1)), net[-1, -1])


def test_affine_invariance(rng):
    patch = TensorPatch(rng.standard_normal((4, 4, 2)))
    a = rng.standard_normal((2, 2))
    b = rng.standard_normal(2)
    mapped = TensorPatch(patch.control_net @ a.T + b)
    for _ in range(10):
        u = rng.random(2)
        assert np.max(np.abs(mapped.eval(u) - (a @ patch.eval(u) + b))) < 1e-12


def test_partition_of_unity():
    ones = TensorPatch.constant([1.0], 3, 3)
    for u in np.random.default_rng(3).random((20, 2)):
        assert abs(ones.eval(u)[0] - 1.0) < 1e-14


def test_derivative_zero_orders_is_same_patch(rng):
    patch = TensorPatch(rng.standard_normal((3, 4, 1)))
    again = patch.partial_derivative_patch(0, 0)
    assert np.array_equal(again.control_net, patch.control_net)


def test_derivative_of_identity():
    du = TensorPatch.identity().partial_derivative_patch(1, 0)
    assert du.degree_u == 0
    for u in [(0.0, 0.0), (0.4, 0.9)]:
        assert np.allclose(du.eval((0.0, u[1])), [1.0, 0.0])


def test_derivative_matches_central_differences(rng):
    patch = TensorPatch(rng.standard_normal((4, 3, 1)))
    deriv = patch.partial_derivative_patch(2, 1)
    assert (deriv.degree_u, deriv.degree_v) == (1, 1)
    # central stencils are truncation-exact on bidegree (3,2); the step is
    # chosen to keep the subtractive-cancellation floor eps/h^3 below 1e-6
    h = 1e-3
    for _ in range(20):
        u = 0.1 + 0.8 * rng.random(2)
        fd_u = []
        for dv in (-h, h):
            vals = [patch.eval((u[0] + s * h, u[1] + dv))[0] for s in (-1, 0, 1)]
            fd_u.append((vals[0] - 2 * vals[1] + vals[2]) / h**2)
        fd = (fd_u[1] - fd_u[0]) / (2 * h)
        assert abs(deriv.eval(u)[0] - fd) < 1e-6


def test_over_differentiation_returns_zero_patch(rng):
    patch = TensorPatch(rng.standard_normal((3, 3, 2)))
    zero = patch.partial_derivative_patch(5, 0)
    assert (zero.degree_u, zero.degree_v) == (0, 0)
    assert np.all(zero.control_net == 0.0)


def test_mixed_derivative_order_interchange(rng):
    # integer nets make both difference orders exact, hence bitwise equal
    patch = TensorPatch(rng.integers(-5, 6, size=(4, 4, 1)).astype(float))
    a = patch.partial_derivative_patch(1, 0).partial_derivative_patch(0, 1)
    b = patch.partial_derivative_patch(0, 1).partial_derivative_patch(1, 0)
    c = patch.partial_derivative_patch(1, 1)
    assert np.array_equal(a.control_net, b.control_net)
    assert np.array_equal(a.control_net, c.control_net)


def test_elevate_same_degree_is_identity(rng):
    patch = TensorPatch(rng.standard_normal((4, 4, 2)))
    same = patch.elevate(3, 3)
    assert np.array_equal(same.control_net, patch.control_net)


def test_elevate_linear_patch_stays_linear(rng):
    patch = TensorPatch.identity()
    lifted = patch.elevate(3, 3)
    for _ in range(10):
        u = rng.random(2)
        assert np.max(np.abs(lifted.eval(u) - u)) < 1e-14


def test_elevate_eval_roundtrip(rng):
    patch = TensorPatch(rng.standard_normal((3, 3, 2)))
    lifted = patch.elevate(4, 3)
    for _ in range(50):
        u = rng.random(2)
        assert np.max(np.abs(lifted.eval(u) - patch.eval(u))) < 1e-13


def test_elevate_rejects_reduction():
    patch = TensorPatch(np.zeros((4, 4, 1)))
    with pytest.raises(ContractError):
        patch.elevate(2, 3)


def test_edge_trace_corner():
    patch = TensorPatch(np.arange(32, dtype=float).reshape(4, 4, 2))
    assert np.array_equal(patch.edge_trace(EdgeId.U0, 0.0), patch.control_net[0, 0])


def test_edge_trace_identity_conventions():
    patch = TensorPatch.identity()
    s = 0.3
    assert np.allclose(patch.edge_trace(EdgeId.V1, s), [s, 1.0])
    assert np.allclose(patch.edge_trace(EdgeId.V0, s), [s, 0.0])
    assert np.allclose(patch.edge_trace(EdgeId.U0, s), [0.0, s])
    assert np.allclose(patch.edge_trace(EdgeId.U1, s), [1.0, s])


def test_edge_trace_consistent_with_eval(rng):
    patch = TensorPatch(rng.standard_normal((4, 4, 3)))
    for edge in EdgeId:
        for s in rng.random(20):
            assert np.array_equal(patch.edge_trace(edge, s), patch.eval(edge.point(s)))


def test_edge_rows_roundtrip(rng):
    patch = TensorPatch(rng.standard_normal((4, 5, 2)))
    for edge in EdgeId:
        back = TensorPatch.from_edge_rows(patch.edge_rows(edge), edge)
        assert np.array_equal(back.control_net, patch.control_net)


def test_control_net_validation():
    with pytest.raises(ContractError):
        TensorPatch(np.zeros((3, 3)))  # missing component axis
    with pytest.raises(ContractError):
        TensorPatch(np.full((2, 2, 1), np.nan))
    with pytest.raises(ContractError):
        TensorPatch(np.zeros((2, 2, 4)))  # unsupported output dimension


def test_net_is_immutable(rng):
    patch = TensorPatch(rng.standard_normal((2, 2, 1)))
    with pytest.raises(ValueError):
        patch.control_net[0, 0, 0] = 1.0
