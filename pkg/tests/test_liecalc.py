import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jacobi_frames.field import Poly
from jacobi_frames.liecalc import (
    DimensionError,
    PolyTensor11,
    PolyVectorField,
    battery,
    coords,
    eq15_check,
    generic_field,
    generic_poly,
    lie_deriv_tensor,
    partial,
    random_field,
    random_poly,
    random_tensor,
    tau_step,
    vf_bracket,
)

seeds = st.integers(min_value=0, max_value=10**9)
x1, x2, x3 = (Poly.var(f"x{i}") for i in (1, 2, 3))


def lie_by_components(X, T, Y):
    """(L_X T)^i_j = X^k d_k T^i_j - T^k_j d_k X^i + T^i_k d_j X^k, contracted with Y."""
    n = X.dimension
    xs = coords(n)
    L = [[Poly() for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for j in range(n):
            acc = Poly()
            for k in range(n):
                acc = acc + X.components[k] * T.entries[i][j].diff(xs[k])
                acc = acc - T.entries[k][j] * X.components[i].diff(xs[k])
                acc = acc + T.entries[i][k] * X.components[k].diff(xs[j])
            L[i][j] = acc
    return PolyVectorField(tuple(sum((L[i][j] * Y.components[j] for j in range(n)), Poly()) for i in range(n)))


def test_bracket_examples():
    X = PolyVectorField((x1 * x2, x2 + 3))
    assert vf_bracket(X, X).is_zero()
    d1 = partial(0, 2)
    assert vf_bracket(d1, PolyVectorField((0, x1))) == partial(1, 2)


def test_dimension_mismatch():
    with pytest.raises(DimensionError):
        vf_bracket(partial(0, 2), partial(0, 3))
    with pytest.raises(DimensionError):
        lie_deriv_tensor(partial(0, 2), PolyTensor11.scalar(3, 1), partial(0, 2))
    with pytest.raises(DimensionError):
        PolyTensor11(((1, 2), (3,)))


def test_identity_tensor_has_zero_lie_derivative():
    rng = random.Random(3)
    X, Y = random_field(rng, 3, 2), random_field(rng, 3, 2)
    assert lie_deriv_tensor(X, PolyTensor11.scalar(3, 1), Y).is_zero()


def test_scalar_tensor_gives_directional_derivative():
    rng = random.Random(4)
    tau = x1**2 * x3 - x2
    X, Y = random_field(rng, 3, 2), random_field(rng, 3, 2)
    assert lie_deriv_tensor(X, PolyTensor11.scalar(3, tau), Y) == Y.scale(X.apply(tau))


def test_scaled_field_identity_examples():
    rng = random.Random(5)
    X, Y, T = random_field(rng, 3, 2), random_field(rng, 3, 2), random_tensor(rng, 3, 1)
    assert eq15_check(7, X, T, Y).passed
    one = PolyTensor11.scalar(2, 1)
    out = eq15_check(x1, partial(1, 2), one, random_field(rng, 2, 2))
    assert out.passed and out.residual.is_zero()


def test_scaled_field_identity_symbolic():
    f = generic_poly(2, 1, "f")
    X, Y = generic_field(2, 1, "X"), generic_field(2, 1, "Y")
    T = PolyTensor11(tuple(tuple(generic_poly(2, 1, f"T{i}{j}_") for j in range(2)) for i in range(2)))
    assert eq15_check(f, X, T, Y).passed


def test_scaled_field_correction_terms_matter():
    # dropping a correction term leaves a nonzero residual
    f, X, T, Y = x1, partial(1, 2), PolyTensor11(((x2, 0), (0, 1))), partial(0, 2)
    good = eq15_check(f, X, T, Y)
    assert good.passed
    lhs = lie_deriv_tensor(X.scale(f), T, Y)
    assert lhs != lie_deriv_tensor(X, T, Y).scale(f)


def test_tau_step_symbolic():
    tau = generic_poly(3, 2, "t")
    V, Y = generic_field(3, 1, "V"), generic_field(3, 1, "Y")
    assert tau_step(tau, V, Y).passed


def test_constant_tau_gives_zero():
    rng = random.Random(6)
    X, Y = random_field(rng, 4, 3), random_field(rng, 4, 3)
    assert lie_deriv_tensor(X, PolyTensor11.scalar(4, 5), Y).is_zero()


def test_battery_is_deterministic():
    first = [tuple(x for x in inst) for inst in battery(7, 6)]
    again = [tuple(x for x in inst) for inst in battery(7, 6)]
    assert first == again
    assert [inst[1].dimension for inst in first] == [2, 3, 4, 2, 3, 4]


@settings(max_examples=100)
@given(seeds)
def test_lie_derivative_matches_component_formula(seed):
    rng = random.Random(seed)
    n = rng.randint(2, 4)
    X, Y, T = random_field(rng, n, 2), random_field(rng, n, 2), random_tensor(rng, n, 2)
    assert lie_deriv_tensor(X, T, Y) == lie_by_components(X, T, Y)


@settings(max_examples=100)
@given(seeds)
def test_bracket_antisymmetry_and_jacobi(seed):
    rng = random.Random(seed)
    n = rng.randint(2, 3)
    X, Y, Z = (random_field(rng, n, 2) for _ in range(3))
    assert vf_bracket(X, Y) == -vf_bracket(Y, X)
    jac = vf_bracket(X, vf_bracket(Y, Z)) + vf_bracket(Y, vf_bracket(Z, X)) + vf_bracket(Z, vf_bracket(X, Y))
    assert jac.is_zero()


@settings(max_examples=100)
@given(seeds)
def test_scaled_field_identity_on_random_instances(seed):
    rng = random.Random(seed)
    n = rng.randint(2, 4)
    deg = lambda: rng.randint(0, 2)  # noqa: E731
    f = random_poly(rng, n, deg())
    assert eq15_check(f, random_field(rng, n, deg()), random_tensor(rng, n, deg()), random_field(rng, n, deg())).passed
