import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import gen
from jacobi_frames.field import DomainError, RatFunc
from jacobi_frames.forms import DiffForm, UsageError, coeff_of, ext_d, parse_form, wedge
from jacobi_frames.pfaffian import (
    NormalizationError,
    ObstructionError,
    TorsionError,
    certificate,
    in_solution_space,
    normalize,
    obstruction,
    prolong,
    reduce,
    restrict,
    solve_torsion,
    verify_congruence,
)
from jacobi_frames.spaceform import build_unitary_model

seeds = st.integers(min_value=0, max_value=10**9)
INDEP = ["w1", "w2", "w3"]

NONHOPF_GENERATORS = [
    ("theta0", "w4"),
    ("theta1", "w41 - a*w1 - b*w2"),
    ("theta2", "w42 - b*w1 - ((b^2 - c)/a)*w2"),
    ("theta3", "w43 + (c/a)*w3"),
]
NONHOPF_PI = [
    ("pi1", "da + (3*b*(a^2 - c)/a)*w3"),
    ("pi2", "db + ((3*a^2*b^2 + c^2 - c*b^2)/a^2)*w3"),
    ("pi3", "b*w32 + 4*a*b*w1 + ((4*a^2*b^2 - c^2 + c*b^2)/a^2)*w2"),
]
NONHOPF_PATTERN = ["a", "b", "0", "b", "(b^2 + c)/a", "0", "0", "0", "c/a"]

# eigenvalue data (b, l) with a Lie-parallel structure Jacobi operator
LIE_GENERATORS = [
    ("theta0", "w4"),
    ("theta1", "w41 + (c/l)*w1 - b*w2"),
    ("theta2", "w42 - b*w1 - l*w2"),
    ("theta3", "w43 - l*w3"),
]
LIE_PI = [
    ("pi1", "dl - 3*b*l*w3"),
    ("pi2", "db + (l^2 - b^2)*w3"),
    ("pi3", "b*w32 - (b*(3*l^2 + 4*c)/l)*w1 - (b^2 + l^2)*w2"),
]


class Env:
    """Named forms and a parser bound to the current system's model."""

    def __init__(self, variables, generators, pi=(), assume=("a", "b", "c"), c=None):
        space = build_unitary_model(variables, c)
        self.model = space.model
        self.bindings = {} if c is None else {"c": RatFunc(c)}
        self.named = {}
        gens = [(n, self.parse(t)) for n, t in generators]
        self.named.update(gens)
        self.pi = [(n, self.parse(t)) for n, t in pi]
        self.named.update(self.pi)
        asm = [RatFunc.parse(x, self.bindings) for x in assume]
        self.sys = normalize(self.model, gens, INDEP, asm)

    def parse(self, text, model=None):
        model = model or self.model
        return parse_form(text, model.coframe, self.named, self.bindings, model)

    def on(self, sys, text):
        self.named.update(sys.named_forms())
        return self.parse(text, sys.model)


@pytest.fixture(scope="module")
def nonhopf():
    return Env(["a", "b"], NONHOPF_GENERATORS, NONHOPF_PI)


@pytest.fixture(scope="module")
def prolonged(nonhopf):
    return prolong(nonhopf.sys, nonhopf.pi, NONHOPF_PATTERN, "p", ["theta4", "theta5", "theta6"])


# -- normalize ----------------------------------------------------------------


def test_leading_elements(nonhopf):
    assert nonhopf.sys.leading == ("w4", "w41", "w42", "w43")
    assert not set(nonhopf.sys.leading) & set(INDEP)


def test_prolonged_leading_elements_use_b_inversion(prolonged):
    assert prolonged.leading[4:] == ("da", "db", "w32")
    assert ("w32", RatFunc.var("b")) in prolonged.inversions


def test_generator_on_independence_form_is_rejected():
    model = build_unitary_model([]).model
    with pytest.raises(NormalizationError, match="w1"):
        normalize(model, [model.coframe.basis("w1")], INDEP)


def test_inversion_by_unassumed_quantity_is_rejected():
    model = build_unitary_model(["a"]).model
    g = parse_form("(a - 1)*w4", model.coframe)
    with pytest.raises(NormalizationError, match="not known to be nonzero"):
        normalize(model, [g], INDEP, ["a"])


def test_dependent_generators_are_rejected():
    model = build_unitary_model([]).model
    w4 = model.coframe.basis("w4")
    with pytest.raises(NormalizationError, match="dependent"):
        normalize(model, [w4, w4 * 2], INDEP)


def test_solved_form_shape(nonhopf):
    sys = nonhopf.sys
    for lead, expr in sys.solved_form.items():
        assert lead not in expr.support()
        assert not expr.support() & set(sys.leading)


# -- reduce and congruences ---------------------------------------------------


def test_generators_reduce_to_zero(nonhopf):
    for g in nonhopf.sys.generators:
        assert reduce(nonhopf.sys, g).is_zero()


def test_d_theta0_reduces_to_zero(nonhopf):
    assert reduce(nonhopf.sys, nonhopf.parse("d(theta0)")).is_zero()


@pytest.mark.parametrize(
    "lhs, rhs",
    [
        ("-d(theta1)", "pi1^w1 + pi2^w2 + pi3^w3"),
        ("-d(theta2)", "pi2^w1 + ((2*b/a)*pi2 - ((b^2 - c)/a^2)*pi1)^w2 + (b/a)*pi3^w3"),
        ("-d(theta3)", "pi3^(w1 + (b/a)*w2) + (c/a^2)*pi1^w3"),
    ],
)
def test_nonhopf_congruences(nonhopf, lhs, rhs):
    out = verify_congruence(nonhopf.sys, nonhopf.parse(lhs), nonhopf.parse(rhs))
    assert out.passed and out.residual.is_zero()


def test_failed_congruence_reports_residual(nonhopf):
    lhs = nonhopf.parse("-d(theta1)")
    out = verify_congruence(nonhopf.sys, lhs, DiffForm.zero(nonhopf.model.coframe, 2))
    assert not out.passed
    assert out.residual == reduce(nonhopf.sys, nonhopf.parse("pi1^w1 + pi2^w2 + pi3^w3"))


def test_congruence_degree_mismatch(nonhopf):
    with pytest.raises(UsageError):
        verify_congruence(nonhopf.sys, nonhopf.parse("w1"), nonhopf.parse("w1^w2"))


@pytest.fixture(scope="module")
def lie_parallel():
    return Env(["b", "l"], LIE_GENERATORS, LIE_PI, assume=("b", "l", "c"))


def test_lie_parallel_d_theta2(lie_parallel):
    env = lie_parallel
    assert reduce(env.sys, env.parse("d(theta2)")) == reduce(env.sys, env.parse("-(pi2^w1 + pi1^w2)"))


# -- torsion and prolongation -------------------------------------------------


def test_nonhopf_torsion_is_one_dimensional(nonhopf):
    sol = solve_torsion(nonhopf.sys, nonhopf.pi)
    assert sol.rank == 8 and sol.dimension == 1
    assert in_solution_space(sol, [RatFunc.parse(x) for x in NONHOPF_PATTERN])
    assert not in_solution_space(sol, [1] + [0] * 8)


def test_closed_system_has_full_torsion_space():
    model = build_unitary_model(["a", "b", "e"]).model
    cf = model.coframe
    closed = normalize(model, [("theta0", cf.basis("da"))], INDEP)
    assert ext_d(model, cf.basis("da")).is_zero()
    sol = solve_torsion(closed, [("pi1", cf.basis("db")), ("pi2", cf.basis("de")), ("pi3", cf.basis("w4"))])
    assert sol.consistent and sol.rank == 0 and sol.dimension == 9


def test_lie_parallel_torsion_and_terminal_obstruction(lie_parallel):
    env = lie_parallel
    sol = solve_torsion(env.sys, env.pi)
    assert sol.dimension == 1
    pattern = [1, 0, 0, 0, 1, 0, 0, 0, 1]
    assert in_solution_space(sol, pattern)
    sys = prolong(env.sys, env.pi, pattern, "p", ["theta4", "theta5", "theta6"], torsion=sol)
    for i, name in enumerate(("theta4", "theta5", "theta6"), start=1):
        assert sys.generator(name) == env.on(sys, f"pi{i} - p*w{i}")
    out = obstruction(sys, env.on(sys, "d(theta5)^w3 + d(theta6)^w2"))
    assert coeff_of(out, ("w1", "w2", "w3")) == RatFunc.parse("24*c*b^2/l")


def test_torsion_requires_a_single_free_element(nonhopf):
    bad = [("pi1", nonhopf.parse("da + db"))]
    with pytest.raises(TorsionError):
        solve_torsion(nonhopf.sys, bad, ["da", "db"])


def test_prolonged_generators_match_expected(nonhopf, prolonged):
    expect = {
        "theta4": "pi1 - p*(a*w1 + b*w2)",
        "theta5": "pi2 - p*(b*w1 + ((b^2 + c)/a)*w2)",
        "theta6": "pi3 - p*(c/a)*w3",
    }
    for name, text in expect.items():
        assert prolonged.generator(name) == nonhopf.on(prolonged, text)


def test_prolong_rejects_non_solution_pattern(nonhopf):
    sol = solve_torsion(nonhopf.sys, nonhopf.pi)
    with pytest.raises(TorsionError):
        prolong(nonhopf.sys, nonhopf.pi, [1] + [0] * 8, "p", torsion=sol)


def test_zero_pattern_prolongation_imposes_pi_equal_zero(nonhopf):
    sys = prolong(nonhopf.sys, nonhopf.pi, [0] * 9, "p")
    for (_, pi), name in zip(nonhopf.pi, ("theta4", "theta5", "theta6")):
        assert sys.generator(name) == pi.over(sys.coframe)
        assert reduce(sys, pi.over(sys.coframe)).is_zero()


# -- obstructions and restriction ---------------------------------------------


def _coef(form):
    return coeff_of(form, ("w1", "w2", "w3")) if form.degree == 3 else coeff_of(form, ("w1", "w2"))


def test_first_obstructions(nonhopf, prolonged):
    one = obstruction(prolonged, nonhopf.on(prolonged, "d(theta4)^(a*w1 + b*w2)"))
    assert one == nonhopf.on(prolonged, "(8*c*(a^2 - c)*p/a) w1^w2^w3")
    two = obstruction(prolonged, nonhopf.on(prolonged, "d(a*theta5 - b*theta4)^w2"))
    assert two == nonhopf.on(prolonged, "(2*c*(b^2 - 2*(a^2 - c))*p/a) w1^w2^w3")
    for x in (one, two):
        coef = _coef(x)
        assert coef.num.degree_in("p") == 1 and coef.substitute({"p": 0}).is_zero()


def test_unclosed_obstruction_is_reported(nonhopf, prolonged):
    with pytest.raises(ObstructionError, match="not closed"):
        obstruction(prolonged, nonhopf.on(prolonged, "d(theta4)"))


def test_restricted_obstructions(nonhopf, prolonged):
    sys = restrict(prolonged, {"p": 0})
    assert "dp" not in sys.coframe
    for name, pi in zip(("theta4", "theta5", "theta6"), ("pi1", "pi2", "pi3")):
        assert sys.generator(name) == nonhopf.on(sys, pi)
    three = obstruction(sys, nonhopf.on(sys, "d(a*theta5 - b*theta4)"))
    assert three == nonhopf.on(sys, "(c*(2*b^2 + c)*(4*a^2 + b^2 - c)/a^2) w1^w2")
    four = obstruction(sys, nonhopf.on(sys, "d(theta6)^w2"))
    assert four == nonhopf.on(sys, "(c*(10*a^2*b^2 - c*(4*a^2 + b^2 - c))/a^3) w1^w2^w3")


def test_restrict_empty_is_identity(prolonged):
    assert restrict(prolonged, {}) is prolonged


def test_restrict_assumed_nonzero_to_zero(nonhopf):
    with pytest.raises(DomainError):
        restrict(nonhopf.sys, {"a": 0})


def test_restrict_unknown_or_symbolic(nonhopf):
    with pytest.raises(UsageError):
        restrict(nonhopf.sys, {"zz": 0})
    with pytest.raises(UsageError):
        restrict(nonhopf.sys, {"a": "b"})


@pytest.mark.parametrize("c", [1, -1])
def test_pinned_curvature_first_obstruction(c):
    env = Env(["a", "b"], NONHOPF_GENERATORS, NONHOPF_PI, c=c)
    sys = prolong(env.sys, env.pi, [RatFunc.parse(x, env.bindings) for x in NONHOPF_PATTERN], "p",
                  ["theta4", "theta5", "theta6"])
    one = obstruction(sys, env.on(sys, "d(theta4)^(a*w1 + b*w2)"))
    assert one == env.on(sys, "(8*c*(a^2 - c)*p/a) w1^w2^w3")


# -- properties ---------------------------------------------------------------


@settings(max_examples=100)
@given(seeds)
def test_reduce_is_idempotent(seed):
    rng = random.Random(seed)
    sys = _random_system_for(rng)
    x = gen.form(rng, sys.coframe, rng.randint(1, 2))
    once = reduce(sys, x)
    assert reduce(sys, once) == once
    assert not once.support() & set(sys.leading)


@settings(max_examples=60)
@given(seeds)
def test_reduction_certificate(seed):
    rng = random.Random(seed)
    sys = _random_system_for(rng)
    x = gen.form(rng, sys.coframe, rng.randint(1, 2))
    etas = certificate(sys, x)
    acc = x - reduce(sys, x)
    for name, eta in etas.items():
        acc = acc - wedge(eta, sys.generator(name))
    assert acc.is_zero()


_BASE = {}


def _random_system_for(rng):
    if "env" not in _BASE:
        _BASE["env"] = Env(["a", "b"], NONHOPF_GENERATORS, NONHOPF_PI)
    env = _BASE["env"]
    return env.sys if rng.random() < 0.5 else _prolonged_base(env)


def _prolonged_base(env):
    if "prolonged" not in _BASE:
        _BASE["prolonged"] = prolong(env.sys, env.pi, NONHOPF_PATTERN, "p", ["theta4", "theta5", "theta6"])
    return _BASE["prolonged"]
