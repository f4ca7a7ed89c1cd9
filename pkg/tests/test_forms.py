import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import gen
from jacobi_frames.expr import ParseError
from jacobi_frames.field import RatFunc, var
from jacobi_frames.forms import (
    Coframe,
    DiffForm,
    StructureModel,
    UsageError,
    coeff_of,
    ext_d,
    parse_form,
    replace_basis,
    wedge,
    wedge_all,
)
from jacobi_frames.spaceform import build_unitary_model

a, b, l = var("a"), var("b"), var("l")
CF = Coframe(("w1", "w2", "w3", "w4"))
w1, w2, w3, w4 = (CF.basis(f"w{i}") for i in range(1, 5))
seeds = st.integers(min_value=0, max_value=10**9)

SPACE = build_unitary_model(["a", "b"])
MODEL = SPACE.model


def F(text, coframe=CF, **kw):
    return parse_form(text, coframe, **kw)


def test_coframe_rejects_duplicates():
    with pytest.raises(UsageError):
        Coframe(("w1", "w1"))


def test_wedge_examples():
    assert wedge(w1, w1).is_zero()
    assert wedge(w1, w2) == -wedge(w2, w1)
    lhs = wedge(w1 * a + w2 * b, w1 * b + w2 * l)
    assert lhs == wedge(w1, w2) * (a * l - b**2)


def test_wedge_with_scalars_and_mismatch():
    assert wedge(a, w1) == w1 * a
    assert wedge(a, b) == a * b
    other = Coframe(("w1", "w2"))
    with pytest.raises(UsageError):
        wedge(w1, other.basis("w1"))


def test_form_product_requires_wedge():
    with pytest.raises(UsageError):
        w1 * w2
    with pytest.raises(ParseError):
        F("w1 * w2")


def test_noncanonical_terms_rejected():
    with pytest.raises(UsageError):
        DiffForm(CF, 2, {(1, 0): 1})
    with pytest.raises(UsageError):
        DiffForm(CF, 2, {(0, 0): 1})


def test_coeff_of_examples():
    x = wedge(w1, w2) * 5
    assert coeff_of(x, ("w1", "w2")) == 5
    assert coeff_of(x, ("w1", "w3")).is_zero()
    assert coeff_of(x, (0, 1)) == 5
    with pytest.raises(UsageError):
        coeff_of(x, ("w2", "w1"))
    with pytest.raises(UsageError):
        coeff_of(x, ("w1",))
    with pytest.raises(UsageError):
        coeff_of(x, ("w1", "zz"))


def test_text_format():
    x = F("(24*c*b^2/l) w1^w2^w3")
    assert x.to_text() == "(24*c*b^2)/(l) w1^w2^w3"
    assert F("w2^w1 + 3 w3^w4").to_text() == "-w1^w2 + (3) w3^w4"
    assert DiffForm.zero(CF, 2).to_text() == "0"
    assert F("(a + b) w1").to_text() == "(a + b) w1"


def test_parse_power_vs_wedge():
    assert F("a^2 w1") == w1 * a**2
    assert F("(w1 + w2)^w3") == wedge(w1, w3) + wedge(w2, w3)
    assert F("a w1 ^ w2", degree=2) == wedge(w1, w2) * a
    with pytest.raises(UsageError):
        F("w1", degree=2)


def test_replace_basis():
    x = wedge(w1, w2)
    assert replace_basis(x, {"w1": w2 + w3}) == wedge(w3, w2)


def test_over_reorders_with_sign():
    rev = Coframe(("w2", "w1", "w3", "w4"))
    x = wedge(w1, w2).over(rev)
    assert x == -wedge(rev.basis("w2"), rev.basis("w1"))
    with pytest.raises(UsageError):
        w1.over(Coframe(("w2", "w3")))


def test_ext_d_examples():
    assert ext_d(MODEL, RatFunc.var("c")).is_zero()
    w1m = MODEL.basis("w1")
    assert ext_d(MODEL, w1m * a) == wedge(MODEL.basis("da"), w1m) + MODEL.d_rules["w1"] * a
    assert ext_d(MODEL, 7).is_zero()


def test_structure_model_validation():
    flat = Coframe(("e1", "dx"))
    zero = DiffForm.zero(flat, 2)
    with pytest.raises(UsageError):
        StructureModel(flat, {"e1": zero})
    with pytest.raises(UsageError):
        StructureModel(flat, {"e1": zero, "dx": wedge(flat.basis("e1"), flat.basis("dx"))}, (("x", "dx"),))
    with pytest.raises(UsageError):
        StructureModel(flat, {"e1": flat.basis("dx"), "dx": zero})
    m = StructureModel(flat, {"e1": zero}, (("x", "dx"),))
    assert m.d_rules["dx"].is_zero()


def test_model_extend_and_restrict():
    m2 = MODEL.extend("p")
    assert "dp" in m2.coframe and m2.variable_names[-1] == "p"
    with pytest.raises(UsageError):
        m2.extend("p")
    m3 = m2.restrict({"p": 0})
    assert "dp" not in m3.coframe


# -- properties ---------------------------------------------------------------


@settings(max_examples=120)
@given(seeds)
def test_wedge_graded_anticommutative(seed):
    rng = random.Random(seed)
    p, q = rng.randint(0, 2), rng.randint(0, 2)
    x, y = gen.form(rng, CF, p), gen.form(rng, CF, q)
    assert wedge(x, y) == wedge(y, x) * (-1) ** (p * q)


@settings(max_examples=120)
@given(seeds)
def test_wedge_associative_and_bilinear(seed):
    rng = random.Random(seed)
    x, y, z = (gen.form(rng, CF, rng.randint(0, 2)) for _ in range(3))
    assert wedge(wedge(x, y), z) == wedge(x, wedge(y, z)) == wedge_all(x, y, z)
    y2 = gen.form(rng, CF, y.degree)
    s = gen.ratfunc(rng)
    assert wedge(x, y + y2 * s) == wedge(x, y) + wedge(x, y2) * s


@settings(max_examples=120)
@given(seeds)
def test_ext_d_antiderivation(seed):
    rng = random.Random(seed)
    p, q = rng.randint(0, 2), rng.randint(0, 2)
    x, y = gen.form(rng, MODEL.coframe, p), gen.form(rng, MODEL.coframe, q)
    lhs = ext_d(MODEL, wedge(x, y))
    rhs = wedge(ext_d(MODEL, x), y) + wedge(x, ext_d(MODEL, y)) * (-1) ** p
    assert lhs == rhs


@settings(max_examples=100)
@given(seeds)
def test_dd_vanishes_on_scalars(seed):
    rng = random.Random(seed)
    f = gen.ratfunc(rng)
    flat = Coframe(("e1", "da", "db", "dc"))
    model = StructureModel(
        flat,
        {"e1": wedge(flat.basis("e1"), flat.basis("da"))},
        (("a", "da"), ("b", "db"), ("c", "dc")),
    )
    assert ext_d(model, ext_d(model, f)).is_zero()
    assert ext_d(MODEL, ext_d(MODEL, f)).is_zero()


@settings(max_examples=100)
@given(seeds)
def test_form_text_round_trip(seed):
    rng = random.Random(seed)
    x = gen.form(rng, CF, rng.randint(1, 3))
    assert F(x.to_text(), degree=x.degree) == x
