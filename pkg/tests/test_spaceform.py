import pytest

from jacobi_frames.field import RatFunc
from jacobi_frames.forms import DiffForm, UsageError, ext_d, parse_form, wedge
from jacobi_frames.spaceform import (
    BASE_COFRAME,
    ambient_curvature_forms,
    bianchi_check,
    build_unitary_model,
    connection_form,
    curvature_table,
)

SF = build_unitary_model(["a"])
CF = SF.coframe


def F(text, sf=SF):
    return parse_form(text, sf.coframe)


def test_coframe_is_base_plus_differentials():
    assert CF.names == BASE_COFRAME + ("da",)


def test_d_w4():
    assert SF.model.d_rules["w4"] == -(F("w41^w1 + w42^w2 + w43^w3"))


def test_curvature_table_entries():
    cv = SF.curvature
    assert cv[(4, 1)] == F("c*(4 w4^w1 + 2 w3^w2)")
    assert cv[(3, 2)] == F("c*(4 w3^w2 + 2 w4^w1)")
    assert cv[(4, 2)] == cv[(3, 1)] == F("c*(w3^w1 + w4^w2)")
    assert cv[(4, 3)] == cv[(1, 2)] == F("c*(w1^w2 + w4^w3)")
    for i in range(1, 5):
        for j in range(1, 5):
            assert cv[(i, j)] == -cv[(j, i)]


def test_curvature_matches_ambient_tensor():
    amb = ambient_curvature_forms(CF, RatFunc.var("c"))
    assert all(SF.curvature[k] == amb[k] for k in amb)


def test_dependent_connection_forms():
    assert connection_form(CF, 2, 1) == -CF.basis("w43")
    assert connection_form(CF, 3, 1) == CF.basis("w42")
    assert connection_form(CF, 1, 2) == CF.basis("w43")
    assert connection_form(CF, 3, 3).is_zero()


def test_rules_only_mention_coframe_elements():
    # the coframe holds only the independent connection forms, so every rule is
    # automatically free of w21, w31, ...
    assert not any(name in CF for name in ("w21", "w31", "w12", "w13", "w14", "w23", "w24", "w34"))
    for rule in SF.model.d_rules.values():
        assert rule.support() <= set(CF.names)


def test_first_bianchi_w4_row():
    acc = DiffForm.zero(CF, 3)
    for j in range(1, 5):
        acc = acc + wedge(SF.curvature[(4, j)], CF.basis(f"w{j}"))
    assert acc.is_zero()


def test_dd_examples():
    assert ext_d(SF.model, ext_d(SF.model, CF.basis("w4"))).is_zero()
    assert ext_d(SF.model, ext_d(SF.model, CF.basis("da"))).is_zero()


@pytest.mark.parametrize("c", [None, 1, -1])
def test_bianchi_report_passes(c):
    report = bianchi_check(build_unitary_model(["a", "b"], c=c))
    assert report.passed
    assert len(report.checks) == 4 + 10 + 12 + 16


def test_flat_degeneration():
    flat = build_unitary_model(c=0)
    assert all(f.is_zero() for f in flat.curvature.values())
    assert flat.model.d_rules["w41"] == F("-(w42^w21 + w43^w31)".replace("w21", "(-w43)").replace("w31", "w42"), flat)
    assert bianchi_check(flat).passed


def test_pinned_curvature():
    sf = build_unitary_model(c=-1)
    assert sf.curvature[(4, 1)] == parse_form("-(4 w4^w1 + 2 w3^w2)", sf.coframe)


def test_name_collisions():
    with pytest.raises(UsageError):
        build_unitary_model(["c"])
    with pytest.raises(UsageError):
        build_unitary_model(["a", "a"])
    with pytest.raises(UsageError):
        build_unitary_model(["w1"])


def test_curvature_table_is_independent_of_coframe_extension():
    sf = build_unitary_model(["a", "b", "p"])
    base = curvature_table(sf.coframe, RatFunc.var("c"))
    assert base[(3, 2)] == parse_form("c*(4 w3^w2 + 2 w4^w1)", sf.coframe)
