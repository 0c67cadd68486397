import pytest
from hypothesis import given, strategies as st

from stochbayes.bayes import InferenceInstance, infer
from stochbayes.compiler import classify, compile_text, emit, load, parse
from stochbayes.errors import DslError, UnsupportedStructureError
from stochbayes.netlist import run_netlist

TEMPLATES = ["route", "two_parent", "one_parent_two_child"]


@pytest.mark.parametrize("name", TEMPLATES)
def test_golden_netlist_equality(golden, name):
    src = (golden / f"{name}.bnet").read_text()
    plan = compile_text(src, f"{name}.bnet")
    assert emit(plan) == (golden / f"{name}.net").read_text()


@pytest.mark.parametrize("name", TEMPLATES)
def test_golden_reload_is_identity(golden, name):
    text = (golden / f"{name}.net").read_text()
    assert emit(load(text)) == text


def test_classification(golden):
    kinds = [classify(parse((golden / f"{n}.bnet").read_text())) for n in TEMPLATES]
    assert kinds == ["one-parent-one-child", "two-parent-one-child", "one-parent-two-child"]


def test_diamond_rejected(golden):
    with pytest.raises(UnsupportedStructureError) as ei:
        compile_text((golden / "diamond.bnet").read_text(), "diamond.bnet")
    msg = ei.value.format()
    assert msg.startswith("diamond.bnet:2:3: unsupported structure")
    assert "A1->B1" in msg


def test_compiled_route_matches_infer(golden):
    plan = compile_text((golden / "route.bnet").read_text())
    run = run_netlist(plan.netlist, 20_000, seed=5)
    rep = infer(InferenceInstance(0.57, 0.72, 0.6), 20_000, seed=5)
    assert run.outputs["P(A|B)"].value == pytest.approx(rep.posterior, abs=0.005)


def test_compiled_two_parent_matches_structure_eval(golden):
    plan = load((golden / "two_parent.net").read_text())
    run = run_netlist(plan.netlist, 100_000, seed=1)
    assert run.outputs["P(B)"].value == pytest.approx(0.25, abs=0.005)


def test_sne_allocation_groups_child_taps(golden):
    plan = compile_text((golden / "route.bnet").read_text())
    assert plan.sne_allocation["B"]["sne"] != plan.sne_allocation["A"]["sne"]
    assert len(plan.sne_allocation["B"]["taps"]) == 2


def _err(text):
    with pytest.raises(DslError) as ei:
        parse(text, "t.bnet")
    return ei.value


def test_out_of_range_literal_position():
    e = _err("network n {\n  node A { P(A) = 0.5 }\n  node B | A { P(B|A) = 1.3; P(B|~A) = 0.2 }\n"
             "  query P(A|B)\n}\n")
    line3 = "  node B | A { P(B|A) = 1.3; P(B|~A) = 0.2 }"
    assert (e.line, e.col) == (3, line3.index("1.3") + 1)
    assert "1.3" in e.format()


def test_missing_table_entry():
    e = _err("network n {\n node A { P(A)=0.5 }\n node B | A { P(B|A)=0.5 }\n query P(A|B)\n}")
    assert "needs 2 probability entries, found 1" in e.message
    assert e.line == 3


def test_unknown_parent_and_duplicate_node():
    assert "Z" in _err("network n { node B | Z { P(B|Z)=0.1; P(B|~Z)=0.2 } query P(B) }").message
    assert "duplicate" in _err(
        "network n { node A { P(A)=0.5 } node A { P(A)=0.4 } query P(A) }").message.lower()


def test_syntax_error_location():
    e = _err("network n {\n  node A { P(A) 0.5 }\n}")
    assert e.line == 2


def test_comments_and_bang_negation():
    spec = parse("# header\nnetwork n { node A { P(A)=0.5 } # trailing\n"
                 " node B | A { P(B|A)=0.7; P(B|!A)=0.1 } query P(A|B) }")
    assert spec.table("B") == (0.1, 0.7)


def test_query_on_unknown_variable():
    assert "Q" in _err("network n { node A { P(A)=0.5 } node B | A { P(B|A)=0.7; P(B|~A)=0.1 }"
                       " query P(Q|B) }").message


@given(st.sampled_from(["0", "1", "0.25", ".5", "1e-1", "1.0"]))
def test_number_forms(num):
    spec = parse(f"network n {{ node A {{ P(A) = {num} }} node B | A {{ P(B|A)=0.5; P(B|~A)=0.5 }}"
                 " query P(A|B) }")
    assert spec.prior("A") == float(num)
