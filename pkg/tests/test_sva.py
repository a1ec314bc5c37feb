"""Assertion parsing, rendering, and AST helpers."""

import pytest
from hypothesis import given

from svaport import corpus
from svaport import expr as ex
from svaport.errors import ParseError, UnsupportedConstructError
from svaport.sva import (SeqExpr, normalize_overlapped, parse_assertion,
                         parse_assertions, render_assertion, signals_of)

from . import gen

CONCISE = corpus.golden_path("source_assertion.sva").read_text()
NAMED = corpus.golden_path("ported_assertion.sva").read_text()


def test_concise_directive_shape():
    a = parse_assertion(CONCISE)
    assert a.name is None and a.label is None and a.action is None
    assert (a.clock, a.clock_edge) == ("clk", "posedge")
    assert a.disable == ex.Ident("rst")
    assert a.implication == "|->"
    assert a.antecedent == SeqExpr(
        ((0, ex.Binary("!=", ex.Ident("CsrWtAddr"), ex.Ident("MstatusAddr"))),))
    assert a.consequent == SeqExpr(
        ((0, ex.Unary("!", ex.Ident("WriteEn_mstatus"))),))


def test_named_property_shape():
    a = parse_assertion(NAMED)
    assert a.name == "csr_write_with_matchaddr"
    assert a.label == "CSR_2"
    assert a.action == "Test_failed_for_mstatus_write"
    assert a.disable is None
    assert a.clock == "clk_i"
    ante = a.antecedent.steps[0][1]
    cons = a.consequent.steps[0][1]
    assert isinstance(ante, ex.Binary) and ante.op == "&&"
    assert isinstance(cons, ex.Binary) and cons.op == "&&"


def test_effective_name_precedence():
    named = parse_assertion(NAMED)
    assert named.effective_name() == "csr_write_with_matchaddr"
    bare = parse_assertion(CONCISE)
    assert bare.effective_name() == "<anonymous>"
    labelled = parse_assertion(
        "L1: assert property (@(posedge clk) a |-> b);")
    assert labelled.effective_name() == "L1"


def test_signals_of_matches_independent_walk():
    for name in corpus.MODULES:
        for a in parse_assertions(corpus.assertions_path(name).read_text()):
            expected = set()
            for _, term in a.antecedent.steps + a.consequent.steps:
                expected |= {n.name if isinstance(n, ex.Ident) else n.base
                             for n in ex.walk(term)
                             if isinstance(n, (ex.Ident, ex.Select))}
            if a.disable is not None:
                expected |= ex.idents_of(a.disable)
            assert signals_of(a) == expected
            assert a.clock not in signals_of(a) or a.clock in expected


def test_source_assertion_signal_set():
    a = parse_assertion(CONCISE)
    assert signals_of(a) == {"CsrWtAddr", "MstatusAddr", "WriteEn_mstatus", "rst"}


def test_ported_assertion_signal_set():
    a = parse_assertion(NAMED)
    assert signals_of(a) == {"csr_addr_i", "CSR_MSTATUS", "csr_op_i",
                             "CSR_OP_WRITE", "csr_we_int", "mstatus_en"}


def test_corpus_round_trip():
    for name in corpus.MODULES:
        text = corpus.assertions_path(name).read_text()
        for a in parse_assertions(text):
            assert parse_assertion(render_assertion(a)) == a, name


def test_golden_round_trip():
    for fname in ("source_assertion.sva", "ported_assertion.sva"):
        a = parse_assertion(corpus.golden_path(fname).read_text())
        assert parse_assertion(render_assertion(a)) == a


def test_normalize_overlapped():
    nb = parse_assertion("assert property (@(posedge clk) a |=> b);")
    ov = parse_assertion("assert property (@(posedge clk) a |-> ##1 b);")
    norm = normalize_overlapped(nb)
    assert norm.implication == "|->"
    assert norm.antecedent == nb.antecedent
    assert norm.consequent == ov.consequent
    # overlapped input is untouched, and normalization is idempotent
    assert normalize_overlapped(ov) == ov
    assert normalize_overlapped(norm) == norm


def test_delay_chains():
    a = parse_assertion("assert property (@(posedge clk) a ##2 b |-> ##1 c ##3 d);")
    assert [d for d, _ in a.antecedent.steps] == [0, 2]
    assert [d for d, _ in a.consequent.steps] == [1, 3]


def test_past_depth_parsing():
    a = parse_assertion(
        "assert property (@(posedge clk) en |=> q == $past(d, 2));")
    cons = a.consequent.steps[0][1]
    assert cons.right == ex.Past(ex.Ident("d"), 2)
    default = parse_assertion(
        "assert property (@(posedge clk) en |=> q == $past(d));")
    assert default.consequent.steps[0][1].right == ex.Past(ex.Ident("d"), 1)


def test_multiple_assertions_and_properties():
    text = (
        "property p_one;\n  @(posedge clk) a |-> b;\nendproperty\n"
        "A1: assert property (p_one);\n"
        "A2: assert property (@(posedge clk) b |=> c);\n")
    items = parse_assertions(text)
    assert [a.effective_name() for a in items] == ["p_one", "A2"]
    assert items[0].label == "A1"


@pytest.mark.parametrize("text,err,needle", [
    ("assert property (@(posedge clk) a |-> b[*2]);",
     UnsupportedConstructError, "repetition"),
    ("assert property (@(posedge clk) a ##[1:3] b |-> c);",
     UnsupportedConstructError, "range"),
    ("assert property (@(posedge clk or posedge clk2) a |-> b);",
     UnsupportedConstructError, "one clocking"),
    ("assert property (@(posedge clk) a |-> b) else $display(\"x\");",
     UnsupportedConstructError, r"\$error"),
    ("A: assert property (missing_prop);", ParseError, "undeclared"),
    ("assert property (@(posedge clk) a |-> $stable(b));",
     UnsupportedConstructError, r"\$stable"),
    ("assert property (@(posedge clk) a);", ParseError, r"\|->"),
])
def test_rejected_constructs(text, err, needle):
    with pytest.raises(err, match=needle):
        parse_assertions(text)


def test_duplicate_names_rejected():
    text = ("A1: assert property (@(posedge clk) a |-> b);\n"
            "A1: assert property (@(posedge clk) b |-> c);\n")
    with pytest.raises(ParseError, match="duplicate"):
        parse_assertions(text)


def test_parse_assertion_requires_exactly_one():
    with pytest.raises(ParseError, match="exactly one"):
        parse_assertion("A1: assert property (@(posedge clk) a |-> b);\n"
                        "A2: assert property (@(posedge clk) a |-> b);\n")


@given(gen.assertions({"a": 1, "b": 1, "x": 4, "y": 4}))
def test_generated_assertions_round_trip(a):
    assert parse_assertion(render_assertion(a)) == a
