"""Parser and elaboration: structure, round-trips, and rejection paths."""

import pytest
from hypothesis import given

from svaport import corpus
from svaport import expr as ex
from svaport.errors import (CombinationalLoopError, ElaborationError,
                            ParseError, UnsupportedConstructError)
from svaport.netlist import NetKind, render_netlist, validate
from svaport.rtl_parser import parse_design

from . import gen

IRQ_LOGIC = corpus.golden_path("irq_ctrl.sv").read_text()


def test_irq_logic_structure():
    nl = parse_design(IRQ_LOGIC)
    assert nl.name == "irq_ctrl"
    by_lhs = {a.lhs: a for a in nl.assigns}
    assert set(by_lhs) == {"handle_irq", "irq_enabled"}
    assert ex.idents_of(by_lhs["handle_irq"].rhs) == {
        "debug_mode_q", "debug_single_step_i", "nmi_mode_q",
        "irq_nm", "irq_pending_i", "irq_enabled"}
    assert ex.idents_of(by_lhs["irq_enabled"].rhs) == {
        "csr_mstatus_mie_i", "priv_mode_i", "PRIV_LVL_U"}
    assert "PRIV_LVL_U" in nl.params and "PRIV_LVL_U" not in nl.nets
    assert nl.nets["priv_mode_i"].width == 2
    assert nl.nets["handle_irq"].kind is NetKind.OUTPUT


def test_ports_keep_declaration_order():
    nl = parse_design(IRQ_LOGIC)
    assert nl.ports[:3] == ("clk_i", "rst_ni", "debug_mode_q")
    assert nl.ports[-2:] == ("handle_irq", "irq_enabled")


def test_every_identifier_resolves_in_corpus():
    for name in corpus.MODULES:
        nl = parse_design(corpus.design_path(name).read_text())
        for a in nl.assigns:
            for ident in ex.idents_of(a.rhs):
                assert nl.resolves(ident), f"{name}: {ident}"
        for r in nl.registers:
            for ident in ex.idents_of(r.next):
                assert nl.resolves(ident), f"{name}: {ident}"


def test_corpus_round_trip():
    for name in corpus.MODULES:
        first = parse_design(corpus.design_path(name).read_text())
        again = parse_design(render_netlist(first))
        assert again == first, name


def test_parse_is_deterministic():
    text = corpus.design_path("csr_unit").read_text()
    a, b = parse_design(text), parse_design(text)
    assert a == b
    assert render_netlist(a) == render_netlist(b)
    assert a.fingerprint() == b.fingerprint()


def test_register_elaboration_with_enables():
    nl = parse_design(corpus.design_path("csr_unit").read_text())
    regs = {r.target: r for r in nl.registers}
    assert set(regs) == {"mstatus_q", "mie_q", "mepc_q"}
    r = regs["mstatus_q"]
    assert r.clock == "clk_i"
    assert r.reset is not None
    assert (r.reset.net, r.reset.active_level, r.reset.value) == ("rst_ni", 0, 0)
    # enable-guarded load folds to mux(en, data, hold)
    assert r.next == ex.Ternary(ex.Ident("mstatus_en"),
                                ex.Ident("csr_wdata_i"), ex.Ident("mstatus_q"))


def test_sized_literal_params():
    nl = parse_design(corpus.design_path("csr_unit").read_text())
    p = nl.params["CSR_MSTATUS"]
    assert (p.value, p.size) == (0x300, 12)
    assert nl.width("CSR_MSTATUS") == 12


def test_unknown_identifier_rejected():
    with pytest.raises(ElaborationError, match="ghost"):
        parse_design("module m (input logic a, output logic y);\n"
                     "  assign y = a & ghost;\nendmodule\n")


def test_multiple_drivers_rejected():
    with pytest.raises(ElaborationError, match="multiple drivers"):
        parse_design("module m (input logic a, output logic y);\n"
                     "  assign y = a;\n  assign y = !a;\nendmodule\n")


def test_driven_input_rejected():
    with pytest.raises(ElaborationError, match="input"):
        parse_design("module m (input logic a, output logic y);\n"
                     "  assign a = 1'b1;\n  assign y = a;\nendmodule\n")


def test_combinational_loop_names_the_cycle():
    text = ("module m (input logic a, output logic y);\n"
            "  logic p;\n  logic q;\n"
            "  assign p = q & a;\n  assign q = p | a;\n  assign y = q;\n"
            "endmodule\n")
    with pytest.raises(CombinationalLoopError) as err:
        parse_design(text)
    assert set(err.value.cycle) >= {"p", "q"}


def test_register_breaks_apparent_loop():
    text = ("module m (input logic clk, input logic a, output logic y);\n"
            "  logic q;\n"
            "  assign y = q ^ a;\n"
            "  always_ff @(posedge clk) begin\n    q <= y;\n  end\n"
            "endmodule\n")
    nl = parse_design(text)
    assert [r.target for r in nl.registers] == ["q"]


def test_parse_error_carries_location():
    with pytest.raises(ParseError) as err:
        parse_design("module m (input logic a output logic y);\nendmodule\n")
    assert err.value.line == 1
    assert err.value.col > 0


@pytest.mark.parametrize("snippet,needle", [
    ("module m (inout logic a);\nendmodule\n", "inout"),
    ("module m #(parameter W = 4) (input logic a);\nendmodule\n", "parameter"),
    ("module m (input logic a, output logic y);\n"
     "  assign y = {a, a};\nendmodule\n", "concatenation"),
])
def test_unsupported_constructs(snippet, needle):
    with pytest.raises(UnsupportedConstructError, match=needle):
        parse_design(snippet)


def test_past_rejected_in_rtl():
    with pytest.raises(ParseError, match=r"\$past"):
        parse_design("module m (input logic a, output logic y);\n"
                     "  assign y = $past(a);\nendmodule\n")


def test_one_module_per_file():
    text = ("module m1 (input logic a);\nendmodule\n"
            "module m2 (input logic b);\nendmodule\n")
    with pytest.raises(ParseError, match="one module"):
        parse_design(text)


@given(gen.designs())
def test_generated_designs_round_trip(nl):
    validate(nl)
    reparsed = parse_design(render_netlist(nl))
    assert reparsed.name == nl.name
    assert reparsed.ports == nl.ports
    assert reparsed.nets == nl.nets
    assert reparsed.params == nl.params
    assert reparsed.assigns == nl.assigns
    assert reparsed.registers == nl.registers
