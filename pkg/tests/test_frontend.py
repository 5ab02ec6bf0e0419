import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from verikit.front import parse_source, print_ast, resolve_top
from verikit.front.lexer import parse_number_literal, tokenize
from verikit.front.nodes import SourceSpan, SourceUnit
from verikit.front.parser import ParseError


def test_minimal_module():
    ast = parse_source("module m(input a, output b); assign b = a; endmodule")
    mod = ast.modules[0]
    assert mod.name == "m"
    assert [(p.name, p.direction, p.width) for p in mod.ports] == [
        ("a", "input", 1), ("b", "output", 1)
    ]
    assert len(mod.items) == 1


def test_descending_nonzero_base_range():
    ast = parse_source("module TopModule (input [4:1] x, output f); assign f = x[1]; endmodule")
    p = ast.modules[0].ports[0]
    assert (p.msb, p.lsb, p.width) == (4, 1, 4)


def test_truncated_assign_is_error():
    with pytest.raises(ParseError) as exc:
        parse_source("module m(input a); assign")
    diag = exc.value.diagnostics[0]
    assert diag.severity == "error"
    assert diag.span.end > diag.span.start


@pytest.mark.parametrize("snippet,construct", [
    ("module m(input a, output b); initial b = 0; endmodule", "initial"),
    ("module m(input a, output b); task t; endtask endmodule", "task"),
    ("module m(input a, output b); generate endgenerate endmodule", "generate"),
    ("module m(input signed [3:0] a, output b); assign b = a[0]; endmodule", "signed"),
    ("module m(input a, output b); assign #1 b = a; endmodule", "delays"),
    ("module m(input a, output b); always @(*) for (;;) b = a; endmodule", "for"),
    ("module m(input a, output b); real r; endmodule", "real"),
    ("`define X 1\nmodule m(input a, output b); endmodule", "`define"),
])
def test_unsupported_constructs_are_named(snippet, construct):
    with pytest.raises(ParseError) as exc:
        parse_source(snippet)
    diag = exc.value.diagnostics[0]
    assert diag.severity == "unsupported"
    assert construct in diag.message


def test_undeclared_identifier_rejected():
    with pytest.raises(ParseError) as exc:
        parse_source("module m(input a, output b); assign b = c; endmodule")
    assert "undeclared identifier 'c'" in str(exc.value)


def test_unsupported_instance_of_unknown_module():
    with pytest.raises(ParseError) as exc:
        parse_source("module m(input a, output b); mystery u0(.x(a), .y(b)); endmodule")
    assert exc.value.diagnostics[0].severity == "unsupported"


def test_non_ansi_ports_merge():
    ast = parse_source("""
    module top_module(clk, d, q);
      input clk;
      input [3:0] d;
      output [3:0] q;
      reg [3:0] q;
      always @(posedge clk) q <= d;
    endmodule
    """)
    q = ast.modules[0].ports[2]
    assert q.is_reg and q.width == 4


def test_parameter_ranges_fold():
    ast = parse_source("""
    module m #(parameter W = 8) (input [W-1:0] a, output [W-1:0] y);
      localparam HALF = W / 2;
      assign y = a + HALF;
    endmodule
    """)
    assert ast.modules[0].ports[0].width == 8
    assert [(p.name, p.value) for p in ast.modules[0].params] == [("W", 8), ("HALF", 4)]


@pytest.mark.parametrize("lit,expect", [
    ("42", (42, None, 0, 0)),
    ("8'hFF", (255, 8, 0, 0)),
    ("4'b10_10", (10, 4, 0, 0)),
    ("3'd7", (7, 3, 0, 0)),
    ("4'bx", (0, 4, 15, 0)),
    ("4'bz0", (0, 4, 0, 0b1110)),
    ("4'b1?01", (0b1001, 4, 0, 0b0100)),
])
def test_number_literals(lit, expect):
    value, width, x, z = parse_number_literal(lit, SourceSpan(0, len(lit)))[:4]
    assert (value, width, x, z) == expect


def test_resolve_top_rules():
    single = parse_source("module only(input a, output b); assign b = a; endmodule")
    assert resolve_top(single).name == "only"
    multi = parse_source("""
    module helper(input a, output b); assign b = ~a; endmodule
    module top_module(input x, output y);
      wire t;
      helper h(.a(x), .b(t));
      assign y = t;
    endmodule
    """)
    assert resolve_top(multi).name == "top_module"
    assert resolve_top(multi, "helper").name == "helper"
    two = parse_source(
        "module a(input x, output y); assign y = x; endmodule "
        "module b(input x, output y); assign y = x; endmodule"
    )
    with pytest.raises(ValueError, match="ambiguous top"):
        resolve_top(two)
    with pytest.raises(ValueError, match="no module named"):
        resolve_top(two, "missing")


def test_source_unit_invariants():
    with pytest.raises(ValueError):
        SourceUnit(text="")


# ---------------------------------------------------------------------------
# Round-trip properties
# ---------------------------------------------------------------------------


def test_roundtrip_corpus(corpus):
    for design in corpus:
        ast = parse_source(design.source, origin=design.name)
        printed = print_ast(ast)
        assert parse_source(printed) == ast, design.name


def test_roundtrip_preserves_part_select_and_concat():
    src = """
    module top_module(input clk, input [15:0] d, output reg [15:0] q,
                      output [7:0] swapped);
      always @(posedge clk) q[7:0] <= d[7:0];
      assign swapped = {d[0], d[7:1]};
    endmodule
    """
    ast = parse_source(src)
    printed = print_ast(ast)
    assert "q[7:0]" in printed and "{d[0], d[7:1]}" in printed
    assert parse_source(printed) == ast


_IDENTS = st.sampled_from(list("abcd"))


@st.composite
def _exprs(draw, depth=0):
    if depth >= 3 or draw(st.booleans()):
        if draw(st.booleans()):
            return draw(_IDENTS)
        width = draw(st.integers(1, 5))
        value = draw(st.integers(0, (1 << width) - 1))
        return f"{width}'d{value}"
    op = draw(st.sampled_from(["+", "-", "&", "|", "^", "<<", ">>", "==", "<", "&&"]))
    left = draw(_exprs(depth + 1))
    right = draw(_exprs(depth + 1))
    if draw(st.booleans()):
        return f"(~{left} {op} {right})"
    return f"({left} {op} {right})"


@given(_exprs())
@settings(max_examples=150, deadline=None)
def test_roundtrip_random_expressions(expr):
    src = (
        "module m(input [3:0] a, input [3:0] b, input [3:0] c, input [3:0] d, "
        f"output [7:0] y); assign y = {expr}; endmodule"
    )
    ast = parse_source(src)
    assert parse_source(print_ast(ast)) == ast


@given(st.binary(max_size=400))
@settings(max_examples=300, deadline=None)
def test_arbitrary_bytes_never_crash(data):
    text = data.decode("latin-1")
    if not text:
        return
    try:
        parse_source(text)
    except ParseError as e:
        assert e.diagnostics
        for d in e.diagnostics:
            assert d.span.end > d.span.start
            assert d.message


def test_determinism_same_text_same_ast(corpus):
    for design in corpus[:10]:
        a1 = parse_source(design.source)
        a2 = parse_source(design.source)
        assert a1 == a2
        assert print_ast(a1) == print_ast(a2)


def test_tokenizer_skips_comments():
    toks = tokenize("module /* block */ m; // line\nendmodule")
    assert [t.text for t in toks if t.kind != "eof"] == ["module", "m", ";", "endmodule"]
