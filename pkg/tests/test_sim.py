import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracle import naive_eval
from verikit.analysis import analyze
from verikit.front import parse_source, resolve_top
from verikit.sim import ElaborationError, advance, elaborate, reset_state
from verikit.sim.fourstate import band, bnot, bor, bxor, fmt_bits, mux


def test_elaborate_minimal_assign():
    m = elaborate(parse_source("module m(input a, output b); assign b = a; endmodule"))
    assert not any(sig.is_state for sig in m.signals)
    assert m.n_assignments == 1


def test_registers_start_all_x(decade_src):
    m = elaborate(parse_source(decade_src))
    st_ = reset_state(m)
    assert m.format_value(st_, "q") == "4'bxxxx"


def test_comb_loop_rejected():
    with pytest.raises(ElaborationError, match="combinational loop"):
        elaborate(parse_source(
            "module m(input a, output y); wire p; wire q;"
            " assign p = q; assign q = p; assign y = p; endmodule"
        ))


def test_width_limit():
    with pytest.raises(ElaborationError, match="limit"):
        elaborate(parse_source(
            "module m(input a, output [2047:0] y); assign y = {2048{a}}; endmodule"
        ))


def test_multiple_drivers_rejected():
    with pytest.raises(ElaborationError, match="overlapping continuous drivers"):
        elaborate(parse_source(
            "module m(input a, input b, output y);"
            " assign y = a; assign y = b; endmodule"
        ))
    with pytest.raises(ElaborationError, match="multiple drivers"):
        elaborate(parse_source("""
        module m(input clk, input a, output reg y);
          always @(posedge clk) y <= a;
          always @(posedge clk) y <= ~a;
        endmodule
        """))


def test_ringer_truth(ringer_src):
    m = elaborate(parse_source(ringer_src))
    s = reset_state(m)
    _, outs = advance(m, s, {"ring": 1, "vibrate_mode": 0})
    assert outs["ringer"] == (1, 0) and outs["motor"] == (0, 0)
    _, outs = advance(m, s, {"ring": 1, "vibrate_mode": 1})
    assert outs["ringer"] == (0, 0) and outs["motor"] == (1, 0)


def test_swap_nonblocking_atomicity():
    m = elaborate(parse_source("""
    module m(input clk, input load, input [1:0] iv, output reg a, output reg b);
      always @(posedge clk)
        if (load) begin a <= iv[0]; b <= iv[1]; end
        else begin a <= b; b <= a; end
    endmodule
    """))
    s = reset_state(m)
    advance(m, s, {"load": 1, "iv": 2})
    advance(m, s, {"load": 1, "iv": 2}, edge=("clk", "pos"))
    advance(m, s, {"load": 0, "iv": 0}, edge=("clk", "neg"))
    _, outs = advance(m, s, {"load": 0, "iv": 0}, edge=("clk", "pos"))
    assert (outs["a"], outs["b"]) == ((1, 0), (0, 0))


def test_dominant_zero_and():
    m = elaborate(parse_source("module m(input a, input b, output y); assign y = a & b; endmodule"))
    s = reset_state(m)
    _, outs = advance(m, s, {"a": 0})  # b still X
    assert outs["y"] == (0, 0)


def test_x_arithmetic_poisons():
    m = elaborate(parse_source(
        "module m(input [3:0] a, input [3:0] b, output [3:0] y); assign y = a + b; endmodule"
    ))
    s = reset_state(m)
    _, outs = advance(m, s, {"a": 3})
    assert outs["y"] == (0, 15)


def test_division_by_zero_is_all_x():
    m = elaborate(parse_source(
        "module m(input [3:0] a, input [3:0] b, output [3:0] q); assign q = a / b; endmodule"
    ))
    s = reset_state(m)
    _, outs = advance(m, s, {"a": 9, "b": 0})
    assert outs["q"] == (0, 15)
    _, outs = advance(m, s, {"a": 9, "b": 2})
    assert outs["q"] == (4, 0)


def test_blocking_order_inside_edge_block():
    m = elaborate(parse_source("""
    module m(input clk, input [3:0] d, output reg [3:0] q);
      reg [3:0] t;
      always @(posedge clk) begin
        t = d + 1;
        q <= t + 1;
      end
    endmodule
    """))
    s = reset_state(m)
    advance(m, s, {"d": 5})
    _, outs = advance(m, s, {"d": 5}, edge=("clk", "pos"))
    assert outs["q"] == (7, 0)


def test_async_reset_without_clock_edge():
    m = elaborate(parse_source("""
    module m(input clk, input rst_n, input d, output reg q);
      always @(posedge clk or negedge rst_n)
        if (!rst_n) q <= 0; else q <= d;
    endmodule
    """))
    s = reset_state(m)
    _, outs = advance(m, s, {"rst_n": 0, "d": 1})
    assert outs["q"] == (0, 0)
    # deassert (no posedge rst_n trigger: value holds), then clock in d
    _, outs = advance(m, s, {"rst_n": 1, "d": 1})
    assert outs["q"] == (0, 0)
    _, outs = advance(m, s, {"rst_n": 1, "d": 1}, edge=("clk", "pos"))
    assert outs["q"] == (1, 0)


def test_memory_starts_x_and_writes():
    m = elaborate(parse_source("""
    module m(input clk, input we, input [2:0] a, input [7:0] d, output [7:0] q);
      reg [7:0] mem [0:7];
      always @(posedge clk) if (we) mem[a] <= d;
      assign q = mem[a];
    endmodule
    """))
    s = reset_state(m)
    _, outs = advance(m, s, {"we": 1, "a": 3, "d": 0xAA})
    assert outs["q"] == (0, 255)
    _, outs = advance(m, s, {"we": 1, "a": 3, "d": 0xAA}, edge=("clk", "pos"))
    assert outs["q"] == (0xAA, 0)
    assert m.memories[0].depth == 8


def test_undriven_output_reports_z():
    m = elaborate(parse_source("module m(input a, output [3:0] y); endmodule"))
    s = reset_state(m)
    advance(m, s, {"a": 0})
    assert m.format_value(s, "y") == "4'bzzzz"


def test_state_copy_is_independent(decade_src):
    m = elaborate(parse_source(decade_src))
    s1 = reset_state(m)
    advance(m, s1, {"reset": 1})
    advance(m, s1, {"reset": 1}, edge=("clk", "pos"))
    s2 = s1.copy()
    advance(m, s1, {"reset": 0}, edge=("clk", "neg"))
    advance(m, s1, {"reset": 0}, edge=("clk", "pos"))
    assert m.value_of(s1, "q") == (2, 0)
    assert m.value_of(s2, "q") == (1, 0)


def test_determinism_across_fresh_models(decade_src):
    def run():
        m = elaborate(parse_source(decade_src))
        s = reset_state(m)
        trace = []
        rng = random.Random(7)
        advance(m, s, {"reset": 1})
        for i in range(40):
            edge = ("clk", "pos" if i % 2 == 0 else "neg")
            _, outs = advance(m, s, {"reset": rng.random() < 0.2}, edge=edge)
            trace.append(outs["q"])
        return trace

    assert run() == run()


# ---------------------------------------------------------------------------
# Exhaustive agreement with the independent oracle
# ---------------------------------------------------------------------------


def _comb_input_bits(ast):
    mod = resolve_top(ast)
    return sum(p.width for p in mod.ports if p.direction == "input")


def test_exhaustive_oracle_agreement(corpus):
    """Every combinational corpus design with <= 10 input bits agrees with
    naive big-integer evaluation on all 2^n patterns."""
    checked = 0
    for design in corpus:
        ast = parse_source(design.source, origin=design.name)
        a = analyze(ast)
        if a.circuit_class.kind != "combinational":
            continue
        mod = resolve_top(ast)
        bits = _comb_input_bits(ast)
        if bits > 10:
            continue
        model = elaborate(ast)
        state = reset_state(model)
        inputs = [p for p in mod.ports if p.direction == "input"]
        for pattern in range(1 << bits):
            stim = {}
            off = 0
            for p in inputs:
                stim[p.name] = (pattern >> off) & ((1 << p.width) - 1)
                off += p.width
            _, outs = advance(model, state, stim)
            expected = naive_eval(ast, mod, stim)
            for name, want in expected.items():
                v, x = outs[name]
                assert x == 0, (design.name, name, pattern)
                assert v == want, (design.name, name, pattern, v, want)
        checked += 1
    assert checked >= 10, f"only {checked} designs were exhaustively checked"


# ---------------------------------------------------------------------------
# Four-state properties
# ---------------------------------------------------------------------------


_bit = st.tuples(st.integers(0, 1), st.integers(0, 1)).map(
    lambda t: (0, 1) if t[1] else (t[0], 0)
)


def _refines(loose, tight):
    """tight is a defined-bit refinement of loose: it may define more bits
    but never flips a bit loose already defined."""
    lv, lx = loose
    tv, tx = tight
    return (tx & ~lx) == 0 and (lv & ~lx) == (tv & ~lx)


@given(_bit, _bit, _bit, _bit)
@settings(max_examples=200, deadline=None)
def test_x_monotonicity_of_gates(a, b, a2, b2):
    """Refining X inputs to constants never flips an already-defined output."""
    def refine(orig, new):
        ov, ox = orig
        return new if ox else orig

    a2 = refine(a, a2)
    b2 = refine(b, b2)
    for op in (band, bor, bxor):
        before = op(a[0], a[1], b[0], b[1])
        after = op(a2[0], a2[1], b2[0], b2[1])
        assert _refines(before, after), (op.__name__, a, b, a2, b2)
    assert _refines(bnot(a[0], a[1], 1), bnot(a2[0], a2[1], 1))


@given(_bit, _bit, _bit)
@settings(max_examples=200, deadline=None)
def test_mux_merge_is_monotone(c, a, b):
    merged = mux(c[0], c[1], a[0], a[1], b[0], b[1], 1)
    if c[1]:
        for leg in (a, b):
            assert _refines(merged, leg)
    else:
        assert merged == (a if c[0] else b)


@given(st.integers(0, 255), st.integers(0, 255))
@settings(max_examples=100, deadline=None)
def test_x_monotonicity_whole_design(v, xmask):
    """Replacing X input bits with their eventual values never changes an
    output bit that was already defined."""
    src = """
    module m(input [7:0] a, output [3:0] lo, output parity, output [7:0] inc);
      assign lo = a[3:0] & a[7:4];
      assign parity = ^a;
      assign inc = a + 1;
    endmodule
    """
    model = elaborate(parse_source(src))
    sig = model.by_name["a"]
    state = reset_state(model)
    # partially defined input: poke the slot directly
    state.s[2 * sig.slot] = v & ~xmask & 0xFF
    state.s[2 * sig.slot + 1] = xmask & 0xFF
    model.settle(state)
    before = model.outputs(state)
    _, after = advance(model, state, {"a": v})
    for name in before:
        assert _refines(before[name], after[name]), name


@given(st.integers(0, 3), st.integers(0, 3), st.data())
@settings(max_examples=60, deadline=None)
def test_nonblocking_atomicity_random_register_pairs(init_a, init_b, data):
    """Randomized cross-referencing register pairs never observe each
    other's new values within one edge."""
    exprs = ["b", "a", "a ^ b", "a + b", "b - a", "~a"]
    ea = data.draw(st.sampled_from(exprs))
    eb = data.draw(st.sampled_from(exprs))
    src = f"""
    module m(input clk, input load, input [1:0] va, input [1:0] vb,
             output reg [1:0] a, output reg [1:0] b);
      always @(posedge clk)
        if (load) begin a <= va; b <= vb; end
        else begin a <= {ea}; b <= {eb}; end
    endmodule
    """
    model = elaborate(parse_source(src))
    state = reset_state(model)
    stim = {"load": 1, "va": init_a, "vb": init_b}
    advance(model, state, stim)
    advance(model, state, stim, edge=("clk", "pos"))
    advance(model, state, {"load": 0, "va": 0, "vb": 0}, edge=("clk", "neg"))
    _, outs = advance(model, state, {"load": 0, "va": 0, "vb": 0}, edge=("clk", "pos"))

    env = {"a": init_a, "b": init_b}

    def ev(e):
        if e == "b":
            return env["b"]
        if e == "a":
            return env["a"]
        if e == "a ^ b":
            return env["a"] ^ env["b"]
        if e == "a + b":
            return (env["a"] + env["b"]) & 3
        if e == "b - a":
            return (env["b"] - env["a"]) & 3
        return ~env["a"] & 3

    want_a, want_b = ev(ea), ev(eb)
    assert outs["a"] == (want_a, 0)
    assert outs["b"] == (want_b, 0)


def test_settle_is_fixpoint(corpus):
    """A second combinational settle never changes anything (topological
    evaluation reached the fixpoint in one pass)."""
    rng = random.Random(3)
    for design in corpus[:20]:
        ast = parse_source(design.source, origin=design.name)
        model = elaborate(ast)
        state = reset_state(model)
        stim = {}
        for sig in model.signals:
            if sig.is_input:
                stim[sig.name] = rng.getrandbits(sig.width)
        advance(model, state, stim)
        snapshot = list(state.s)
        model.settle(state)
        assert state.s == snapshot, design.name


def test_fmt_bits():
    assert fmt_bits(0b1010, 0b0100, 4) == "4'b1x10"
    assert fmt_bits(0, 0b1100, 4, zmask=0b0011) == "4'bxxzz"


def test_ascending_range_indexing_matches_oracle():
    src = """
    module m(input [0:3] a, input [1:0] i, output y, output [1:0] p);
      assign y = a[i];
      assign p = a[1:2];
    endmodule
    """
    ast = parse_source(src)
    mod = resolve_top(ast)
    model = elaborate(ast)
    state = reset_state(model)
    for a in range(16):
        for i in range(4):
            stim = {"a": a, "i": i}
            _, outs = advance(model, state, stim)
            want = naive_eval(ast, mod, stim)
            for name, value in want.items():
                assert outs[name] == (value, 0), (stim, name)


_WIDTHS = st.tuples(st.integers(1, 5), st.integers(1, 5), st.integers(1, 5))


@st.composite
def _rand_module(draw):
    wa, wb, wc = draw(_WIDTHS)
    ops = ["+", "-", "*", "&", "|", "^", "<<", ">>", "<", "==", "&&"]

    def expr(depth):
        if depth >= 3 or draw(st.booleans()):
            choice = draw(st.integers(0, 3))
            if choice == 0:
                return "a"
            if choice == 1:
                return "b"
            if choice == 2:
                return "c"
            width = draw(st.integers(1, 4))
            return f"{width}'d{draw(st.integers(0, (1 << width) - 1))}"
        op = draw(st.sampled_from(ops))
        left, right = expr(depth + 1), expr(depth + 1)
        if draw(st.booleans()):
            left = f"~{left}"
        return f"({left} {op} {right})"

    e1, e2 = expr(0), expr(0)
    wt = draw(st.integers(1, 6))
    wy = draw(st.integers(1, 8))
    src = (
        f"module m(input [{wa - 1}:0] a, input [{wb - 1}:0] b, "
        f"input [{wc - 1}:0] c, output [{wy - 1}:0] y, output z);\n"
        f"  wire [{wt - 1}:0] t = {e1};\n"
        f"  assign y = t + {e2};\n"
        f"  assign z = ^y;\n"
        f"endmodule\n"
    )
    return src, wa, wb, wc


@given(_rand_module(), st.data())
@settings(max_examples=120, deadline=None)
def test_random_programs_match_oracle(spec, data):
    """Differential fuzzing: the compiled engine must agree with naive
    big-integer interpretation on random expression programs."""
    src, wa, wb, wc = spec
    ast = parse_source(src)
    mod = resolve_top(ast)
    model = elaborate(ast)
    state = reset_state(model)
    for _ in range(8):
        stim = {
            "a": data.draw(st.integers(0, (1 << wa) - 1)),
            "b": data.draw(st.integers(0, (1 << wb) - 1)),
            "c": data.draw(st.integers(0, (1 << wc) - 1)),
        }
        _, outs = advance(model, state, stim)
        want = naive_eval(ast, mod, stim)
        for name, value in want.items():
            v, x = outs[name]
            assert x == 0, (src, stim, name)
            assert v == value, (src, stim, name, v, value)
