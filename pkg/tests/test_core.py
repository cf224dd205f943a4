import pickle

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zipstream.core import (
    Cons,
    Proj,
    Var,
    Zip,
    make_spec,
    parse_spec,
    parse_term,
    print_spec,
    print_term,
    validate,
)
from zipstream.errors import (
    ArityZero,
    DuplicateEquation,
    ProjInNonPiDialect,
    SpecSyntaxError,
    UndefinedVariable,
)

from helpers import spec


def test_parse_thue_morse():
    s = parse_spec("M = 0:X; X = 1:zip(X,Y); Y = 0:zip(Y,X)")
    assert list(s.equations) == ["M", "X", "Y"]
    assert s.root == "M"
    assert str(s.dialect) == "zip-k(2)"
    assert s.equations["X"] is Cons("1", Zip([Var("X"), Var("Y")]))


def test_self_loop_is_valid_syntax():
    s = parse_spec("root A\nA = A")
    assert s.equations == {"A": Var("A")}
    assert s.root == "A"


def test_undefined_variable():
    with pytest.raises(UndefinedVariable) as e:
        parse_spec("A = zip(B)")
    assert e.value.name == "B"


def test_duplicate_equation():
    with pytest.raises(DuplicateEquation):
        parse_spec("A = 0:A\nA = 1:A")


def test_zero_arity_rejected():
    with pytest.raises(ArityZero):
        parse_spec("A = zip()")
    with pytest.raises(ArityZero):
        Zip([])
    with pytest.raises(ArityZero):
        parse_spec("A = 0:proj(0,0,A)")


def test_proj_outside_pi_dialect():
    with pytest.raises(ProjInNonPiDialect):
        parse_spec("A = 0:proj(1,2,A)", dialect="zip-k(2)")
    s = parse_spec("A = 0:proj(1,2,A)")
    assert s.dialect.kind == "zip-pi"


def test_syntax_error_position():
    with pytest.raises(SpecSyntaxError) as e:
        parse_spec("A = 0:A\nB = zip(A,\n")
    assert e.value.line == 2


def test_interning_gives_identity():
    a = Cons("0", Zip([Var("X"), Var("Y")]))
    b = parse_term("0:zip(X,Y)")
    assert a is b
    assert pickle.loads(pickle.dumps(a)) is a


def test_print_forms():
    assert print_term(Proj(1, 2, Var("X"))) == "proj(1,2,X)"
    assert print_term(Zip([Var("a"), Var("b"), Var("c")])) == "zip(a,b,c)"


def test_morse_round_trips_byte_identically():
    text = print_spec(spec("morse.zs"))
    assert text == "M = 0:X\nX = 1:zip(X,Y)\nY = 0:zip(Y,X)\n"
    assert print_spec(parse_spec(text)) == text


def test_alphabet_and_root_lines_survive_printing():
    s = parse_spec("alphabet 1 0 2\nroot B\nA = 0:A\nB = 1:zip(A,B)")
    t = parse_spec(print_spec(s))
    assert t.alphabet == ("1", "0", "2")
    assert t.root == "B"


def test_primed_identifiers():
    s = spec("mix.zs")
    assert "X0'" in s.equations
    assert str(s.dialect) == "zip-mix"


def test_validate_fixtures_clean():
    for name in ["morse.zs", "morse2.zs", "unprod.zs", "alt.zs"]:
        assert validate(spec(name)).ok, name
    # the mixed example only ever refers to X2', never to X2 itself
    assert validate(spec("mix.zs")).unreachable == ["X2"]


def test_validate_reports_unreachable():
    r = validate(parse_spec("root A\nA = 0:A\nB = 1:B"))
    assert r.unreachable == ["B"]
    assert not r.ok


def test_validate_reports_dialect_violation():
    s = make_spec({"A": Cons("0", Zip([Var("A")] * 3))}, dialect=None)
    from zipstream.core import Dialect, ZipSpec

    forced = ZipSpec(s.equations, "A", s.alphabet, Dialect("zip-k", 2))
    assert forced.dialect.k == 2
    assert validate(forced).dialect_violations


# ---------------------------------------------------------------- round trip property

SYMS = st.sampled_from(["0", "1", "a"])


@st.composite
def specs(draw):
    n = draw(st.integers(1, 5))
    names = [f"V{i}" for i in range(n)]
    pi = draw(st.booleans())

    def term(depth):
        options = ["var", "cons"] + (["zip"] if depth < 3 else []) + (
            ["proj"] if pi and depth < 3 else [])
        kind = draw(st.sampled_from(options))
        if kind == "var":
            return Var(draw(st.sampled_from(names)))
        if kind == "cons":
            return Cons(draw(SYMS), term(depth + 1))
        if kind == "zip":
            return Zip([term(depth + 1) for _ in range(draw(st.integers(1, 3)))])
        return Proj(draw(st.integers(0, 4)), draw(st.integers(1, 3)), term(depth + 1))

    eqs = {v: term(0) for v in names}
    return make_spec(eqs, root=draw(st.sampled_from(names)))


@settings(max_examples=200, deadline=None)
@given(specs())
def test_parse_print_round_trip(s):
    t = parse_spec(print_spec(s))
    assert t.structure() == s.structure()
