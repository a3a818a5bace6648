import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from projlift import dsl
from projlift.dsl import (
    DomainError,
    ParseError,
    UndeclaredSymbolError,
    const,
    diff,
    parse,
    subst,
    to_text,
    var,
)

SYMS = ("x1", "x2")


def bindings(count, rng, lo=-2.0, hi=2.0):
    for _ in range(count):
        yield {"x1": float(rng.uniform(lo, hi)), "x2": float(rng.uniform(lo, hi))}


def test_parse_product():
    e = parse("x1^2 * x2", SYMS)
    assert e.eval({"x1": 2.0, "x2": 3.0}) == 12.0


def test_parse_cubic_coefficient_family():
    e = parse("c*(x1*x2)^3", ("x1", "x2", "c"))
    assert e.eval({"x1": 2.0, "x2": 1.0, "c": 0.5}) == 4.0


def test_double_plus_is_syntax_error():
    with pytest.raises(ParseError) as err:
        parse("x1 + + x2", SYMS)
    assert err.value.position == 5


def test_undeclared_symbol():
    with pytest.raises(UndeclaredSymbolError) as err:
        parse("x1 + y", SYMS)
    assert err.value.name == "y"


def test_unknown_function_rejected():
    with pytest.raises(ParseError):
        parse("tan(x1)", SYMS)


def test_trailing_garbage_rejected():
    with pytest.raises(ParseError):
        parse("x1 x2", SYMS)


def test_integer_exponent_required():
    with pytest.raises(ParseError):
        parse("x1^2.5", SYMS)


def test_diff_polynomial(rng):
    e = parse("x1^2*x2", SYMS)
    d = diff(e, "x1")
    for b in bindings(10, rng):
        assert d.eval(b) == pytest.approx(2.0 * b["x1"] * b["x2"], abs=1e-14)


def test_diff_exp_identity(rng):
    e = parse("exp(x1)", SYMS)
    d = diff(e, "x1")
    for b in bindings(10, rng):
        assert d.eval(b) == pytest.approx(e.eval(b), rel=1e-15)


FD_CASES = [
    "x1^3*x2 + x2^2",
    "sin(x1*x2) + cos(x2)",
    "exp(x1*x2)",
    "x1 / (x2 + 3)",
    "(x1 + x2)^4 / (1 + x1^2)",
    "neg(x1)*sin(x2)^2",
]


@pytest.mark.parametrize("text", FD_CASES)
def test_diff_matches_central_finite_differences(text, rng):
    e = parse(text, SYMS)
    h = 1e-5
    for name in SYMS:
        d = diff(e, name)
        for b in bindings(5, rng, 0.5, 1.5):
            plus = dict(b)
            minus = dict(b)
            plus[name] += h
            minus[name] -= h
            fd = (e.eval(plus) - e.eval(minus)) / (2 * h)
            exact = d.eval(b)
            assert exact == pytest.approx(fd, rel=1e-7, abs=1e-7)


def test_eval_constant():
    assert const(5.0).eval({}) == 5.0


def test_division_by_zero_domain_error():
    e = parse("x1/x2", SYMS)
    with pytest.raises(DomainError):
        e.eval({"x1": 1.0, "x2": 0.0})


def test_overflow_is_domain_error():
    e = parse("exp(x1)", SYMS)
    with pytest.raises(DomainError):
        e.eval({"x1": 1e4, "x2": 0.0})


def test_constant_folding_preserves_evaluation(rng):
    raw = "((x1 + 0) * 1 + (2 - 2)) * (x2^2 / 1) + 0 * sin(x1)"
    folded = parse(raw, SYMS)
    for b in bindings(20, rng):
        expected = b["x1"] * b["x2"] ** 2
        assert folded.eval(b) == pytest.approx(expected, rel=1e-14, abs=1e-14)


def test_zero_power_convention():
    assert parse("x1^0", SYMS).eval({"x1": 0.0, "x2": 0.0}) == 1.0


def test_subst_rebuilds(rng):
    e = parse("x1^2 + x2", SYMS)
    swapped = subst(e, {"x1": var("x2"), "x2": var("x1")})
    for b in bindings(5, rng):
        assert swapped.eval(b) == pytest.approx(b["x2"] ** 2 + b["x1"])


# -- random tree machinery ---------------------------------------------------

names = st.sampled_from(SYMS)
leaves = st.one_of(
    st.floats(min_value=-2, max_value=2, allow_nan=False).map(const),
    names.map(var),
)


def _extend(children):
    return st.one_of(
        st.tuples(children, children).map(lambda ab: dsl.add(*ab)),
        st.tuples(children, children).map(lambda ab: dsl.sub(*ab)),
        st.tuples(children, children).map(lambda ab: dsl.mul(*ab)),
        children.map(dsl.neg),
        st.tuples(children, st.integers(min_value=0, max_value=3)).map(
            lambda bn: dsl.powi(*bn)
        ),
        children.map(lambda e: dsl.func("sin", e)),
        children.map(lambda e: dsl.func("cos", e)),
    )


trees = st.recursive(leaves, _extend, max_leaves=10)


@settings(max_examples=60, deadline=None)
@given(trees, trees, st.floats(min_value=-3, max_value=3, allow_nan=False))
def test_diff_is_linear_and_leibniz(e1, e2, a):
    binding = {"x1": 0.7, "x2": -0.4}
    lin = diff(dsl.add(dsl.mul(const(a), e1), e2), "x1")
    try:
        lhs = lin.eval(binding)
        rhs = a * diff(e1, "x1").eval(binding) + diff(e2, "x1").eval(binding)
        prod = diff(dsl.mul(e1, e2), "x1").eval(binding)
        leib = e1.eval(binding) * diff(e2, "x1").eval(binding) + e2.eval(binding) * diff(
            e1, "x1"
        ).eval(binding)
    except DomainError:
        return
    scale = max(abs(lhs), abs(prod), 1.0)
    assert abs(lhs - rhs) <= 1e-9 * scale
    assert abs(prod - leib) <= 1e-9 * scale


@settings(max_examples=60, deadline=None)
@given(trees)
def test_mixed_partials_commute(e):
    binding = {"x1": 0.31, "x2": -0.57}
    d12 = diff(diff(e, "x1"), "x2")
    d21 = diff(diff(e, "x2"), "x1")
    try:
        a, b = d12.eval(binding), d21.eval(binding)
    except DomainError:
        return
    assert abs(a - b) <= 1e-12 * max(abs(a), 1.0)


def test_parse_print_roundtrip(rng):
    def random_tree(depth, r):
        if depth == 0 or r.uniform() < 0.3:
            if r.uniform() < 0.5:
                return const(float(r.uniform(-2, 2)))
            return var(SYMS[int(r.integers(0, 2))])
        op = int(r.integers(0, 6))
        a = random_tree(depth - 1, r)
        b = random_tree(depth - 1, r)
        if op == 0:
            return dsl.add(a, b)
        if op == 1:
            return dsl.sub(a, b)
        if op == 2:
            return dsl.mul(a, b)
        if op == 3:
            return dsl.powi(a, int(r.integers(0, 4)))
        if op == 4:
            return dsl.func("sin", a)
        return dsl.neg(a)

    r = np.random.default_rng(42)
    for _ in range(100):
        e = random_tree(4, r)
        back = parse(to_text(e), SYMS)
        for b in bindings(1, rng):
            assert back.eval(b) == pytest.approx(e.eval(b), rel=1e-14, abs=1e-14)
