from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from autcstar import AlgebraElement, load_fixture
from autcstar.algebra import format_element
from autcstar.coeffs import Gaussian
from autcstar.errors import ExpressionSyntaxError, UnknownGenerator
from autcstar.expr import parse_expression as P


def test_error_position():
    A = load_fixture("aleshin")
    with pytest.raises(ExpressionSyntaxError) as info:
        P("(1 +", A)
    assert info.value.position == 4 and info.value.column == 5
    with pytest.raises(ExpressionSyntaxError):
        P("", A)
    with pytest.raises(ExpressionSyntaxError):
        P("a/b", A)
    with pytest.raises(UnknownGenerator):
        P("a + z", A)


def test_values():
    A = load_fixture("aleshin")
    x = P("(2+i)*a", A)
    assert x == AlgebraElement.from_word(A, "a", Gaussian(2, 1))
    assert P("star((2+i)*a)", A) == x.star()
    assert P("a^2", A) == P("a*a", A)
    assert P("1/2*a", A) == AlgebraElement.from_word(A, "a", Fraction(1, 2))
    assert P("a*a^-1", A) == P("1", A)
    assert P("-(a - b)", A) == P("b - a", A)


terms = st.tuples(
    st.integers(-4, 4),
    st.integers(-3, 3),
    st.integers(1, 3),
    st.lists(st.tuples(st.sampled_from("abc"), st.sampled_from([1, -1])), max_size=4),
)


@settings(max_examples=80, deadline=None)
@given(st.lists(terms, max_size=4))
def test_print_parse_roundtrip(parts):
    A = load_fixture("aleshin")
    x = AlgebraElement.zero(A)
    for re_, im, den, word in parts:
        x = x + AlgebraElement.from_word(A, tuple(word), Gaussian(Fraction(re_, den), Fraction(im, den)))
    assert P(format_element(x), A) == x
    assert x.star().star() == x
