import pytest
from hypothesis import given
from hypothesis import strategies as st

from magnus import words
from magnus.finite import from_permutations
from magnus.words import (
    Commutator,
    Generator,
    Identity,
    Power,
    Product,
    UnboundGeneratorError,
    WordSyntaxError,
    evaluate,
    parse,
    to_text,
)

x, y, u, v = (Generator(n) for n in "xyuv")


def test_relator_parse():
    assert parse("x^-1y^2x") == Product((Power(x, -1), Power(y, 2), x))


def test_commutator_parse():
    assert parse("[u,v]") == Commutator(u, v)


def test_empty_is_identity():
    assert parse("") == Identity()
    assert parse("  ") == Identity()
    assert parse("()") == Identity()


def test_names_with_digits_and_underscores():
    assert parse("e_inf he0") == Product((Generator("e_inf"), Generator("he0")))


@pytest.mark.parametrize("text, offset", [("x^", 2), ("[x,y", 4), ("x)", 1), ("x^a", 2), ("[x y]", 4)])
def test_syntax_errors_report_offset(text, offset):
    with pytest.raises(WordSyntaxError) as err:
        parse(text)
    assert err.value.position == offset


def test_unbound_generator():
    S3 = from_permutations([(1, 2, 0), (1, 0, 2)])
    with pytest.raises(UnboundGeneratorError):
        evaluate("q", {"x": 1}, S3.ops)


def test_evaluation_in_s3():
    S3 = from_permutations([(1, 2, 0), (1, 0, 2)])
    env = {"x": S3.gens[0], "y": S3.gens[1]}
    assert evaluate("x^3", env, S3.ops) == 0
    assert evaluate("y^2", env, S3.ops) == 0
    assert evaluate("x x^-1", env, S3.ops) == 0
    assert evaluate("(x y)^2", env, S3.ops) == 0
    assert evaluate("[x,y]", env, S3.ops) == S3.commutator(env["x"], env["y"])
    assert evaluate("y^-1 x y", env, S3.ops) == evaluate("x^-1", env, S3.ops)


def test_read_corpus(tmp_path):
    f = tmp_path / "w.txt"
    f.write_text("# header\nx y\n\n  [x,y]  # trailing\n")
    assert words.read_corpus(f) == ["x y", "[x,y]"]


names = st.sampled_from(["x", "y", "z", "e_inf", "he0"])


def word_trees():
    atoms = names.map(Generator)
    return st.recursive(
        atoms | st.just(Identity()),
        lambda inner: st.one_of(
            st.lists(inner, min_size=2, max_size=4).map(lambda fs: Product(tuple(fs))),
            st.tuples(inner, st.integers(-5, 5)).map(lambda t: Power(*t)),
            st.tuples(inner, inner).map(lambda t: Commutator(*t)),
        ),
        max_leaves=8,
    )


def normalize(w):
    """What the parser produces: no Identity inside products, flat singletons."""
    return parse(to_text(w))


@given(word_trees())
def test_print_parse_round_trip(w):
    once = normalize(w)
    assert parse(to_text(once)) == once


@given(word_trees())
def test_printing_preserves_value(w):
    S3 = from_permutations([(1, 2, 0), (1, 0, 2)])
    env = {"x": 1, "y": 2, "z": 3, "e_inf": 4, "he0": 5}
    assert evaluate(w, env, S3.ops) == evaluate(to_text(w), env, S3.ops)
