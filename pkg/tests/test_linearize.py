from hypothesis import given, settings
from hypothesis import strategies as st

from sirforge.sir.tree import AstNode, SirNode, linearize


def leaf(text, kind=None):
    return AstNode(kind or text, (0, len(text)), [], text)


def node(kind, children):
    return AstNode(kind, (children[0].span[0], children[-1].span[1]), children)


def test_leaf_renders_as_its_text():
    assert linearize(leaf("x", "identifier")) == "x"


def test_internal_node_wraps_children():
    tree = node("A", [leaf("x")])
    assert linearize(tree) == "<A,left> x <A,right>"


def test_two_level_hand_expansion():
    tree = node("A", [node("B", [leaf("x")]), leaf("y")])
    assert linearize(tree) == "<A,left> <B,left> x <B,right> y <A,right>"


def test_childless_internal_node_keeps_both_delimiters():
    empty = SirNode(kind="ParameterList")
    assert linearize(empty) == "<ParameterList,left> <ParameterList,right>"


# strategy: small trees whose leaf texts contain no spaces or delimiters
_kinds = st.sampled_from(["A", "B", "C", "stmt", "expr"])
_leaf_texts = st.text(alphabet="abcxyz01", min_size=1, max_size=4)


def _trees(depth):
    if depth == 0:
        return _leaf_texts.map(lambda t: SirNode(kind="tok", leaf_text=t))
    return st.one_of(
        _leaf_texts.map(lambda t: SirNode(kind="tok", leaf_text=t)),
        st.builds(
            lambda kind, kids: SirNode(kind=kind, children=kids),
            _kinds,
            st.lists(_trees(depth - 1), min_size=1, max_size=3),
        ),
    )


@settings(max_examples=300, deadline=None)
@given(_trees(3), _trees(3))
def test_linearization_injective_on_corpus(a, b):
    # leaf texts carry no spaces or delimiter glyphs, so rendering is a
    # parenthesization encoding: distinct trees must render distinctly
    if a != b:
        assert linearize(a) != linearize(b)


@settings(max_examples=100, deadline=None)
@given(_trees(3))
def test_linearize_total_and_stable(tree):
    assert linearize(tree) == linearize(tree)
