import pytest

from sirforge.errors import SirforgeError
from sirforge.sir import Language, SourceUnit, parse_source
from sirforge.sir.pyparse import parse_python


def kinds_preorder(node):
    return [n.kind for n in node.walk()]


def test_simple_function_structure_matches_frozen_dump():
    tree = parse_python("def f(x):\n    return x")
    assert kinds_preorder(tree) == [
        "module",
        "function_definition",
        "def",
        "identifier",
        "parameters",
        "(",
        "identifier",
        ")",
        ":",
        "block",
        "return_statement",
        "return",
        "identifier",
    ]
    assert not tree.has_error()


def test_module_root_covers_full_span():
    src = "x = 1\ny = 2\n"
    tree = parse_python(src)
    assert tree.kind == "module"
    assert tree.span == (0, len(src))


def test_empty_text_rejected_at_source_unit():
    with pytest.raises(SirforgeError):
        SourceUnit(Language.PYTHON, "   \n  ")


def test_malformed_def_produces_error_node():
    tree = parse_python("def f(:")
    assert tree.error_count() >= 1


def test_leaf_text_equals_span_slice():
    src = "total = price * 2\n"
    tree = parse_python(src)
    data = src.encode("utf-8")
    for node in tree.walk():
        if node.is_leaf and node.leaf_text is not None:
            assert data[node.span[0] : node.span[1]].decode() == node.leaf_text


def test_child_spans_nested_and_ordered():
    src = "def f(a, b):\n    if a > b:\n        return a\n    return b\n"
    tree = parse_python(src)
    for node in tree.walk():
        prev_end = node.span[0]
        for child in node.children:
            assert child.span[0] >= prev_end
            assert child.span[1] <= node.span[1]
            prev_end = child.span[0]


def test_unicode_spans_are_byte_offsets():
    src = "s = 'héllo'\nt = 1\n"
    tree = parse_python(src)
    data = src.encode("utf-8")
    for node in tree.walk():
        if node.leaf_text is not None:
            assert data[node.span[0] : node.span[1]].decode("utf-8") == node.leaf_text


@pytest.mark.parametrize(
    "src,expected_kind",
    [
        ("x = [i * i for i in range(10)]", "list_comprehension"),
        ("d = {k: v for k, v in items}", "dictionary_comprehension"),
        ("s = {x for x in xs}", "set_comprehension"),
        ("g = (x for x in xs)", "generator_expression"),
        ("f = lambda a, b=1: a + b", "lambda"),
        ("y = a if cond else b", "conditional_expression"),
        ("z = -x ** 2", "unary_operator"),
        ("w = a @ b", "binary_operator"),
        ("v = x is not None", "comparison_operator"),
        ("u = not flag", "not_operator"),
        ("t = obj.attr.method(1, key=2)", "keyword_argument"),
        ("r = arr[1:10:2]", "slice"),
        ("q = (1, 2, 3)", "tuple"),
        ("async def f():\n    await g()", "await"),
        ("with open(p) as fh:\n    pass", "with_statement"),
        ("try:\n    x()\nexcept ValueError as e:\n    raise", "except_clause"),
        ("assert x, 'boom'", "assert_statement"),
        ("del x[0]", "delete_statement"),
        ("from os.path import join as j", "import_from_statement"),
        ("while x:\n    x -= 1\nelse:\n    done()", "else_clause"),
        ("@deco\ndef f():\n    pass", "decorated_definition"),
        ("class A(Base):\n    def m(self):\n        return 1", "class_definition"),
        ("x, y = y, x", "expression_list"),
        ("print(*args, **kw)", "dictionary_splat"),
        ("n = f'{x} items'", "string"),
        ("if a:\n    b()\nelif c:\n    d()", "elif_clause"),
        ("x: int = 5", "type"),
        ("global counter", "global_statement"),
        ("result = yield value", "yield"),
        ("m = x if (n := len(s)) > 3 else y", "named_expression"),
    ],
)
def test_construct_coverage_without_errors(src, expected_kind):
    tree = parse_python(src)
    assert not tree.has_error(), f"unexpected ERROR parsing {src!r}"
    assert expected_kind in kinds_preorder(tree)


def test_semicolon_line_yields_separate_statements():
    tree = parse_python("a = 1; b = 2\n")
    stmts = [c.kind for c in tree.children]
    assert stmts == ["expression_statement", "expression_statement"]


def test_comparison_chain_is_single_node():
    tree = parse_python("ok = 0 <= x < n\n")
    chains = [n for n in tree.walk() if n.kind == "comparison_operator"]
    assert len(chains) == 1
    assert len([c for c in chains[0].children if c.kind in ("<=", "<")]) == 2


def test_error_recovery_is_local():
    src = "x = 1\nreturn return\ny = 2\n"
    tree = parse_python(src)
    assert tree.error_count() >= 1
    kinds = [c.kind for c in tree.children]
    assert kinds.count("expression_statement") == 2  # both good lines survive


def test_unclosed_paren_consumes_continuation():
    # an open '(' joins the next physical line, so recovery spans both
    tree = parse_python("def broken(:\ny = 2\n")
    assert tree.error_count() >= 1


def test_parse_source_dispatch():
    unit = SourceUnit(Language.PYTHON, "def f(x):\n    return x")
    tree = parse_source(unit)
    assert tree.kind == "module"
