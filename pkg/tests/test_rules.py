import pytest

from sirforge.errors import EmptyResult, SchemaError
from sirforge.sir import (
    Language,
    NodeRuleTable,
    RuleOp,
    SourceUnit,
    build_sir,
    classify_node,
    default_rule_table,
    load_rule_table,
    parse_source,
)
from sirforge.sir.rules import parse_rule_line
from sirforge.sir.tree import AstNode


def table_from_rows():
    # the published rule rows, verbatim
    return NodeRuleTable(
        language=Language.PYTHON,
        universal={"if_statement"},
        semi_universal={"BlockStatement": "CompoundStatement"},
        language_specific={":"},
    )


def test_classify_universal_row():
    assert classify_node("if_statement", table_from_rows()) == (RuleOp.UNCHANGE, None)


def test_classify_replace_row():
    op, canonical = classify_node("BlockStatement", table_from_rows())
    assert op is RuleOp.REPLACE
    assert canonical == "CompoundStatement"


def test_classify_prune_row():
    assert classify_node(":", table_from_rows()) == (RuleOp.PRUNE, None)


def test_unlisted_kind_defaults_to_unchange():
    assert classify_node("made_up_kind", table_from_rows()) == (RuleOp.UNCHANGE, None)


def test_rule_sets_must_be_disjoint():
    with pytest.raises(SchemaError):
        NodeRuleTable(
            language=Language.PYTHON,
            universal={"block"},
            semi_universal={"block": "CompoundStatement"},
        )


def test_rule_line_parsing():
    rule = parse_rule_line("python block replace CompoundStatement  # note", 1)
    assert rule.kind == "block"
    assert rule.op is RuleOp.REPLACE
    assert rule.canonical == "CompoundStatement"
    assert parse_rule_line("   # comment only", 2) is None
    with pytest.raises(SchemaError):
        parse_rule_line("python block replace", 3)
    with pytest.raises(SchemaError):
        parse_rule_line("python block explode", 4)
    with pytest.raises(SchemaError):
        parse_rule_line("python : prune extra", 5)


def test_rule_file_round_trip(tmp_path):
    path = tmp_path / "mini.rules"
    path.write_text(
        "# version: test-7\n"
        "python block replace CompoundStatement\n"
        "python : prune\n"
        "java ; prune\n"
    )
    table = load_rule_table(path, "python")
    assert table.version == "test-7"
    assert table.semi_universal == {"block": "CompoundStatement"}
    assert table.language_specific == {":"}  # java rows ignored
    assert table.content_hash


def build(src, rules):
    return build_sir(parse_source(SourceUnit(Language.PYTHON, src)), rules)


FUNC = """def check(x):
    if x > 0:
        return x
    return 0
"""


def test_fig6_style_rewrite(py_rules):
    sir = build(FUNC, py_rules)
    kinds = sir.root.kinds()
    assert "CompoundStatement" in kinds
    assert "block" not in kinds
    assert "if_statement" in kinds
    assert ":" not in kinds
    assert "def" not in kinds


def test_purity_no_language_specific_kinds(py_rules):
    sir = build(FUNC, py_rules)
    assert not set(sir.root.kinds()) & py_rules.language_specific


def test_replacement_totality(py_rules):
    sir = build(FUNC, py_rules)
    assert not set(sir.root.kinds()) & set(py_rules.semi_universal)


def test_all_unchange_table_copies_structure():
    empty = NodeRuleTable(language=Language.PYTHON)
    ast = parse_source(SourceUnit(Language.PYTHON, FUNC))
    sir = build_sir(ast, empty)
    assert sir.root.kinds() == [n.kind for n in ast.walk()]


def test_idempotence_structural(py_rules):
    # applying the rewrite to an already-pure tree changes nothing: feed the
    # SIR kinds back through classification
    sir = build(FUNC, py_rules)
    for kind in sir.root.kinds():
        op, _ = classify_node(kind, py_rules)
        assert op is RuleOp.UNCHANGE, f"{kind} not a fixpoint"


def test_linearized_regenerates_byte_identically(py_rules):
    from sirforge.sir.tree import linearize

    sir = build(FUNC, py_rules)
    assert sir.linearized == linearize(sir.root)


def test_root_prune_raises():
    table = NodeRuleTable(language=Language.PYTHON, language_specific={"module"})
    with pytest.raises(EmptyResult):
        build("x = 1", table)


def test_span_soundness(py_rules):
    src = "def f(a):\n    total = a * 2\n    return total\n"
    unit = SourceUnit(Language.PYTHON, src)
    ast = parse_source(unit)
    sir = build_sir(ast, py_rules)
    data = unit.data
    for node_id, node in sir.iter_nodes():
        span = sir.node_span(node_id)
        sliced = data[span[0] : span[1]].decode()
        if node.is_leaf and node.leaf_text is not None:
            assert sliced == node.leaf_text
        else:
            assert sliced.strip()  # every internal node maps to real source


def test_statement_span_reparses_to_same_leaves(py_rules):
    # slicing a statement span out of the source and re-parsing it yields
    # the same pre-prune leaf sequence
    src = "def f(a):\n    total = a * 2\n    return total\n"
    unit = SourceUnit(Language.PYTHON, src)
    ast = parse_source(unit)
    sir = build_sir(ast, py_rules)
    from sirforge.corpus import sir_statement_nodes

    for _, node, span in sir_statement_nodes(sir):
        snippet = unit.data[span[0] : span[1]].decode()
        sub = parse_source(SourceUnit(Language.PYTHON, snippet))
        sub_leaves = [n.leaf_text for n in sub.walk() if n.is_leaf and n.leaf_text]
        orig = _find_ast_node_for_span(ast, span)
        orig_leaves = [n.leaf_text for n in orig.walk() if n.is_leaf and n.leaf_text]
        assert sub_leaves == orig_leaves


def _find_ast_node_for_span(ast: AstNode, span):
    best = None
    for node in ast.walk():
        if node.span == span:
            best = node
    assert best is not None
    return best


def test_default_tables_load_and_hash(py_rules, java_rules):
    assert py_rules.version.startswith("python-")
    assert java_rules.version.startswith("java-")
    assert py_rules.content_hash != java_rules.content_hash
    assert "block" in py_rules.semi_universal
    assert "block" in java_rules.semi_universal
