import pytest

from sirforge.sir.javaparse import parse_java


def kinds(node):
    return [n.kind for n in node.walk()]


def test_method_structure_matches_frozen_dump():
    tree = parse_java("int inc(int x) { return x + 1; }")
    assert kinds(tree) == [
        "program",
        "method_declaration",
        "integral_type",
        "identifier",
        "formal_parameters",
        "(",
        "formal_parameter",
        "integral_type",
        "identifier",
        ")",
        "block",
        "{",
        "return_statement",
        "return",
        "binary_expression",
        "identifier",
        "+",
        "decimal_integer_literal",
        ";",
        "}",
    ]
    assert not tree.has_error()


@pytest.mark.parametrize(
    "src,expected_kind",
    [
        ("class A { void m() { } }", "class_declaration"),
        ("int x = a >> 2;", "binary_expression"),
        ("x >>= 3;", "assignment_expression"),
        ("long y = v >>> 1;", "binary_expression"),
        ("Map<String, List<Integer>> m = new HashMap<>();", "generic_type"),
        ("int[][] grid = new int[rows][cols];", "array_creation_expression"),
        ("int[] a = {1, 2, 3};", "array_initializer"),
        ("for (int i = 0; i < n; i++) { sum += i; }", "for_statement"),
        ("for (String s : names) { use(s); }", "enhanced_for_statement"),
        ("do { i++; } while (i < n);", "do_statement"),
        ("outer: while (true) { break outer; }", "labeled_statement"),
        ("if (a instanceof String) { b(); }", "instanceof_expression"),
        ("double d = (double) total / count;", "cast_expression"),
        ("String s = flag ? \"y\" : \"n\";", "ternary_expression"),
        ("Runnable r = () -> run();", "lambda_expression"),
        ("Function<Integer, Integer> f = x -> x * 2;", "lambda_expression"),
        ("list.forEach(System.out::println);", "method_reference"),
        ("try { risky(); } catch (IOException | RuntimeException e) { log(e); } finally { close(); }", "catch_clause"),
        ("switch (c) { case 1: a(); break; default: b(); }", "switch_label"),
        ("throw new IllegalStateException(\"bad\");", "throw_statement"),
        ("assert x > 0 : \"positive\";", "assert_statement"),
        ("synchronized (lock) { counter++; }", "synchronized_statement"),
        ("public enum Color { RED, GREEN }", "enum_constant"),
        ("interface Shape { double area(); }", "interface_declaration"),
        ("class B extends A implements Runnable { }", "class_declaration"),
        ("char c = 'x';", "character_literal"),
        ("Object o = obj.field.inner;", "field_access"),
        ("int h = arr[i].length;", "array_access"),
        ("this.value = value;", "this"),
        ("List<? extends Number> xs = src;", "wildcard"),
    ],
)
def test_construct_coverage_without_errors(src, expected_kind):
    tree = parse_java(src)
    assert not tree.has_error(), f"unexpected ERROR parsing {src!r}"
    assert expected_kind in kinds(tree)


def test_leaf_text_equals_span_slice():
    src = 'String msg = "a // not comment"; // real comment\n'
    tree = parse_java(src)
    data = src.encode("utf-8")
    for node in tree.walk():
        if node.leaf_text is not None:
            assert data[node.span[0] : node.span[1]].decode() == node.leaf_text


def test_error_recovery_keeps_following_members():
    src = "class C { void broken( { } int ok() { return 1; } }"
    tree = parse_java(src)
    assert tree.error_count() >= 1
    assert "method_declaration" in kinds(tree)


def test_missing_semicolon_is_error():
    tree = parse_java("int x = 5")
    assert tree.error_count() >= 1


def test_nested_generics_shift_disambiguation():
    ok = parse_java("Map<K, Map<K, V>> deep = new HashMap<>(); int z = a >> b >> c;")
    assert not ok.has_error()
