"""Recursive-descent Java parser for the class/method/statement subset.

Handles classes, methods, fields, the full statement grammar used in
algorithmic corpora, generics (with '>'-run re-merging), lambdas, method
references, casts, and anonymous array initializers. Panic-mode recovery
at statement and member level turns bad regions into ERROR nodes, so
parsing is total.
"""

from __future__ import annotations

from sirforge.sir import javalex
from sirforge.sir.javalex import KEYWORDS, Token
from sirforge.sir.tree import AstNode

_MODIFIERS = frozenset(
    "public private protected static final abstract native synchronized transient volatile strictfp default".split()
)
_PRIMITIVES = {
    "int": "integral_type",
    "long": "integral_type",
    "short": "integral_type",
    "byte": "integral_type",
    "char": "integral_type",
    "boolean": "boolean_type",
    "float": "floating_point_type",
    "double": "floating_point_type",
    "void": "void_type",
}
_ASSIGN_OPS = {"=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<="}


class ParseError(Exception):
    pass


def _leaf(tok: Token, kind: str | None = None) -> AstNode:
    return AstNode(kind or tok.text, (tok.start, tok.end), [], tok.text)


def _node(kind: str, children: list[AstNode]) -> AstNode:
    if not children:
        raise ParseError(f"empty {kind} node")
    return AstNode(kind, (children[0].span[0], children[-1].span[1]), children)


class JavaParser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    # -- token helpers ---------------------------------------------------

    def peek(self, offset: int = 0) -> Token:
        j = min(self.pos + offset, len(self.tokens) - 1)
        return self.tokens[j]

    def at_op(self, op: str) -> bool:
        tok = self.peek()
        return tok.type == javalex.OP and tok.text == op

    def at_kw(self, word: str) -> bool:
        tok = self.peek()
        return tok.type == javalex.NAME and tok.text == word

    def at_eof(self) -> bool:
        return self.peek().type == javalex.EOF

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if self.pos < len(self.tokens) - 1:
            self.pos += 1
        return tok

    def expect_op(self, op: str) -> AstNode:
        if not self.at_op(op):
            raise ParseError(f"expected {op!r}, found {self.peek().text!r}")
        return _leaf(self.advance())

    def expect_kw(self, word: str) -> AstNode:
        if not self.at_kw(word):
            raise ParseError(f"expected {word!r}, found {self.peek().text!r}")
        return _leaf(self.advance())

    def expect_name(self) -> AstNode:
        tok = self.peek()
        if tok.type != javalex.NAME or tok.text in KEYWORDS:
            raise ParseError(f"expected identifier, found {tok.text!r}")
        self.advance()
        return _leaf(tok, "identifier")

    def mark(self) -> int:
        return self.pos

    def reset(self, mark: int) -> None:
        self.pos = mark

    # -- program ----------------------------------------------------------

    def parse_program(self) -> AstNode:
        children: list[AstNode] = []
        while not self.at_eof():
            children.append(self._top_level())
        end = self.tokens[-1].end
        span = (0, end)
        return AstNode("program", span, children)

    def _top_level(self) -> AstNode:
        start = self.mark()
        try:
            if self.at_kw("package"):
                kw = _leaf(self.advance())
                name = self._qualified_name()
                semi = self.expect_op(";")
                return _node("package_declaration", [kw, name, semi])
            if self.at_kw("import"):
                kw = _leaf(self.advance())
                children = [kw]
                if self.at_kw("static"):
                    children.append(_leaf(self.advance()))
                children.append(self._qualified_name())
                if self.at_op("."):
                    children.append(_leaf(self.advance()))
                    children.append(self.expect_op("*"))
                children.append(self.expect_op(";"))
                return _node("import_declaration", children)
            if self._looks_like_class():
                return self._class_declaration()
            method = self._try_method_declaration()
            if method is not None:
                return method
            return self._statement()
        except ParseError:
            return self._recover(start)

    def _recover(self, start: int) -> AstNode:
        self.pos = start
        leaves: list[AstNode] = []
        depth = 0
        entered_braces = False
        while not self.at_eof():
            tok = self.peek()
            if tok.type == javalex.OP:
                if tok.text == "{":
                    depth += 1
                    entered_braces = True
                elif tok.text == "}":
                    if depth == 0:
                        break
                    depth -= 1
                    if depth == 0 and entered_braces:
                        # consumed one balanced brace group: sync point
                        t = self.advance()
                        leaves.append(_leaf(t, _leaf_kind(t)))
                        break
                elif tok.text == ";" and depth == 0:
                    leaves.append(_leaf(self.advance(), _leaf_kind(tok)))
                    break
            t = self.advance()
            leaves.append(_leaf(t, _leaf_kind(t)))
        if not leaves:
            tok = self.peek()
            node = AstNode("ERROR", (tok.start, tok.end), [], "")
            if not self.at_eof():
                self.advance()
            return node
        return _node("ERROR", leaves)

    def _qualified_name(self) -> AstNode:
        parts = [self.expect_name()]
        while self.at_op(".") and self.peek(1).type == javalex.NAME and self.peek(1).text not in KEYWORDS:
            parts.append(_leaf(self.advance()))
            parts.append(self.expect_name())
        if len(parts) == 1:
            return parts[0]
        return _node("scoped_identifier", parts)

    # -- classes and members ------------------------------------------------

    def _looks_like_class(self) -> bool:
        j = 0
        while True:
            tok = self.peek(j)
            if tok.type == javalex.NAME and tok.text in _MODIFIERS:
                j += 1
            elif tok.type == javalex.OP and tok.text == "@":
                j += 2  # annotation name; arguments make this inexact but rare at class level
            else:
                break
        tok = self.peek(j)
        return tok.type == javalex.NAME and tok.text in ("class", "interface", "enum", "record")

    def _modifiers(self) -> AstNode | None:
        mods: list[AstNode] = []
        while True:
            if self.peek().type == javalex.NAME and self.peek().text in _MODIFIERS:
                mods.append(_leaf(self.advance()))
            elif self.at_op("@") and self.peek(1).type == javalex.NAME:
                mods.append(self._annotation())
            else:
                break
        if not mods:
            return None
        return _node("modifiers", mods)

    def _annotation(self) -> AstNode:
        at = self.expect_op("@")
        name = self._qualified_name()
        children = [at, name]
        if self.at_op("("):
            children.append(self._argument_list())
        return _node("annotation", children)

    def _class_declaration(self) -> AstNode:
        children: list[AstNode] = []
        mods = self._modifiers()
        if mods is not None:
            children.append(mods)
        kind_word = self.peek().text
        kind = {
            "class": "class_declaration",
            "interface": "interface_declaration",
            "enum": "enum_declaration",
            "record": "record_declaration",
        }[kind_word]
        children.append(_leaf(self.advance()))
        children.append(self.expect_name())
        if self.at_op("<"):
            children.append(self._type_parameters())
        if kind == "record_declaration" and self.at_op("("):
            children.append(self._formal_parameters())
        if self.at_kw("extends"):
            children.append(_leaf(self.advance()))
            children.append(self._type())
        if self.at_kw("implements"):
            children.append(_leaf(self.advance()))
            children.append(self._type())
            while self.at_op(","):
                children.append(_leaf(self.advance()))
                children.append(self._type())
        children.append(self._class_body(enum=kind == "enum_declaration"))
        return _node(kind, children)

    def _class_body(self, enum: bool = False) -> AstNode:
        children = [self.expect_op("{")]
        if enum:
            # enum constants: Name[(args)] (, Name[(args)])* [;]
            while self.peek().type == javalex.NAME and self.peek().text not in KEYWORDS:
                constant = [self.expect_name()]
                if self.at_op("("):
                    constant.append(self._argument_list())
                children.append(_node("enum_constant", constant))
                if self.at_op(","):
                    children.append(_leaf(self.advance()))
                else:
                    break
            if self.at_op(";"):
                children.append(_leaf(self.advance()))
        while not self.at_op("}") and not self.at_eof():
            children.append(self._member())
        children.append(self.expect_op("}"))
        return _node("class_body", children)

    def _member(self) -> AstNode:
        start = self.mark()
        try:
            if self.at_op(";"):
                return _leaf(self.advance())
            if self._looks_like_class():
                return self._class_declaration()
            if self.at_op("{"):  # instance initializer
                return self._block()
            if self.at_kw("static") and self.peek(1).type == javalex.OP and self.peek(1).text == "{":
                kw = _leaf(self.advance())
                return _node("static_initializer", [kw, self._block()])
            method = self._try_method_declaration()
            if method is not None:
                return method
            ctor = self._try_constructor()
            if ctor is not None:
                return ctor
            return self._field_declaration()
        except ParseError:
            return self._recover(start)

    def _try_method_declaration(self) -> AstNode | None:
        start = self.mark()
        try:
            children: list[AstNode] = []
            mods = self._modifiers()
            if mods is not None:
                children.append(mods)
            if self.at_op("<"):
                children.append(self._type_parameters())
            type_node = self._type()
            name = self.expect_name()
            if not self.at_op("("):
                raise ParseError("not a method")
            children.extend([type_node, name, self._formal_parameters()])
            while self.at_op("["):  # archaic int m()[] form
                children.append(_leaf(self.advance()))
                children.append(self.expect_op("]"))
            if self.at_kw("throws"):
                children.append(_leaf(self.advance()))
                children.append(self._type())
                while self.at_op(","):
                    children.append(_leaf(self.advance()))
                    children.append(self._type())
            if self.at_op(";"):
                children.append(_leaf(self.advance()))
            else:
                children.append(self._block())
            return _node("method_declaration", children)
        except ParseError:
            self.reset(start)
            return None

    def _try_constructor(self) -> AstNode | None:
        start = self.mark()
        try:
            children: list[AstNode] = []
            mods = self._modifiers()
            if mods is not None:
                children.append(mods)
            name = self.expect_name()
            if not self.at_op("("):
                raise ParseError("not a constructor")
            children.extend([name, self._formal_parameters(), self._block()])
            return _node("constructor_declaration", children)
        except ParseError:
            self.reset(start)
            return None

    def _field_declaration(self) -> AstNode:
        children = []
        mods = self._modifiers()
        if mods is not None:
            children.append(mods)
        children.append(self._type())
        children.append(self._variable_declarator())
        while self.at_op(","):
            children.append(_leaf(self.advance()))
            children.append(self._variable_declarator())
        children.append(self.expect_op(";"))
        return _node("field_declaration", children)

    def _variable_declarator(self) -> AstNode:
        children = [self.expect_name()]
        while self.at_op("["):
            children.append(_leaf(self.advance()))
            children.append(self.expect_op("]"))
        if self.at_op("="):
            children.append(_leaf(self.advance()))
            children.append(self._variable_initializer())
        return _node("variable_declarator", children)

    def _variable_initializer(self) -> AstNode:
        if self.at_op("{"):
            return self._array_initializer()
        return self.parse_expression()

    def _array_initializer(self) -> AstNode:
        children = [self.expect_op("{")]
        while not self.at_op("}"):
            children.append(self._variable_initializer())
            if self.at_op(","):
                children.append(_leaf(self.advance()))
            elif not self.at_op("}"):
                raise ParseError("malformed array initializer")
        children.append(self.expect_op("}"))
        return _node("array_initializer", children)

    # -- types ---------------------------------------------------------------

    def _type_parameters(self) -> AstNode:
        children = [self.expect_op("<")]
        children.append(self._type_parameter())
        while self.at_op(","):
            children.append(_leaf(self.advance()))
            children.append(self._type_parameter())
        children.append(self._close_angle())
        return _node("type_parameters", children)

    def _type_parameter(self) -> AstNode:
        children = [self.expect_name()]
        if self.at_kw("extends"):
            children.append(_leaf(self.advance()))
            children.append(self._type())
        return _node("type_parameter", children)

    def _close_angle(self) -> AstNode:
        # '>' may be the head of a lexed '>' run; take exactly one
        if not self.at_op(">"):
            raise ParseError(f"expected '>', found {self.peek().text!r}")
        return _leaf(self.advance())

    def _type(self) -> AstNode:
        tok = self.peek()
        if tok.type == javalex.NAME and tok.text in _PRIMITIVES:
            base: AstNode = _leaf(self.advance(), _PRIMITIVES[tok.text])
        else:
            base = self._class_type()
        while self.at_op("[") and self.peek(1).type == javalex.OP and self.peek(1).text == "]":
            lb = _leaf(self.advance())
            rb = _leaf(self.advance())
            base = _node("array_type", [base, lb, rb])
        return base

    def _class_type(self) -> AstNode:
        base: AstNode = _leaf_type(self.expect_name())
        while True:
            if self.at_op("<"):
                args = self._type_arguments()
                base = _node("generic_type", [base, args])
            elif self.at_op(".") and self.peek(1).type == javalex.NAME and self.peek(1).text not in KEYWORDS:
                dot = _leaf(self.advance())
                base = _node("scoped_type_identifier", [base, dot, _leaf_type(self.expect_name())])
            else:
                return base

    def _type_arguments(self) -> AstNode:
        children = [self.expect_op("<")]
        if self.at_op(">"):  # diamond
            children.append(self._close_angle())
            return _node("type_arguments", children)
        children.append(self._type_argument())
        while self.at_op(","):
            children.append(_leaf(self.advance()))
            children.append(self._type_argument())
        children.append(self._close_angle())
        return _node("type_arguments", children)

    def _type_argument(self) -> AstNode:
        if self.at_op("?"):
            children = [_leaf(self.advance())]
            if self.at_kw("extends") or self.at_kw("super"):
                children.append(_leaf(self.advance()))
                children.append(self._type())
            return _node("wildcard", children)
        return self._type()

    # -- statements ------------------------------------------------------------

    def _block(self) -> AstNode:
        children = [self.expect_op("{")]
        while not self.at_op("}") and not self.at_eof():
            children.append(self._statement())
        children.append(self.expect_op("}"))
        return _node("block", children)

    def _statement(self) -> AstNode:
        start = self.mark()
        try:
            return self._statement_inner()
        except ParseError:
            return self._recover(start)

    def _statement_inner(self) -> AstNode:
        tok = self.peek()
        if tok.type == javalex.OP:
            if tok.text == "{":
                return self._block()
            if tok.text == ";":
                return _leaf(self.advance())
        if tok.type == javalex.NAME:
            word = tok.text
            if word == "if":
                return self._if_statement()
            if word == "while":
                return self._while_statement()
            if word == "do":
                return self._do_statement()
            if word == "for":
                return self._for_statement()
            if word == "return":
                kw = _leaf(self.advance())
                children = [kw]
                if not self.at_op(";"):
                    children.append(self.parse_expression())
                children.append(self.expect_op(";"))
                return _node("return_statement", children)
            if word in ("break", "continue"):
                kw = _leaf(self.advance())
                children = [kw]
                if self.peek().type == javalex.NAME and self.peek().text not in KEYWORDS:
                    children.append(self.expect_name())
                children.append(self.expect_op(";"))
                return _node(f"{word}_statement", children)
            if word == "throw":
                kw = _leaf(self.advance())
                children = [kw, self.parse_expression(), self.expect_op(";")]
                return _node("throw_statement", children)
            if word == "try":
                return self._try_statement()
            if word == "switch":
                return self._switch_statement()
            if word == "synchronized" and self.peek(1).text == "(":
                kw = _leaf(self.advance())
                lp = self.expect_op("(")
                expr = self.parse_expression()
                rp = self.expect_op(")")
                return _node("synchronized_statement", [kw, lp, expr, rp, self._block()])
            if word == "assert":
                kw = _leaf(self.advance())
                children = [kw, self.parse_expression()]
                if self.at_op(":"):
                    children.append(_leaf(self.advance()))
                    children.append(self.parse_expression())
                children.append(self.expect_op(";"))
                return _node("assert_statement", children)
            if self._looks_like_class():
                return self._class_declaration()
            if (
                word not in KEYWORDS
                and self.peek(1).type == javalex.OP
                and self.peek(1).text == ":"
            ):
                label = self.expect_name()
                colon = _leaf(self.advance())
                return _node("labeled_statement", [label, colon, self._statement()])
        decl = self._try_local_declaration()
        if decl is not None:
            return decl
        expr = self.parse_expression()
        semi = self.expect_op(";")
        return _node("expression_statement", [expr, semi])

    def _try_local_declaration(self) -> AstNode | None:
        start = self.mark()
        try:
            children: list[AstNode] = []
            mods = self._modifiers()
            if mods is not None:
                children.append(mods)
            type_node = self._type()
            if not (self.peek().type == javalex.NAME and self.peek().text not in KEYWORDS):
                raise ParseError("not a declaration")
            children.append(type_node)
            children.append(self._variable_declarator())
            while self.at_op(","):
                children.append(_leaf(self.advance()))
                children.append(self._variable_declarator())
            children.append(self.expect_op(";"))
            return _node("local_variable_declaration", children)
        except ParseError:
            self.reset(start)
            return None

    def _parenthesized(self) -> AstNode:
        lp = self.expect_op("(")
        expr = self.parse_expression()
        rp = self.expect_op(")")
        return _node("parenthesized_expression", [lp, expr, rp])

    def _if_statement(self) -> AstNode:
        children = [self.expect_kw("if"), self._parenthesized(), self._statement()]
        if self.at_kw("else"):
            children.append(_leaf(self.advance()))
            children.append(self._statement())
        return _node("if_statement", children)

    def _while_statement(self) -> AstNode:
        return _node("while_statement", [self.expect_kw("while"), self._parenthesized(), self._statement()])

    def _do_statement(self) -> AstNode:
        kw = self.expect_kw("do")
        body = self._statement()
        while_kw = self.expect_kw("while")
        cond = self._parenthesized()
        semi = self.expect_op(";")
        return _node("do_statement", [kw, body, while_kw, cond, semi])

    def _for_statement(self) -> AstNode:
        kw = self.expect_kw("for")
        lp = self.expect_op("(")
        # enhanced for: [mods] type name : expr
        start = self.mark()
        enhanced = self._try_enhanced_header()
        if enhanced is not None:
            type_node, name, colon, expr = enhanced
            rp = self.expect_op(")")
            body = self._statement()
            return _node(
                "enhanced_for_statement", [kw, lp, type_node, name, colon, expr, rp, body]
            )
        self.reset(start)
        children = [kw, lp]
        if self.at_op(";"):
            children.append(_leaf(self.advance()))
        else:
            init = self._try_local_declaration()
            if init is not None:
                children.append(init)  # declaration consumes its ';'
            else:
                children.append(self._expression_list())
                children.append(self.expect_op(";"))
        if not self.at_op(";"):
            children.append(self.parse_expression())
        children.append(self.expect_op(";"))
        if not self.at_op(")"):
            children.append(self._expression_list())
        children.append(self.expect_op(")"))
        children.append(self._statement())
        return _node("for_statement", children)

    def _try_enhanced_header(self) -> tuple[AstNode, AstNode, AstNode, AstNode] | None:
        start = self.mark()
        try:
            self._modifiers()
            type_node = self._type()
            name = self.expect_name()
            colon = self.expect_op(":")
            expr = self.parse_expression()
            return type_node, name, colon, expr
        except ParseError:
            self.reset(start)
            return None

    def _expression_list(self) -> AstNode:
        first = self.parse_expression()
        if not self.at_op(","):
            return first
        children = [first]
        while self.at_op(","):
            children.append(_leaf(self.advance()))
            children.append(self.parse_expression())
        return _node("expression_list", children)

    def _try_statement(self) -> AstNode:
        children = [self.expect_kw("try")]
        if self.at_op("("):
            res = [_leaf(self.advance())]
            while not self.at_op(")"):
                decl_start = self.mark()
                inner = self._try_resource()
                if inner is None:
                    self.reset(decl_start)
                    res.append(self.parse_expression())
                else:
                    res.append(inner)
                if self.at_op(";"):
                    res.append(_leaf(self.advance()))
            res.append(self.expect_op(")"))
            children.append(_node("resource_specification", res))
        children.append(self._block())
        saw_handler = False
        while self.at_kw("catch"):
            saw_handler = True
            sub = [_leaf(self.advance()), self.expect_op("(")]
            self._modifiers()
            sub.append(self._type())
            while self.at_op("|"):
                sub.append(_leaf(self.advance()))
                sub.append(self._type())
            sub.append(self.expect_name())
            sub.append(self.expect_op(")"))
            sub.append(self._block())
            children.append(_node("catch_clause", sub))
        if self.at_kw("finally"):
            saw_handler = True
            children.append(_node("finally_clause", [_leaf(self.advance()), self._block()]))
        if not saw_handler and len(children) == 2:
            raise ParseError("try without catch/finally")
        return _node("try_statement", children)

    def _try_resource(self) -> AstNode | None:
        try:
            children: list[AstNode] = []
            mods = self._modifiers()
            if mods is not None:
                children.append(mods)
            children.append(self._type())
            children.append(self.expect_name())
            children.append(self.expect_op("="))
            children.append(self.parse_expression())
            return _node("resource", children)
        except ParseError:
            return None

    def _switch_statement(self) -> AstNode:
        kw = self.expect_kw("switch")
        cond = self._parenthesized()
        body = [self.expect_op("{")]
        while not self.at_op("}") and not self.at_eof():
            if self.at_kw("case"):
                label = [_leaf(self.advance()), self.parse_expression()]
                label.append(self.expect_op(":"))
                body.append(_node("switch_label", label))
            elif self.at_kw("default"):
                label = [_leaf(self.advance()), self.expect_op(":")]
                body.append(_node("switch_label", label))
            else:
                body.append(self._statement())
        body.append(self.expect_op("}"))
        return _node("switch_statement", [kw, cond, _node("switch_block", body)])

    # -- expressions ------------------------------------------------------------

    def parse_expression(self) -> AstNode:
        lam = self._try_lambda()
        if lam is not None:
            return lam
        left = self._ternary()
        tok = self.peek()
        if tok.type == javalex.OP and tok.text in _ASSIGN_OPS:
            op = _leaf(self.advance())
            return _node("assignment_expression", [left, op, self.parse_expression()])
        merged = self._merge_shift_assign()
        if merged is not None:
            return _node("assignment_expression", [left, merged, self.parse_expression()])
        return left

    def _merge_shift_assign(self) -> AstNode | None:
        # '>' '>' '=' or '>' '>' '>' '=' runs lexed as singles/'>=' pairs
        t0, t1, t2 = self.peek(0), self.peek(1), self.peek(2)
        if t0.type == javalex.OP and t0.text == ">":
            if t1.type == javalex.OP and t1.text == ">=" and t1.start == t0.end:
                self.advance()
                self.advance()
                return AstNode(">>=", (t0.start, t1.end), [], ">>=")
            if (
                t1.type == javalex.OP and t1.text == ">" and t1.start == t0.end
                and t2.type == javalex.OP and t2.text == ">=" and t2.start == t1.end
            ):
                self.advance()
                self.advance()
                self.advance()
                return AstNode(">>>=", (t0.start, t2.end), [], ">>>=")
        return None

    def _try_lambda(self) -> AstNode | None:
        start = self.mark()
        tok = self.peek()
        if tok.type == javalex.NAME and tok.text not in KEYWORDS and self.peek(1).text == "->":
            name = self.expect_name()
            arrow = _leaf(self.advance())
            return _node("lambda_expression", [name, arrow, self._lambda_body()])
        if tok.type == javalex.OP and tok.text == "(":
            depth = 0
            j = 0
            while True:
                t = self.peek(j)
                if t.type == javalex.EOF:
                    return None
                if t.type == javalex.OP:
                    if t.text == "(":
                        depth += 1
                    elif t.text == ")":
                        depth -= 1
                        if depth == 0:
                            break
                j += 1
            after = self.peek(j + 1)
            if not (after.type == javalex.OP and after.text == "->"):
                return None
            try:
                params = self._lambda_parameters()
                arrow = self.expect_op("->")
                return _node("lambda_expression", [params, arrow, self._lambda_body()])
            except ParseError:
                self.reset(start)
                return None
        return None

    def _lambda_parameters(self) -> AstNode:
        children = [self.expect_op("(")]
        while not self.at_op(")"):
            start = self.mark()
            typed = self._try_typed_param()
            if typed is None:
                self.reset(start)
                children.append(self.expect_name())
            else:
                children.append(typed)
            if self.at_op(","):
                children.append(_leaf(self.advance()))
        children.append(self.expect_op(")"))
        return _node("inferred_parameters", children)

    def _try_typed_param(self) -> AstNode | None:
        try:
            type_node = self._type()
            name = self.expect_name()
            return _node("formal_parameter", [type_node, name])
        except ParseError:
            return None

    def _lambda_body(self) -> AstNode:
        if self.at_op("{"):
            return self._block()
        return self.parse_expression()

    def _ternary(self) -> AstNode:
        cond = self._binary(0)
        if self.at_op("?"):
            q = _leaf(self.advance())
            then = self.parse_expression()
            colon = self.expect_op(":")
            alt = self.parse_expression()
            return _node("ternary_expression", [cond, q, then, colon, alt])
        return cond

    _BINARY_LEVELS: list[tuple[str, ...]] = [
        ("||",),
        ("&&",),
        ("|",),
        ("^",),
        ("&",),
        ("==", "!="),
        ("<", ">", "<=", ">=", "instanceof"),
        ("<<", ">>", ">>>"),
        ("+", "-"),
        ("*", "/", "%"),
    ]

    def _peek_binary_op(self, level: int) -> AstNode | None:
        ops = self._BINARY_LEVELS[level]
        tok = self.peek()
        if "instanceof" in ops and tok.type == javalex.NAME and tok.text == "instanceof":
            return _leaf(self.advance())
        if tok.type != javalex.OP:
            return None
        if ">>" in ops and tok.text == ">":
            nxt = self.peek(1)
            if nxt.type == javalex.OP and nxt.text == ">" and nxt.start == tok.end:
                third = self.peek(2)
                if third.type == javalex.OP and third.text == ">" and third.start == nxt.end:
                    t0 = self.advance()
                    self.advance()
                    t2 = self.advance()
                    return AstNode(">>>", (t0.start, t2.end), [], ">>>")
                t0 = self.advance()
                t1 = self.advance()
                return AstNode(">>", (t0.start, t1.end), [], ">>")
        if tok.text == ">" and "<" in ops:
            nxt = self.peek(1)
            if nxt.type == javalex.OP and nxt.text in (">", ">=") and nxt.start == tok.end:
                return None  # head of a shift or shift-assign run
        if tok.text in ops:
            return _leaf(self.advance())
        return None

    def _binary(self, level: int) -> AstNode:
        if level >= len(self._BINARY_LEVELS):
            return self._unary()
        left = self._binary(level + 1)
        while True:
            op = self._peek_binary_op(level)
            if op is None:
                return left
            if op.kind == "instanceof":
                right: AstNode = self._type()
                left = _node("instanceof_expression", [left, op, right])
            else:
                left = _node("binary_expression", [left, op, self._binary(level + 1)])

    def _unary(self) -> AstNode:
        tok = self.peek()
        if tok.type == javalex.OP:
            if tok.text in ("!", "~", "+", "-"):
                op = _leaf(self.advance())
                return _node("unary_expression", [op, self._unary()])
            if tok.text in ("++", "--"):
                op = _leaf(self.advance())
                return _node("update_expression", [op, self._unary()])
            if tok.text == "(":
                cast = self._try_cast()
                if cast is not None:
                    return cast
        return self._postfix()

    def _try_cast(self) -> AstNode | None:
        start = self.mark()
        try:
            lp = self.expect_op("(")
            type_node = self._type()
            rp = self.expect_op(")")
            nxt = self.peek()
            primitive = type_node.kind in ("integral_type", "floating_point_type", "boolean_type")
            if primitive or type_node.kind == "array_type" or _starts_cast_operand(nxt):
                operand = self._unary()
                return _node("cast_expression", [lp, type_node, rp, operand])
            raise ParseError("not a cast")
        except ParseError:
            self.reset(start)
            return None

    def _postfix(self) -> AstNode:
        expr = self._primary()
        while True:
            tok = self.peek()
            if tok.type == javalex.OP and tok.text in ("++", "--"):
                op = _leaf(self.advance())
                expr = _node("update_expression", [expr, op])
            elif self.at_op(".") and self.peek(1).type == javalex.NAME:
                dot = _leaf(self.advance())
                if self.peek().text in ("new",):
                    raise ParseError("qualified new unsupported")
                name_tok = self.advance()
                name = _leaf(name_tok, "identifier" if name_tok.text not in KEYWORDS else name_tok.text)
                if self.at_op("("):
                    args = self._argument_list()
                    expr = _node("method_invocation", [expr, dot, name, args])
                else:
                    expr = _node("field_access", [expr, dot, name])
            elif self.at_op("::"):
                colons = _leaf(self.advance())
                if self.at_kw("new"):
                    expr = _node("method_reference", [expr, colons, _leaf(self.advance())])
                else:
                    expr = _node("method_reference", [expr, colons, self.expect_name()])
            elif self.at_op("["):
                lb = _leaf(self.advance())
                index = self.parse_expression()
                rb = self.expect_op("]")
                expr = _node("array_access", [expr, lb, index, rb])
            else:
                return expr

    def _argument_list(self) -> AstNode:
        children = [self.expect_op("(")]
        while not self.at_op(")"):
            children.append(self.parse_expression())
            if self.at_op(","):
                children.append(_leaf(self.advance()))
            elif not self.at_op(")"):
                raise ParseError("malformed arguments")
        children.append(self.expect_op(")"))
        return _node("argument_list", children)

    def _primary(self) -> AstNode:
        tok = self.peek()
        if tok.type == javalex.NUMBER:
            self.advance()
            return _leaf(tok, _number_kind(tok.text))
        if tok.type == javalex.STRING:
            self.advance()
            return _leaf(tok, "string_literal")
        if tok.type == javalex.CHAR:
            self.advance()
            return _leaf(tok, "character_literal")
        if tok.type == javalex.OP and tok.text == "(":
            return self._parenthesized()
        if tok.type == javalex.NAME:
            word = tok.text
            if word == "true":
                return _leaf(self.advance(), "true")
            if word == "false":
                return _leaf(self.advance(), "false")
            if word == "null":
                return _leaf(self.advance(), "null_literal")
            if word == "this":
                node = _leaf(self.advance(), "this")
                if self.at_op("("):
                    return _node("explicit_constructor_invocation", [node, self._argument_list()])
                return node
            if word == "super":
                node = _leaf(self.advance(), "super")
                if self.at_op("("):
                    return _node("explicit_constructor_invocation", [node, self._argument_list()])
                return node
            if word == "new":
                return self._new_expression()
            if word in _PRIMITIVES:
                # int.class / int[]::new style references
                base = _leaf(self.advance(), _PRIMITIVES[word])
                if self.at_op(".") and self.peek(1).text == "class":
                    dot = _leaf(self.advance())
                    cls = _leaf(self.advance(), "class")
                    return _node("class_literal", [base, dot, cls])
                return base
            if word not in KEYWORDS:
                name = self.expect_name()
                if self.at_op("("):
                    return _node("method_invocation", [name, self._argument_list()])
                return name
        raise ParseError(f"unexpected token {tok.text!r}")

    def _new_expression(self) -> AstNode:
        kw = self.expect_kw("new")
        type_node = self._type_for_new()
        if self.at_op("["):
            dims: list[AstNode] = [kw, type_node]
            while self.at_op("["):
                dims.append(_leaf(self.advance()))
                if not self.at_op("]"):
                    dims.append(self.parse_expression())
                dims.append(self.expect_op("]"))
            if self.at_op("{"):
                dims.append(self._array_initializer())
            return _node("array_creation_expression", dims)
        children = [kw, type_node, self._argument_list()]
        if self.at_op("{"):
            children.append(self._class_body())
        return _node("object_creation_expression", children)

    def _type_for_new(self) -> AstNode:
        tok = self.peek()
        if tok.type == javalex.NAME and tok.text in _PRIMITIVES:
            return _leaf(self.advance(), _PRIMITIVES[tok.text])
        return self._class_type()

    def _formal_parameters(self) -> AstNode:
        children = [self.expect_op("(")]
        while not self.at_op(")"):
            param: list[AstNode] = []
            mods = self._modifiers()
            if mods is not None:
                param.append(mods)
            param.append(self._type())
            if self.at_op("..."):
                param.append(_leaf(self.advance()))
            param.append(self.expect_name())
            while self.at_op("["):
                param.append(_leaf(self.advance()))
                param.append(self.expect_op("]"))
            children.append(_node("formal_parameter", param))
            if self.at_op(","):
                children.append(_leaf(self.advance()))
            elif not self.at_op(")"):
                raise ParseError("malformed parameters")
        children.append(self.expect_op(")"))
        return _node("formal_parameters", children)


def _leaf_type(identifier: AstNode) -> AstNode:
    identifier.kind = "type_identifier"
    return identifier


def _starts_cast_operand(tok: Token) -> bool:
    if tok.type in (javalex.NUMBER, javalex.STRING, javalex.CHAR):
        return True
    if tok.type == javalex.NAME and tok.text not in KEYWORDS:
        return True
    if tok.type == javalex.NAME and tok.text in ("new", "this", "true", "false", "null"):
        return True
    if tok.type == javalex.OP and tok.text in ("(", "!", "~"):
        return True
    return False


def _number_kind(text: str) -> str:
    low = text.lower()
    if low.startswith("0x"):
        return "hex_integer_literal"
    if "." in low or "e" in low or low.endswith(("f", "d")):
        return "decimal_floating_point_literal"
    return "decimal_integer_literal"


def _leaf_kind(tok: Token) -> str:
    if tok.type == javalex.NAME:
        return tok.text if tok.text in KEYWORDS else "identifier"
    if tok.type == javalex.NUMBER:
        return _number_kind(tok.text)
    if tok.type == javalex.STRING:
        return "string_literal"
    if tok.type == javalex.CHAR:
        return "character_literal"
    if tok.type == javalex.ERRORTOKEN:
        return "ERROR"
    return tok.text


def parse_java(text: str) -> AstNode:
    """Parse text into a concrete tree; ERROR nodes mark bad regions."""
    tokens = javalex.tokenize(text)
    parser = JavaParser(tokens)
    root = parser.parse_program()
    _to_byte_spans(root, text)
    return root


def _to_byte_spans(root: AstNode, text: str) -> None:
    if text.isascii():
        return
    offs = [0] * (len(text) + 1)
    total = 0
    for idx, ch in enumerate(text):
        offs[idx] = total
        total += len(ch.encode("utf-8"))
    offs[len(text)] = total
    for node in root.walk():
        s, e = node.span
        node.span = (offs[s], offs[e])
