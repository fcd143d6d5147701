"""Recursive-descent Python parser producing concrete syntax trees.

Covers the function-level subset found in parallel-code corpora:
definitions, the usual simple/compound statements, full expression grammar
with comprehensions and lambdas. f-strings stay atomic string tokens.
Unparseable regions become ERROR nodes via statement-level panic recovery,
so the parser is total over arbitrary text.

Node kind names follow the snake_case grammar convention; anonymous leaves
(keywords, punctuation) use their token text as kind.
"""

from __future__ import annotations

from sirforge.sir import pylex
from sirforge.sir.pylex import KEYWORDS, Token
from sirforge.sir.tree import AstNode

_AUG_OPS = {
    "+=", "-=", "*=", "/=", "//=", "%=", "@=", "**=",
    ">>=", "<<=", "&=", "|=", "^=",
}
_COMPARE_OPS = {"<", ">", "==", "!=", "<=", ">="}


class ParseError(Exception):
    pass


def _leaf(tok: Token, kind: str | None = None) -> AstNode:
    return AstNode(kind or tok.text, (tok.start, tok.end), [], tok.text)


def _node(kind: str, children: list[AstNode]) -> AstNode:
    if not children:
        raise ParseError(f"empty {kind} node")
    span = (children[0].span[0], children[-1].span[1])
    return AstNode(kind, span, children)


class PyParser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    # -- token helpers ---------------------------------------------------

    def peek(self, offset: int = 0) -> Token:
        j = min(self.pos + offset, len(self.tokens) - 1)
        return self.tokens[j]

    def at(self, type_: str, text: str | None = None) -> bool:
        tok = self.peek()
        return tok.type == type_ and (text is None or tok.text == text)

    def at_kw(self, word: str) -> bool:
        tok = self.peek()
        return tok.type == pylex.NAME and tok.text == word

    def at_op(self, op: str) -> bool:
        tok = self.peek()
        return tok.type == pylex.OP and tok.text == op

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
        if tok.type != pylex.NAME or tok.text in KEYWORDS:
            raise ParseError(f"expected identifier, found {tok.text!r}")
        self.advance()
        return _leaf(tok, "identifier")

    def eat_newline(self) -> None:
        if self.at(pylex.NEWLINE):
            self.advance()
        elif not self.at(pylex.ENDMARKER) and not self.at(pylex.DEDENT):
            raise ParseError(f"expected end of line, found {self.peek().text!r}")

    # -- entry points -----------------------------------------------------

    def parse_module(self) -> AstNode:
        children: list[AstNode] = []
        while not self.at(pylex.ENDMARKER):
            if self.at(pylex.NEWLINE) or self.at(pylex.DEDENT) or self.at(pylex.INDENT):
                self.advance()
                continue
            _extend_flat(children, self.parse_statement())
        end = self.tokens[-1].end
        span = (0, end) if not children else (0, max(end, children[-1].span[1]))
        return AstNode("module", span, children)

    # -- statements -------------------------------------------------------

    def parse_statement(self) -> AstNode:
        start_pos = self.pos
        try:
            return self._statement()
        except ParseError:
            return self._recover(start_pos)

    def _recover(self, start_pos: int) -> AstNode:
        self.pos = start_pos
        leaves: list[AstNode] = []
        while not (
            self.at(pylex.NEWLINE) or self.at(pylex.DEDENT) or self.at(pylex.ENDMARKER)
        ):
            tok = self.advance()
            if tok.type not in (pylex.INDENT,):
                leaves.append(_leaf(tok, _leaf_kind(tok)))
        if self.at(pylex.NEWLINE):
            self.advance()
        # a malformed header may still own an indented body; keep it inside
        if self.at(pylex.INDENT):
            self.advance()
            while not self.at(pylex.DEDENT) and not self.at(pylex.ENDMARKER):
                if self.at(pylex.NEWLINE):
                    self.advance()
                    continue
                leaves.append(self.parse_statement())
            if self.at(pylex.DEDENT):
                self.advance()
        if not leaves:
            tok = self.peek()
            leaves.append(AstNode("ERROR", (tok.start, tok.end), [], ""))
            if not self.at(pylex.ENDMARKER):
                self.advance()
            return leaves[0]
        return _node("ERROR", leaves)

    def _statement(self) -> AstNode:
        tok = self.peek()
        if tok.type == pylex.ERRORTOKEN:
            raise ParseError("lexer error token")
        if tok.type == pylex.NAME:
            word = tok.text
            if word == "if":
                return self._if_statement()
            if word == "while":
                return self._while_statement()
            if word == "for":
                return self._for_statement()
            if word == "try":
                return self._try_statement()
            if word == "with":
                return self._with_statement()
            if word == "def":
                return self._function_definition([])
            if word == "class":
                return self._class_definition([])
            if word == "async":
                return self._async_statement()
        if self.at_op("@"):
            return self._decorated_definition()
        return self._simple_statement_line()

    def _simple_statement_line(self) -> AstNode:
        first = self._small_statement()
        extra: list[AstNode] = []
        while self.at_op(";"):
            self.advance()
            if self.at(pylex.NEWLINE) or self.at(pylex.ENDMARKER) or self.at(pylex.DEDENT):
                break
            extra.append(self._small_statement())
        self.eat_newline()
        if not extra:
            return first
        # several statements on one physical line keep their own nodes
        return _node("statement_group", [first, *extra])

    def _small_statement(self) -> AstNode:
        tok = self.peek()
        if tok.type == pylex.NAME:
            word = tok.text
            if word == "return":
                return self._return_statement()
            if word == "pass":
                return _node("pass_statement", [_leaf(self.advance())])
            if word == "break":
                return _node("break_statement", [_leaf(self.advance())])
            if word == "continue":
                return _node("continue_statement", [_leaf(self.advance())])
            if word == "import":
                return self._import_statement()
            if word == "from":
                return self._import_from_statement()
            if word == "global":
                return self._name_list_statement("global_statement", "global")
            if word == "nonlocal":
                return self._name_list_statement("nonlocal_statement", "nonlocal")
            if word == "del":
                kw = _leaf(self.advance())
                return _node("delete_statement", [kw, self._expression_list()])
            if word == "raise":
                return self._raise_statement()
            if word == "assert":
                return self._assert_statement()
        return self._expression_statement()

    def _return_statement(self) -> AstNode:
        kw = self.expect_kw("return")
        children = [kw]
        if not (self.at(pylex.NEWLINE) or self.at(pylex.ENDMARKER) or self.at(pylex.DEDENT) or self.at_op(";")):
            children.append(self._expression_list())
        return _node("return_statement", children)

    def _raise_statement(self) -> AstNode:
        kw = self.expect_kw("raise")
        children = [kw]
        if not (self.at(pylex.NEWLINE) or self.at(pylex.ENDMARKER) or self.at(pylex.DEDENT) or self.at_op(";")):
            children.append(self.parse_expression())
            if self.at_kw("from"):
                children.append(_leaf(self.advance()))
                children.append(self.parse_expression())
        return _node("raise_statement", children)

    def _assert_statement(self) -> AstNode:
        kw = self.expect_kw("assert")
        children = [kw, self.parse_expression()]
        while self.at_op(","):
            children.append(_leaf(self.advance()))
            children.append(self.parse_expression())
        return _node("assert_statement", children)

    def _name_list_statement(self, kind: str, word: str) -> AstNode:
        kw = self.expect_kw(word)
        children = [kw, self.expect_name()]
        while self.at_op(","):
            children.append(_leaf(self.advance()))
            children.append(self.expect_name())
        return _node(kind, children)

    def _dotted_name(self) -> AstNode:
        parts = [self.expect_name()]
        while self.at_op(".") and self.peek(1).type == pylex.NAME:
            parts.append(_leaf(self.advance()))
            parts.append(self.expect_name())
        if len(parts) == 1:
            return parts[0]
        return _node("dotted_name", parts)

    def _aliased(self, target: AstNode) -> AstNode:
        if self.at_kw("as"):
            as_kw = _leaf(self.advance())
            return _node("aliased_import", [target, as_kw, self.expect_name()])
        return target

    def _import_statement(self) -> AstNode:
        kw = self.expect_kw("import")
        children = [kw, self._aliased(self._dotted_name())]
        while self.at_op(","):
            children.append(_leaf(self.advance()))
            children.append(self._aliased(self._dotted_name()))
        return _node("import_statement", children)

    def _import_from_statement(self) -> AstNode:
        kw = self.expect_kw("from")
        children = [kw]
        while self.at_op("."):
            children.append(_leaf(self.advance()))
        if not self.at_kw("import"):
            children.append(self._dotted_name())
        children.append(self.expect_kw("import"))
        if self.at_op("*"):
            children.append(_leaf(self.advance()))
            return _node("import_from_statement", children)
        parenthesized = self.at_op("(")
        if parenthesized:
            children.append(_leaf(self.advance()))
        children.append(self._aliased(self.expect_name()))
        while self.at_op(","):
            children.append(_leaf(self.advance()))
            if parenthesized and self.at_op(")"):
                break
            children.append(self._aliased(self.expect_name()))
        if parenthesized:
            children.append(self.expect_op(")"))
        return _node("import_from_statement", children)

    def _expression_statement(self) -> AstNode:
        if self.at_kw("yield"):
            return _node("expression_statement", [self._yield_expression()])
        first = self._expression_list(allow_star=True)
        if self.at_op(":"):
            # annotated assignment: target ":" type ["=" value]
            children = [first, _leaf(self.advance()), _node("type", [self.parse_expression()])]
            if self.at_op("="):
                children.append(_leaf(self.advance()))
                children.append(self._assign_rhs())
            return _node("expression_statement", [_node("assignment", children)])
        if self.at_op("="):
            eq = _leaf(self.advance())
            rhs = self._assign_rhs()
            node = _node("assignment", [first, eq, rhs])
            return _node("expression_statement", [node])
        tok = self.peek()
        if tok.type == pylex.OP and tok.text in _AUG_OPS:
            op = _leaf(self.advance())
            rhs = self._assign_rhs()
            return _node("expression_statement", [_node("augmented_assignment", [first, op, rhs])])
        return _node("expression_statement", [first])

    def _assign_rhs(self) -> AstNode:
        if self.at_kw("yield"):
            return self._yield_expression()
        value = self._expression_list(allow_star=True)
        if self.at_op("="):
            eq = _leaf(self.advance())
            return _node("assignment", [value, eq, self._assign_rhs()])
        return value

    def _yield_expression(self) -> AstNode:
        kw = self.expect_kw("yield")
        children = [kw]
        if self.at_kw("from"):
            children.append(_leaf(self.advance()))
            children.append(self.parse_expression())
        elif not (
            self.at(pylex.NEWLINE) or self.at(pylex.ENDMARKER) or self.at(pylex.DEDENT)
            or self.at_op(")") or self.at_op(";")
        ):
            children.append(self._expression_list())
        return _node("yield", children)

    def _expression_list(self, allow_star: bool = False) -> AstNode:
        first = self._star_or_expr() if allow_star else self.parse_expression()
        if not self.at_op(","):
            return first
        children = [first]
        while self.at_op(","):
            children.append(_leaf(self.advance()))
            if self._at_expression_end():
                break
            children.append(self._star_or_expr() if allow_star else self.parse_expression())
        return _node("expression_list", children)

    def _star_or_expr(self) -> AstNode:
        if self.at_op("*"):
            star = _leaf(self.advance())
            return _node("list_splat", [star, self.parse_expression()])
        return self.parse_expression()

    def _at_expression_end(self) -> bool:
        tok = self.peek()
        if tok.type in (pylex.NEWLINE, pylex.ENDMARKER, pylex.DEDENT):
            return True
        if tok.type == pylex.OP and tok.text in (")", "]", "}", ":", ";", "="):
            return True
        return False

    # -- compound statements ----------------------------------------------

    def _block(self) -> AstNode:
        colon = self.expect_op(":")
        if self.at(pylex.NEWLINE):
            self.advance()
            if not self.at(pylex.INDENT):
                raise ParseError("expected indented block")
            self.advance()
            statements: list[AstNode] = []
            while not self.at(pylex.DEDENT) and not self.at(pylex.ENDMARKER):
                if self.at(pylex.NEWLINE):
                    self.advance()
                    continue
                _extend_flat(statements, self.parse_statement())
            if self.at(pylex.DEDENT):
                self.advance()
            if not statements:
                raise ParseError("empty block")
            return _node("__colon_block", [colon, _node("block", statements)])
        # inline suite on the same line
        statements = [self._small_statement()]
        while self.at_op(";"):
            self.advance()
            if self.at(pylex.NEWLINE) or self.at(pylex.ENDMARKER):
                break
            statements.append(self._small_statement())
        self.eat_newline()
        return _node("__colon_block", [colon, _node("block", statements)])

    def _attach_block(self, children: list[AstNode]) -> None:
        wrapper = self._block()
        children.extend(wrapper.children)

    def _if_statement(self) -> AstNode:
        children = [self.expect_kw("if"), self.parse_expression()]
        self._attach_block(children)
        while self.at_kw("elif"):
            sub = [_leaf(self.advance()), self.parse_expression()]
            self._attach_block(sub)
            children.append(_node("elif_clause", sub))
        if self.at_kw("else"):
            sub = [_leaf(self.advance())]
            self._attach_block(sub)
            children.append(_node("else_clause", sub))
        return _node("if_statement", children)

    def _while_statement(self) -> AstNode:
        children = [self.expect_kw("while"), self.parse_expression()]
        self._attach_block(children)
        if self.at_kw("else"):
            sub = [_leaf(self.advance())]
            self._attach_block(sub)
            children.append(_node("else_clause", sub))
        return _node("while_statement", children)

    def _for_statement(self, async_kw: AstNode | None = None) -> AstNode:
        children = [self.expect_kw("for")]
        if async_kw is not None:
            children.insert(0, async_kw)
        children.append(self._target_list())
        children.append(self.expect_kw("in"))
        children.append(self._expression_list())
        self._attach_block(children)
        if self.at_kw("else"):
            sub = [_leaf(self.advance())]
            self._attach_block(sub)
            children.append(_node("else_clause", sub))
        return _node("for_statement", children)

    def _target_list(self) -> AstNode:
        # target expressions before "in": parse without comparison "in"
        first = self._star_target()
        if not self.at_op(","):
            return first
        children = [first]
        while self.at_op(","):
            children.append(_leaf(self.advance()))
            if self.at_kw("in"):
                break
            children.append(self._star_target())
        return _node("expression_list", children)

    def _star_target(self) -> AstNode:
        if self.at_op("*"):
            star = _leaf(self.advance())
            return _node("list_splat", [star, self._postfix_target()])
        return self._postfix_target()

    def _postfix_target(self) -> AstNode:
        return self.parse_bitor()

    def _try_statement(self) -> AstNode:
        children = [self.expect_kw("try")]
        self._attach_block(children)
        while self.at_kw("except"):
            sub = [_leaf(self.advance())]
            if not self.at_op(":"):
                sub.append(self.parse_expression())
                if self.at_kw("as"):
                    sub.append(_leaf(self.advance()))
                    sub.append(self.expect_name())
            self._attach_block(sub)
            children.append(_node("except_clause", sub))
        if self.at_kw("else"):
            sub = [_leaf(self.advance())]
            self._attach_block(sub)
            children.append(_node("else_clause", sub))
        if self.at_kw("finally"):
            sub = [_leaf(self.advance())]
            self._attach_block(sub)
            children.append(_node("finally_clause", sub))
        if len(children) == 3:  # bare try with no handler
            raise ParseError("try without except/finally")
        return _node("try_statement", children)

    def _with_statement(self, async_kw: AstNode | None = None) -> AstNode:
        children = [self.expect_kw("with")]
        if async_kw is not None:
            children.insert(0, async_kw)
        items = [self._with_item()]
        while self.at_op(","):
            items.append(_leaf(self.advance()))
            items.append(self._with_item())
        children.append(_node("with_clause", items))
        self._attach_block(children)
        return _node("with_statement", children)

    def _with_item(self) -> AstNode:
        expr = self.parse_expression()
        if self.at_kw("as"):
            as_kw = _leaf(self.advance())
            return _node("with_item", [expr, as_kw, self._postfix_target()])
        return _node("with_item", [expr])

    def _async_statement(self) -> AstNode:
        async_kw = self.expect_kw("async")
        if self.at_kw("def"):
            return self._function_definition([async_kw])
        if self.at_kw("for"):
            return self._for_statement(async_kw)
        if self.at_kw("with"):
            return self._with_statement(async_kw)
        raise ParseError("async without def/for/with")

    def _decorated_definition(self) -> AstNode:
        decorators = []
        while self.at_op("@"):
            at = _leaf(self.advance())
            expr = self.parse_expression()
            decorators.append(_node("decorator", [at, expr]))
            self.eat_newline()
        if self.at_kw("def") or self.at_kw("async"):
            definition = self._async_statement() if self.at_kw("async") else self._function_definition([])
        elif self.at_kw("class"):
            definition = self._class_definition([])
        else:
            raise ParseError("decorator without definition")
        return _node("decorated_definition", [*decorators, definition])

    def _function_definition(self, prefix: list[AstNode]) -> AstNode:
        children = [*prefix, self.expect_kw("def"), self.expect_name(), self._parameters()]
        if self.at_op("->"):
            children.append(_leaf(self.advance()))
            children.append(_node("type", [self.parse_expression()]))
        self._attach_block(children)
        return _node("function_definition", children)

    def _parameters(self) -> AstNode:
        children = [self.expect_op("(")]
        while not self.at_op(")"):
            children.append(self._parameter())
            if self.at_op(","):
                children.append(_leaf(self.advance()))
            elif not self.at_op(")"):
                raise ParseError("malformed parameter list")
        children.append(self.expect_op(")"))
        return _node("parameters", children)

    def _parameter(self) -> AstNode:
        if self.at_op("*") and self.peek(1).type == pylex.OP and self.peek(1).text in (",", ")"):
            return _leaf(self.advance())  # bare keyword separator
        if self.at_op("/"):
            return _leaf(self.advance())  # positional separator
        if self.at_op("*"):
            star = _leaf(self.advance())
            return _node("list_splat_pattern", [star, self.expect_name()])
        if self.at_op("**"):
            star = _leaf(self.advance())
            return _node("dictionary_splat_pattern", [star, self.expect_name()])
        name = self.expect_name()
        annotated: AstNode | None = None
        if self.at_op(":"):
            colon = _leaf(self.advance())
            annotated = _node("typed_parameter", [name, colon, _node("type", [self.parse_expression()])])
        if self.at_op("="):
            eq = _leaf(self.advance())
            default = self.parse_expression()
            if annotated is not None:
                return _node("typed_default_parameter", [*annotated.children, eq, default])
            return _node("default_parameter", [name, eq, default])
        return annotated or name

    def _class_definition(self, prefix: list[AstNode]) -> AstNode:
        children = [*prefix, self.expect_kw("class"), self.expect_name()]
        if self.at_op("("):
            children.append(self._argument_list())
        self._attach_block(children)
        return _node("class_definition", children)

    # -- expressions --------------------------------------------------------

    def parse_expression(self) -> AstNode:
        if self.at_kw("lambda"):
            return self._lambda()
        expr = self.parse_or()
        if self.at_kw("if"):
            if_kw = _leaf(self.advance())
            cond = self.parse_or()
            else_kw = self.expect_kw("else")
            alt = self.parse_expression()
            return _node("conditional_expression", [expr, if_kw, cond, else_kw, alt])
        if self.at_op(":="):
            op = _leaf(self.advance())
            return _node("named_expression", [expr, op, self.parse_expression()])
        return expr

    def _lambda(self) -> AstNode:
        kw = self.expect_kw("lambda")
        children = [kw]
        if not self.at_op(":"):
            params = [self._parameter()]
            while self.at_op(","):
                params.append(_leaf(self.advance()))
                params.append(self._parameter())
            children.append(_node("lambda_parameters", params))
        children.append(self.expect_op(":"))
        children.append(self.parse_expression())
        return _node("lambda", children)

    def parse_or(self) -> AstNode:
        left = self.parse_and()
        while self.at_kw("or"):
            op = _leaf(self.advance())
            left = _node("boolean_operator", [left, op, self.parse_and()])
        return left

    def parse_and(self) -> AstNode:
        left = self.parse_not()
        while self.at_kw("and"):
            op = _leaf(self.advance())
            left = _node("boolean_operator", [left, op, self.parse_not()])
        return left

    def parse_not(self) -> AstNode:
        if self.at_kw("not"):
            kw = _leaf(self.advance())
            return _node("not_operator", [kw, self.parse_not()])
        return self.parse_comparison()

    def _comparison_op(self) -> list[AstNode] | None:
        tok = self.peek()
        if tok.type == pylex.OP and tok.text in _COMPARE_OPS:
            return [_leaf(self.advance())]
        if self.at_kw("in"):
            return [_leaf(self.advance())]
        if self.at_kw("is"):
            first = _leaf(self.advance())
            if self.at_kw("not"):
                return [first, _leaf(self.advance())]
            return [first]
        if self.at_kw("not") and self.peek(1).type == pylex.NAME and self.peek(1).text == "in":
            return [_leaf(self.advance()), _leaf(self.advance())]
        return None

    def parse_comparison(self) -> AstNode:
        left = self.parse_bitor()
        ops = self._comparison_op()
        if ops is None:
            return left
        children = [left]
        while ops is not None:
            children.extend(ops)
            children.append(self.parse_bitor())
            ops = self._comparison_op()
        return _node("comparison_operator", children)

    def _binary_chain(self, sub, ops: tuple[str, ...]) -> AstNode:
        left = sub()
        while self.peek().type == pylex.OP and self.peek().text in ops:
            op = _leaf(self.advance())
            left = _node("binary_operator", [left, op, sub()])
        return left

    def parse_bitor(self) -> AstNode:
        return self._binary_chain(self.parse_bitxor, ("|",))

    def parse_bitxor(self) -> AstNode:
        return self._binary_chain(self.parse_bitand, ("^",))

    def parse_bitand(self) -> AstNode:
        return self._binary_chain(self.parse_shift, ("&",))

    def parse_shift(self) -> AstNode:
        return self._binary_chain(self.parse_arith, ("<<", ">>"))

    def parse_arith(self) -> AstNode:
        return self._binary_chain(self.parse_term, ("+", "-"))

    def parse_term(self) -> AstNode:
        return self._binary_chain(self.parse_factor, ("*", "/", "//", "%", "@"))

    def parse_factor(self) -> AstNode:
        tok = self.peek()
        if tok.type == pylex.OP and tok.text in ("+", "-", "~"):
            op = _leaf(self.advance())
            return _node("unary_operator", [op, self.parse_factor()])
        return self.parse_power()

    def parse_power(self) -> AstNode:
        base = self.parse_postfix()
        if self.at_op("**"):
            op = _leaf(self.advance())
            return _node("binary_operator", [base, op, self.parse_factor()])
        return base

    def parse_postfix(self) -> AstNode:
        if self.at_kw("await"):
            kw = _leaf(self.advance())
            return _node("await", [kw, self.parse_postfix()])
        expr = self.parse_atom()
        while True:
            if self.at_op("("):
                expr = _node("call", [expr, self._argument_list()])
            elif self.at_op("["):
                expr = self._subscript(expr)
            elif self.at_op(".") and self.peek(1).type == pylex.NAME:
                dot = _leaf(self.advance())
                expr = _node("attribute", [expr, dot, self.expect_name()])
            else:
                return expr

    def _argument_list(self) -> AstNode:
        children = [self.expect_op("(")]
        while not self.at_op(")"):
            children.append(self._argument())
            if self.at_op(","):
                children.append(_leaf(self.advance()))
            elif not self.at_op(")"):
                raise ParseError("malformed argument list")
        children.append(self.expect_op(")"))
        return _node("argument_list", children)

    def _argument(self) -> AstNode:
        if self.at_op("*"):
            star = _leaf(self.advance())
            return _node("list_splat", [star, self.parse_expression()])
        if self.at_op("**"):
            star = _leaf(self.advance())
            return _node("dictionary_splat", [star, self.parse_expression()])
        tok = self.peek()
        if (
            tok.type == pylex.NAME
            and tok.text not in KEYWORDS
            and self.peek(1).type == pylex.OP
            and self.peek(1).text == "="
        ):
            name = self.expect_name()
            eq = _leaf(self.advance())
            return _node("keyword_argument", [name, eq, self.parse_expression()])
        expr = self.parse_expression()
        if self.at_kw("for"):
            clauses = self._comprehension_clauses()
            return _node("generator_expression", [expr, *clauses])
        return expr

    def _subscript(self, value: AstNode) -> AstNode:
        children = [value, self.expect_op("[")]
        while not self.at_op("]"):
            children.append(self._subscript_item())
            if self.at_op(","):
                children.append(_leaf(self.advance()))
            elif not self.at_op("]"):
                raise ParseError("malformed subscript")
        children.append(self.expect_op("]"))
        return _node("subscript", children)

    def _subscript_item(self) -> AstNode:
        parts: list[AstNode] = []
        if not self.at_op(":"):
            parts.append(self.parse_expression())
            if not self.at_op(":"):
                return parts[0]
        while self.at_op(":"):
            parts.append(_leaf(self.advance()))
            if not (self.at_op(":") or self.at_op("]") or self.at_op(",")):
                parts.append(self.parse_expression())
        return _node("slice", parts)

    def _comprehension_clauses(self) -> list[AstNode]:
        clauses: list[AstNode] = []
        while True:
            if self.at_kw("for") or (self.at_kw("async") and self.peek(1).text == "for"):
                sub = []
                if self.at_kw("async"):
                    sub.append(_leaf(self.advance()))
                sub.append(_leaf(self.advance()))  # for
                sub.append(self._target_list())
                sub.append(self.expect_kw("in"))
                sub.append(self.parse_or())
                clauses.append(_node("for_in_clause", sub))
            elif self.at_kw("if"):
                kw = _leaf(self.advance())
                clauses.append(_node("if_clause", [kw, self.parse_or()]))
            else:
                return clauses

    def parse_atom(self) -> AstNode:
        tok = self.peek()
        if tok.type == pylex.NUMBER:
            self.advance()
            return _leaf(tok, _number_kind(tok.text))
        if tok.type == pylex.STRING:
            parts = [_leaf(self.advance(), "string")]
            while self.at(pylex.STRING):
                parts.append(_leaf(self.advance(), "string"))
            if len(parts) > 1:
                return _node("concatenated_string", parts)
            return parts[0]
        if tok.type == pylex.NAME:
            word = tok.text
            if word == "True":
                return _leaf(self.advance(), "true")
            if word == "False":
                return _leaf(self.advance(), "false")
            if word == "None":
                return _leaf(self.advance(), "none")
            if word == "lambda":
                return self._lambda()
            if word == "yield":
                return self._yield_expression()
            if word not in KEYWORDS:
                return self.expect_name()
            raise ParseError(f"unexpected keyword {word!r}")
        if tok.type == pylex.OP:
            if tok.text == "(":
                return self._paren_atom()
            if tok.text == "[":
                return self._list_atom()
            if tok.text == "{":
                return self._brace_atom()
            if tok.text == "...":
                return _leaf(self.advance(), "ellipsis")
        raise ParseError(f"unexpected token {tok.text!r}")

    def _paren_atom(self) -> AstNode:
        lparen = self.expect_op("(")
        if self.at_op(")"):
            return _node("tuple", [lparen, self.expect_op(")")])
        first = self._star_or_expr()
        if self.at_kw("for") or (self.at_kw("async") and self.peek(1).text == "for"):
            clauses = self._comprehension_clauses()
            return _node("generator_expression", [lparen, first, *clauses, self.expect_op(")")])
        if self.at_op(","):
            children = [lparen, first]
            while self.at_op(","):
                children.append(_leaf(self.advance()))
                if self.at_op(")"):
                    break
                children.append(self._star_or_expr())
            children.append(self.expect_op(")"))
            return _node("tuple", children)
        rparen = self.expect_op(")")
        return _node("parenthesized_expression", [lparen, first, rparen])

    def _list_atom(self) -> AstNode:
        lbrack = self.expect_op("[")
        if self.at_op("]"):
            return _node("list", [lbrack, self.expect_op("]")])
        first = self._star_or_expr()
        if self.at_kw("for") or (self.at_kw("async") and self.peek(1).text == "for"):
            clauses = self._comprehension_clauses()
            return _node("list_comprehension", [lbrack, first, *clauses, self.expect_op("]")])
        children = [lbrack, first]
        while self.at_op(","):
            children.append(_leaf(self.advance()))
            if self.at_op("]"):
                break
            children.append(self._star_or_expr())
        children.append(self.expect_op("]"))
        return _node("list", children)

    def _brace_atom(self) -> AstNode:
        lbrace = self.expect_op("{")
        if self.at_op("}"):
            return _node("dictionary", [lbrace, self.expect_op("}")])
        if self.at_op("**"):
            star = _leaf(self.advance())
            first: AstNode = _node("dictionary_splat", [star, self.parse_expression()])
            is_dict = True
        else:
            key = self.parse_expression()
            if self.at_op(":"):
                colon = _leaf(self.advance())
                first = _node("pair", [key, colon, self.parse_expression()])
                is_dict = True
            else:
                first = key
                is_dict = False
        if self.at_kw("for") or (self.at_kw("async") and self.peek(1).text == "for"):
            clauses = self._comprehension_clauses()
            kind = "dictionary_comprehension" if is_dict else "set_comprehension"
            return _node(kind, [lbrace, first, *clauses, self.expect_op("}")])
        children = [lbrace, first]
        while self.at_op(","):
            children.append(_leaf(self.advance()))
            if self.at_op("}"):
                break
            if is_dict:
                if self.at_op("**"):
                    star = _leaf(self.advance())
                    children.append(_node("dictionary_splat", [star, self.parse_expression()]))
                else:
                    key = self.parse_expression()
                    colon = self.expect_op(":")
                    children.append(_node("pair", [key, colon, self.parse_expression()]))
            else:
                children.append(self._star_or_expr())
        children.append(self.expect_op("}"))
        return _node("dictionary" if is_dict else "set", children)


def _extend_flat(acc: list[AstNode], stmt: AstNode) -> None:
    """Semicolon-joined lines contribute each statement individually."""
    if stmt.kind == "statement_group":
        acc.extend(stmt.children)
    else:
        acc.append(stmt)


def _number_kind(text: str) -> str:
    low = text.lower()
    if low.startswith(("0x", "0o", "0b")):
        return "integer"
    if "." in low or "j" in low or "e" in low:
        return "float"
    return "integer"


def _leaf_kind(tok: Token) -> str:
    if tok.type == pylex.NAME:
        return tok.text if tok.text in KEYWORDS else "identifier"
    if tok.type == pylex.NUMBER:
        return _number_kind(tok.text)
    if tok.type == pylex.STRING:
        return "string"
    if tok.type == pylex.ERRORTOKEN:
        return "ERROR"
    return tok.text


def parse_python(text: str) -> AstNode:
    """Parse text into a concrete tree; ERROR nodes mark bad regions."""
    tokens = pylex.tokenize(text)
    parser = PyParser(tokens)
    root = parser.parse_module()
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
