"""A small recursive-descent parser for Java methods.

Covers the method syntax common in utility code: modifiers, generic
reference and primitive types, the usual statements (if/while/do/for,
try/catch/finally, return/throw/break/continue, declarations, blocks)
and precedence-climbing expressions with casts, calls, field access,
indexing, and array creation. Anything outside the subset raises
JavaParseError and the caller skips the record.

Every lexer token consumed ends up as exactly one "ter_" leaf, so the
tree's terminal sequence reproduces the method's token stream.
"""

from __future__ import annotations

import re

from .tree import Node


class JavaParseError(ValueError):
    pass


MODIFIERS = {
    "public", "private", "protected", "static", "final", "abstract",
    "synchronized", "native", "strictfp", "default", "transient", "volatile",
}
PRIMITIVES = {"void", "boolean", "byte", "char", "short", "int", "long", "float", "double"}
LITERAL_WORDS = {"true", "false", "null"}
ASSIGN_OPS = {"=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>=", ">>>="}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<line_comment>//[^\n]*)
  | (?P<block_comment>/\*.*?\*/)
  | (?P<char>'(?:\\.|[^'\\])*')
  | (?P<string>"(?:\\.|[^"\\])*")
  | (?P<number>(?:0[xX][0-9a-fA-F_]+|\d[\d_]*\.?[\d_]*(?:[eE][+-]?\d+)?)[fFdDlL]?)
  | (?P<ident>[A-Za-z_$][A-Za-z0-9_$]*)
  | (?P<punct>>>>=|>>=|<<=|>>>|\.\.\.|>>|<<|\+\+|--|&&|\|\||[+\-*/%&|^!=<>]=|->|::|[{}()\[\];,.<>=+\-*/%&|^!~?:@])
    """,
    re.VERBOSE | re.DOTALL,
)


def lex(text):
    """Tokenize Java source; comments and whitespace vanish."""
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise JavaParseError("unlexable input at offset %d: %r" % (pos, text[pos : pos + 10]))
        pos = m.end()
        kind = m.lastgroup
        if kind in ("ws", "line_comment", "block_comment"):
            continue
        tokens.append((kind, m.group()))
    return tokens


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0

    # -- cursor helpers --------------------------------------------------
    def peek(self, offset=0):
        i = self.pos + offset
        return self.tokens[i] if i < len(self.tokens) else (None, None)

    def at(self, value):
        return self.peek()[1] == value

    def at_kind(self, kind):
        return self.peek()[0] == kind

    def take(self, node):
        """Consume the current token as a leaf of `node`."""
        if self.pos >= len(self.tokens):
            raise JavaParseError("unexpected end of input")
        kind, value = self.tokens[self.pos]
        self.pos += 1
        node.leaf(value)
        return value

    def expect(self, node, value):
        if not self.at(value):
            raise JavaParseError("expected %r, found %r at %d" % (value, self.peek()[1], self.pos))
        return self.take(node)

    def expect_ident(self, node):
        if not self.at_kind("ident"):
            raise JavaParseError("expected identifier, found %r" % (self.peek()[1],))
        return self.take(node)

    def _checkpoint(self):
        return self.pos

    def _rollback(self, mark):
        self.pos = mark

    # -- types ------------------------------------------------------------
    def _looks_like_type(self):
        kind, value = self.peek()
        return value in PRIMITIVES or kind == "ident"

    def parse_type(self, parent):
        node = parent.add(Node("type"))
        kind, value = self.peek()
        if value in PRIMITIVES:
            self.take(node)
        elif kind == "ident":
            self.take(node)
            while self.at(".") and self.peek(1)[0] == "ident":
                self.take(node)
                self.take(node)
            if self.at("<"):
                self._parse_generics(node)
        else:
            raise JavaParseError("expected type, found %r" % (value,))
        while self.at("[") and self.peek(1)[1] == "]":
            self.take(node)
            self.take(node)
        return node

    def _parse_generics(self, node):
        depth = 0
        gen = node.add(Node("type_args"))
        while True:
            kind, value = self.peek()
            if value is None:
                raise JavaParseError("unterminated type arguments")
            if value == "<":
                depth += 1
            elif value in (">", ">>", ">>>"):
                depth -= len(value)
                if depth < 0:
                    raise JavaParseError("unbalanced type arguments")
            elif value in ("{", "}", ";"):
                raise JavaParseError("bad token %r inside type arguments" % value)
            self.take(gen)
            if depth == 0:
                return
            if depth > 8:
                raise JavaParseError("type arguments nested too deep")

    # -- method ------------------------------------------------------------
    def parse_method(self):
        root = Node("method_decl")
        mods = root.add(Node("modifiers"))
        while True:
            if self.peek()[1] in MODIFIERS:
                self.take(mods)
            elif self.at("@") and self.peek(1)[0] == "ident":
                self._parse_annotation(mods)
            else:
                break
        if self.at("<"):
            self._parse_generics(root.add(Node("type_params")))
        self.parse_type(root)  # return type (or void)
        name = Node("method_name")
        root.add(name)
        self.expect_ident(name)
        self._parse_params(root)
        if self.at("throws"):
            clause = root.add(Node("throws_clause"))
            self.take(clause)
            self.parse_type(clause)
            while self.at(","):
                self.take(clause)
                self.parse_type(clause)
        self.parse_block(root)
        if self.pos != len(self.tokens):
            raise JavaParseError("trailing tokens after method body")
        return root

    def _parse_annotation(self, parent):
        node = parent.add(Node("annotation"))
        self.expect(node, "@")
        self.expect_ident(node)
        if self.at("("):
            depth = 0
            while True:
                kind, value = self.peek()
                if value is None:
                    raise JavaParseError("unterminated annotation arguments")
                if value == "(":
                    depth += 1
                elif value == ")":
                    depth -= 1
                self.take(node)
                if depth == 0:
                    return

    def _parse_params(self, parent):
        node = parent.add(Node("param_list"))
        self.expect(node, "(")
        if not self.at(")"):
            while True:
                self._parse_param(node)
                if self.at(","):
                    self.take(node)
                else:
                    break
        self.expect(node, ")")

    def _parse_param(self, parent):
        node = parent.add(Node("param"))
        while self.peek()[1] == "final" or (self.at("@") and self.peek(1)[0] == "ident"):
            if self.at("@"):
                self._parse_annotation(node)
            else:
                self.take(node)
        self.parse_type(node)
        if self.at("..."):
            self.take(node)
        self.expect_ident(node)
        while self.at("[") and self.peek(1)[1] == "]":
            self.take(node)
            self.take(node)

    # -- statements ----------------------------------------------------------
    def parse_block(self, parent):
        node = parent.add(Node("block"))
        self.expect(node, "{")
        while not self.at("}"):
            if self.peek()[1] is None:
                raise JavaParseError("unterminated block")
            self.parse_statement(node)
        self.expect(node, "}")
        return node

    def parse_statement(self, parent):
        value = self.peek()[1]
        if value == "{":
            return self.parse_block(parent)
        if value == ";":
            node = parent.add(Node("empty_stmt"))
            return self.take(node)
        if value == "if":
            return self._parse_if(parent)
        if value == "while":
            node = parent.add(Node("while_stmt"))
            self.take(node)
            self.expect(node, "(")
            self._parse_expression(node)
            self.expect(node, ")")
            return self.parse_statement(node)
        if value == "do":
            node = parent.add(Node("do_stmt"))
            self.take(node)
            self.parse_statement(node)
            self.expect(node, "while")
            self.expect(node, "(")
            self._parse_expression(node)
            self.expect(node, ")")
            return self.expect(node, ";")
        if value == "for":
            return self._parse_for(parent)
        if value == "return":
            node = parent.add(Node("return_stmt"))
            self.take(node)
            if not self.at(";"):
                self._parse_expression(node)
            return self.expect(node, ";")
        if value == "throw":
            node = parent.add(Node("throw_stmt"))
            self.take(node)
            self._parse_expression(node)
            return self.expect(node, ";")
        if value in ("break", "continue"):
            node = parent.add(Node(value + "_stmt"))
            self.take(node)
            if self.at_kind("ident"):
                self.take(node)
            return self.expect(node, ";")
        if value == "try":
            return self._parse_try(parent)
        if value == "assert":
            node = parent.add(Node("assert_stmt"))
            self.take(node)
            self._parse_expression(node)
            if self.at(":"):
                self.take(node)
                self._parse_expression(node)
            return self.expect(node, ";")
        if value == "synchronized":
            node = parent.add(Node("synchronized_stmt"))
            self.take(node)
            self.expect(node, "(")
            self._parse_expression(node)
            self.expect(node, ")")
            return self.parse_block(node)
        decl = self._try_local_declaration(parent)
        if decl is not None:
            return decl
        node = parent.add(Node("expr_stmt"))
        self._parse_expression(node)
        return self.expect(node, ";")

    def _parse_if(self, parent):
        node = parent.add(Node("if_stmt"))
        self.take(node)
        self.expect(node, "(")
        self._parse_expression(node)
        self.expect(node, ")")
        self.parse_statement(node)
        if self.at("else"):
            self.take(node)
            self.parse_statement(node)
        return node

    def _parse_for(self, parent):
        node = parent.add(Node("for_stmt"))
        self.take(node)
        self.expect(node, "(")
        mark = self._checkpoint()
        probe = Node("probe")
        try:  # enhanced for: Type ident : expr
            if self.peek()[1] == "final":
                self.take(probe)
            self.parse_type(probe)
            self.expect_ident(probe)
            self.expect(probe, ":")
            enhanced = True
        except JavaParseError:
            enhanced = False
            self._rollback(mark)
        if enhanced:
            self._rollback(mark)
            header = node.add(Node("foreach_header"))
            if self.peek()[1] == "final":
                self.take(header)
            self.parse_type(header)
            self.expect_ident(header)
            self.expect(header, ":")
            self._parse_expression(header)
        else:
            init = node.add(Node("for_init"))
            if not self.at(";"):
                if self._try_local_declaration(init, consume_semi=False) is None:
                    self._parse_expression_list(init)
            self.expect(node, ";")
            if not self.at(";"):
                self._parse_expression(node.add(Node("for_cond")))
            self.expect(node, ";")
            if not self.at(")"):
                self._parse_expression_list(node.add(Node("for_update")))
        self.expect(node, ")")
        return self.parse_statement(node)

    def _parse_try(self, parent):
        node = parent.add(Node("try_stmt"))
        self.take(node)
        if self.at("("):
            res = node.add(Node("resource_spec"))
            self.take(res)
            while not self.at(")"):
                if self.peek()[1] is None:
                    raise JavaParseError("unterminated try resources")
                if self._try_local_declaration(res, consume_semi=False) is None:
                    self._parse_expression(res)
                if self.at(";"):
                    self.take(res)
            self.take(res)
        self.parse_block(node)
        seen_handler = False
        while self.at("catch"):
            seen_handler = True
            clause = node.add(Node("catch_clause"))
            self.take(clause)
            self.expect(clause, "(")
            if self.peek()[1] == "final":
                self.take(clause)
            self.parse_type(clause)
            while self.at("|"):
                self.take(clause)
                self.parse_type(clause)
            self.expect_ident(clause)
            self.expect(clause, ")")
            self.parse_block(clause)
        if self.at("finally"):
            seen_handler = True
            clause = node.add(Node("finally_clause"))
            self.take(clause)
            self.parse_block(clause)
        if not seen_handler and len(node.children) == 2:
            raise JavaParseError("try without catch, finally, or resources")
        return node

    def _try_local_declaration(self, parent, consume_semi=True):
        mark = self._checkpoint()
        probe = Node("probe")
        try:
            if self.peek()[1] == "final":
                self.take(probe)
            self.parse_type(probe)
            self.expect_ident(probe)
            if self.peek()[1] not in ("=", ";", ",", "["):
                raise JavaParseError("not a declaration")
        except JavaParseError:
            self._rollback(mark)
            return None
        self._rollback(mark)
        node = parent.add(Node("local_var_decl"))
        if self.peek()[1] == "final":
            self.take(node)
        self.parse_type(node)
        while True:
            decl = node.add(Node("var_declarator"))
            self.expect_ident(decl)
            while self.at("[") and self.peek(1)[1] == "]":
                self.take(decl)
                self.take(decl)
            if self.at("="):
                self.take(decl)
                self._parse_initializer(decl)
            if self.at(","):
                self.take(node)
            else:
                break
        if consume_semi:
            self.expect(node, ";")
        return node

    def _parse_initializer(self, parent):
        if self.at("{"):
            node = parent.add(Node("array_init"))
            self.take(node)
            while not self.at("}"):
                if self.peek()[1] is None:
                    raise JavaParseError("unterminated array initializer")
                self._parse_initializer(node)
                if self.at(","):
                    self.take(node)
            self.take(node)
        else:
            self._parse_expression(parent)

    def _parse_expression_list(self, parent):
        self._parse_expression(parent)
        while self.at(","):
            self.take(parent)
            self._parse_expression(parent)

    # -- expressions -----------------------------------------------------------
    def _parse_expression(self, parent):
        return self._parse_assignment(parent)

    def _parse_assignment(self, parent):
        mark = self._checkpoint()
        probe = Node("probe")
        try:
            self._parse_unary(probe)
            is_assign = self.peek()[1] in ASSIGN_OPS
        except JavaParseError:
            is_assign = False
        self._rollback(mark)
        if is_assign:
            node = parent.add(Node("assign_expr"))
            self._parse_unary(node)
            self.take(node)
            self._parse_assignment(node)
            return node
        return self._parse_ternary(parent)

    def _parse_ternary(self, parent):
        mark_children = len(parent.children)
        self._parse_binary(parent, 0)
        if self.at("?"):
            cond = parent.children.pop(mark_children)
            node = parent.add(Node("ternary_expr"))
            node.add(cond)
            self.take(node)
            self._parse_expression(node)
            self.expect(node, ":")
            self._parse_ternary(node)
            return node
        return parent.children[-1]

    _BINARY_LEVELS = [
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

    def _parse_binary(self, parent, level):
        if level == len(self._BINARY_LEVELS):
            return self._parse_unary(parent)
        ops = self._BINARY_LEVELS[level]
        anchor = len(parent.children)
        self._parse_binary(parent, level + 1)
        while self.peek()[1] in ops:
            left = parent.children.pop(anchor)
            node = parent.add(Node("binary_expr"))
            node.add(left)
            op = self.take(node)
            if op == "instanceof":
                self.parse_type(node)
            else:
                self._parse_binary(node, level + 1)
        return parent.children[anchor]

    def _parse_unary(self, parent):
        value = self.peek()[1]
        if value in ("+", "-", "!", "~", "++", "--"):
            node = parent.add(Node("unary_expr"))
            self.take(node)
            self._parse_unary(node)
            return node
        if value == "(" and self._looks_like_cast():
            node = parent.add(Node("cast_expr"))
            self.take(node)
            self.parse_type(node)
            self.expect(node, ")")
            self._parse_unary(node)
            return node
        return self._parse_postfix(parent)

    def _looks_like_cast(self):
        mark = self._checkpoint()
        probe = Node("probe")
        try:
            self.take(probe)  # '('
            type_node = self.parse_type(probe)
            if not self.at(")"):
                return False
            self.take(probe)
            kind, nxt = self.peek()
            if nxt is None:
                return False
            first = type_node.children[0].label[4:]  # strip leaf prefix
            if first in PRIMITIVES:
                return nxt not in (")", ";", ",")
            return kind in ("ident", "number", "string", "char") or nxt in ("(", "!", "~") \
                or nxt in LITERAL_WORDS
        except JavaParseError:
            return False
        finally:
            self._rollback(mark)

    def _parse_postfix(self, parent):
        anchor = len(parent.children)
        self._parse_primary(parent)
        while True:
            value = self.peek()[1]
            if value == "(":
                target = parent.children.pop(anchor)
                node = parent.add(Node("call_expr"))
                node.add(target)
                self.take(node)
                if not self.at(")"):
                    self._parse_expression_list(node.add(Node("arg_list")))
                self.expect(node, ")")
            elif value == "." and self.peek(1)[0] == "ident":
                target = parent.children.pop(anchor)
                node = parent.add(Node("field_access"))
                node.add(target)
                self.take(node)
                self.take(node)
            elif value == "[":
                target = parent.children.pop(anchor)
                node = parent.add(Node("index_expr"))
                node.add(target)
                self.take(node)
                self._parse_expression(node)
                self.expect(node, "]")
            elif value in ("++", "--"):
                target = parent.children.pop(anchor)
                node = parent.add(Node("postfix_expr"))
                node.add(target)
                self.take(node)
            else:
                return parent.children[anchor]

    def _parse_primary(self, parent):
        kind, value = self.peek()
        if value is None:
            raise JavaParseError("unexpected end of expression")
        if kind in ("number", "string", "char") or value in LITERAL_WORDS:
            node = parent.add(Node("literal"))
            return self.take(node)
        if value in ("this", "super"):
            node = parent.add(Node("self_ref"))
            return self.take(node)
        if value == "new":
            return self._parse_new(parent)
        if value == "(":
            node = parent.add(Node("paren_expr"))
            self.take(node)
            self._parse_expression(node)
            return self.expect(node, ")")
        if kind == "ident":
            node = parent.add(Node("name"))
            return self.take(node)
        raise JavaParseError("unexpected token %r in expression" % (value,))

    def _parse_new(self, parent):
        node = parent.add(Node("new_expr"))
        self.take(node)  # 'new'
        self.parse_type(node)
        if self.at("("):
            self.take(node)
            if not self.at(")"):
                self._parse_expression_list(node.add(Node("arg_list")))
            self.expect(node, ")")
            if self.at("{"):
                raise JavaParseError("anonymous classes not supported")
        elif self.at("["):
            while self.at("["):
                self.take(node)
                if not self.at("]"):
                    self._parse_expression(node)
                self.expect(node, "]")
            if self.at("{"):
                self._parse_initializer(node)
        else:
            raise JavaParseError("malformed new expression")
        return node


def parse_method(text: str) -> Node:
    """Parse one Java method declaration into a production tree."""
    tokens = lex(text)
    if not tokens:
        raise JavaParseError("empty method text")
    return _Parser(tokens).parse_method()
