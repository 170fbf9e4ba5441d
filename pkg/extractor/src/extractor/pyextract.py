"""Python function extraction via the standard library parser.

Top-level (and nested/method-level) functions with a docstring become
records: the docstring's first line is the summary, and the function
source, with the docstring statement removed, becomes the code text
and the AST. Abstract-syntax terminals (names, constants, operators,
keywords without operands) are emitted as "ter_" leaves.
"""

from __future__ import annotations

import ast

from .tree import Node

# operator/keyword node classes with no fields: rendered as lexeme leaves
_FIXED_LEXEMES = {
    ast.Add: "+", ast.Sub: "-", ast.Mult: "*", ast.Div: "/", ast.Mod: "%",
    ast.Pow: "**", ast.FloorDiv: "//", ast.MatMult: "@",
    ast.LShift: "<<", ast.RShift: ">>", ast.BitOr: "|", ast.BitAnd: "&",
    ast.BitXor: "^", ast.And: "and", ast.Or: "or", ast.Not: "not",
    ast.Invert: "~", ast.UAdd: "+", ast.USub: "-",
    ast.Eq: "==", ast.NotEq: "!=", ast.Lt: "<", ast.LtE: "<=",
    ast.Gt: ">", ast.GtE: ">=", ast.Is: "is", ast.IsNot: "is not",
    ast.In: "in", ast.NotIn: "not in",
    ast.Pass: "pass", ast.Break: "break", ast.Continue: "continue",
}

_SKIP_TYPES = (ast.expr_context,)


def _convert(node: ast.AST, parent: Node) -> None:
    if isinstance(node, _SKIP_TYPES):
        return
    for cls, lexeme in _FIXED_LEXEMES.items():
        if isinstance(node, cls):
            parent.leaf(lexeme)
            return
    own = parent.add(Node(type(node).__name__))
    if isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef)):
        # decorators are dropped: the emitted code text starts at `def`
        own.leaf(node.name)
        _convert(node.args, own)
        for stmt in node.body:
            _convert(stmt, own)
        if node.returns is not None:
            _convert(node.returns, own)
        return
    if isinstance(node, ast.arg):
        own.leaf(node.arg)
    elif isinstance(node, ast.Name):
        own.leaf(node.id)
    elif isinstance(node, ast.Constant):
        own.leaf(repr(node.value))
    elif isinstance(node, ast.keyword) and node.arg:
        own.leaf(node.arg)
    elif isinstance(node, (ast.Global, ast.Nonlocal)):
        for name in node.names:
            own.leaf(name)
    elif isinstance(node, ast.alias):
        own.leaf(node.name)
    elif isinstance(node, ast.ExceptHandler) and node.name:
        own.leaf(node.name)
    elif isinstance(node, ast.ImportFrom) and node.module:
        own.leaf(node.module)
    for child in ast.iter_child_nodes(node):
        _convert(child, own)
    if isinstance(node, ast.Attribute):
        own.leaf(node.attr)


def function_to_tree(func: ast.AST) -> Node:
    holder = Node("holder")
    _convert(func, holder)
    return holder.children[0]


def _code_without_docstring(func, source_lines):
    """Source text of the function minus its docstring lines."""
    start = func.lineno - 1
    end = func.end_lineno
    doc = func.body[0]
    doc_start = doc.lineno - 1
    doc_end = doc.end_lineno
    lines = source_lines[start:doc_start] + source_lines[doc_end:end]
    return "\n".join(lines)


def summary_of(docstring: str) -> str:
    for line in docstring.strip().splitlines():
        line = line.strip()
        if line:
            return line
    return ""


def _has_docstring(func) -> bool:
    return (
        bool(func.body)
        and isinstance(func.body[0], ast.Expr)
        and isinstance(func.body[0].value, ast.Constant)
        and isinstance(func.body[0].value.value, str)
    )


def extract_python(source: str, origin: str):
    """Yield (name, code, docstring_summary, tree) for every function.

    The docstring summary is empty when the function has none; a
    docstring-only function yields tree None (nothing to summarize).
    Raises SyntaxError for unparseable sources.
    """
    module = ast.parse(source)
    lines = source.split("\n")
    found = [
        node
        for node in ast.walk(module)
        if isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef))
    ]
    found.sort(key=lambda n: n.lineno)
    for func in found:
        name = "%s:%s" % (origin, func.name)
        if _has_docstring(func):
            if len(func.body) < 2:
                yield (name, "", summary_of(ast.get_docstring(func) or ""), None)
                continue
            summary = summary_of(ast.get_docstring(func) or "")
            code = _code_without_docstring(func, lines)
            func.body = func.body[1:]
        else:
            summary = ""
            code = "\n".join(lines[func.lineno - 1 : func.end_lineno])
        yield (name, code, summary, function_to_tree(func))
