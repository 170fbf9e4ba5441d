"""Mutable parse-tree builder plus pre-order interchange serialization.

Internal nodes carry grammar production names; terminals carry the
"ter_" prefix followed by the exact lexeme. Serialization assigns ids
by depth-first pre-order with children left to right.
"""

from __future__ import annotations

LEAF_PREFIX = "ter_"


class Node:
    __slots__ = ("label", "children", "terminal")

    def __init__(self, label, terminal=False):
        self.label = label
        self.children = []
        self.terminal = terminal

    def add(self, child):
        self.children.append(child)
        return child

    def leaf(self, lexeme):
        return self.add(Node(LEAF_PREFIX + str(lexeme), terminal=True))


def prune_empty(node: Node) -> bool:
    """Drop non-terminal descendants that ended up with no children.

    Returns False when the node itself should be dropped.
    """
    if node.terminal:
        return True
    node.children = [c for c in node.children if prune_empty(c)]
    return bool(node.children)


def to_record(root: Node) -> dict:
    """Serialize to the interchange schema with pre-order ids."""
    if not prune_empty(root):
        raise ValueError("tree reduced to nothing")
    nodes = []

    def walk(node):
        idx = len(nodes)
        entry = {"id": idx, "label": node.label, "children": []}
        nodes.append(entry)
        for child in node.children:
            entry["children"].append(walk(child))
        return idx

    walk(root)
    return {"nodes": nodes}


def leaf_lexemes(root: Node):
    """Terminal lexemes in pre-order (for parser/lexer consistency checks)."""
    out = []

    def walk(node):
        if node.terminal:
            out.append(node.label[len(LEAF_PREFIX):])
        for child in node.children:
            walk(child)

    walk(root)
    return out
