"""AST interchange model: validation, leaf marking, and graph inputs.

An Ast is a list of nodes numbered 0..n-1 in pre-order (depth-first,
children left to right) rooted at id 0. Leaves carry a "ter_" label
prefix. From a validated tree we derive the symmetric-normalized
propagation matrix used by the graph convolution and the frozen initial
node embeddings.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

LEAF_PREFIX = "ter_"


class AstError(Exception):
    """Base class for AST validation failures."""


class CycleError(AstError):
    """Child links contain a cycle or a node with two parents."""


class MultipleRoots(AstError):
    """More than one node has no parent, or the root is not id 0."""


class LeafPrefixViolation(AstError):
    """Leaf without the 'ter_' prefix, or an internal node carrying it."""


class BadIdOrder(AstError):
    """Ids are not 0..n-1 in pre-order, or a child reference is invalid."""


@dataclass(frozen=True)
class AstNode:
    id: int
    label: str
    children: tuple
    is_leaf: bool


@dataclass(frozen=True)
class Ast:
    nodes: tuple

    def __len__(self):
        return len(self.nodes)

    def labels(self):
        return [n.label for n in self.nodes]


def ast_from_record(record: dict) -> Ast:
    """Build an (unvalidated) Ast from the interchange JSON record.

    Schema: {"nodes": [{"id": int, "label": str, "children": [int...]}...]}.
    Leafness is taken from the children list; the label prefix is checked
    later by validate_ast.
    """
    try:
        raw_nodes = record["nodes"]
    except (KeyError, TypeError):
        raise BadIdOrder("AST record must be an object with a 'nodes' list")
    nodes = []
    for entry in raw_nodes:
        try:
            node = AstNode(
                id=int(entry["id"]),
                label=str(entry["label"]),
                children=tuple(int(c) for c in entry.get("children", [])),
                is_leaf=not entry.get("children"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise BadIdOrder("malformed AST node entry: %r" % (entry,)) from exc
        nodes.append(node)
    return Ast(nodes=tuple(nodes))


def ast_to_record(ast: Ast) -> dict:
    return {
        "nodes": [
            {"id": n.id, "label": n.label, "children": list(n.children)}
            for n in ast.nodes
        ]
    }


def validate_ast(ast: Ast) -> Ast:
    """Check every structural invariant and return the tree unchanged.

    Raises BadIdOrder, MultipleRoots, CycleError, or LeafPrefixViolation.
    """
    n = len(ast.nodes)
    if n == 0:
        raise BadIdOrder("AST has no nodes")
    for idx, node in enumerate(ast.nodes):
        if node.id != idx:
            raise BadIdOrder("node at position %d has id %d" % (idx, node.id))
        for c in node.children:
            if not 0 <= c < n:
                raise BadIdOrder("node %d references missing child %d" % (node.id, c))

    parent = {}
    for node in ast.nodes:
        for c in node.children:
            if c in parent:
                raise CycleError("node %d has parents %d and %d" % (c, parent[c], node.id))
            parent[c] = node.id
    roots = [node.id for node in ast.nodes if node.id not in parent]
    if roots != [0]:
        raise MultipleRoots("expected single root 0, found %r" % (roots,))

    # Iterative pre-order walk; ids must come out 0,1,2,... and visiting a
    # node twice (or never) means the links do not form a tree.
    seen = 0
    stack = [0]
    visited = [False] * n
    while stack:
        cur = stack.pop()
        if visited[cur]:
            raise CycleError("node %d reachable twice" % cur)
        visited[cur] = True
        if cur != seen:
            raise BadIdOrder("pre-order position %d holds id %d" % (seen, cur))
        seen += 1
        stack.extend(reversed(ast.nodes[cur].children))
    if seen != n:
        raise CycleError("%d of %d nodes unreachable from the root" % (n - seen, n))

    for node in ast.nodes:
        has_prefix = node.label.startswith(LEAF_PREFIX)
        if node.is_leaf != (not node.children):
            raise LeafPrefixViolation("node %d leaf flag disagrees with children" % node.id)
        if node.is_leaf and not has_prefix:
            raise LeafPrefixViolation("leaf %d lacks the %r prefix" % (node.id, LEAF_PREFIX))
        if not node.is_leaf and has_prefix:
            raise LeafPrefixViolation("internal node %d carries the %r prefix" % (node.id, LEAF_PREFIX))
    return ast


def truncate_ast(ast: Ast, max_nodes: int) -> Ast:
    """Drop the highest-id nodes (and their edges) beyond `max_nodes`.

    Pre-order ids grow root-first, so the kept prefix is still a tree
    rooted at 0. Nodes keep their original is_leaf flag: an internal node
    whose children were all dropped does not become a matchable leaf.
    """
    if len(ast.nodes) <= max_nodes:
        return ast
    nodes = []
    for node in ast.nodes[:max_nodes]:
        nodes.append(
            AstNode(
                id=node.id,
                label=node.label,
                children=tuple(c for c in node.children if c < max_nodes),
                is_leaf=node.is_leaf,
            )
        )
    return Ast(nodes=tuple(nodes))


def build_propagation(ast: Ast) -> np.ndarray:
    """Symmetric-normalized propagation matrix of the undirected tree.

    With A the parent<->child adjacency, A_hat = A + I and
    D_hat = diag(rowsum(A_hat)), returns D_hat^(-1/2) A_hat D_hat^(-1/2)
    as a dense (n, n) float64 array.
    """
    n = len(ast.nodes)
    a_hat = np.eye(n, dtype=np.float64)
    for node in ast.nodes:
        for c in node.children:
            a_hat[node.id, c] = 1.0
            a_hat[c, node.id] = 1.0
    d_inv_sqrt = 1.0 / np.sqrt(a_hat.sum(axis=1))
    return a_hat * d_inv_sqrt[:, None] * d_inv_sqrt[None, :]


def _label_seed(label: str, seed: int) -> int:
    digest = hashlib.blake2b(
        label.encode("utf-8"), digest_size=8, salt=str(seed).encode("utf-8")[:16]
    ).digest()
    return int.from_bytes(digest, "little")


def init_node_embeddings(ast: Ast, dim: int, seed: int) -> np.ndarray:
    """Frozen per-node feature rows, a pure function of (label, dim, seed).

    Each row is a standard normal draw scaled by 1/sqrt(dim) so the
    expected row norm is close to 1. Equal labels always get equal rows;
    these vectors never receive gradient updates.
    """
    out = np.empty((len(ast.nodes), dim), dtype=np.float64)
    cache = {}
    for node in ast.nodes:
        row = cache.get(node.label)
        if row is None:
            rng = np.random.Generator(np.random.PCG64(_label_seed(node.label, seed)))
            row = rng.standard_normal(dim) / np.sqrt(dim)
            cache[node.label] = row
        out[node.id] = row
    return out


def leaf_ids(ast: Ast) -> list:
    """Ids of all leaves in ascending (pre-order) id order."""
    return [node.id for node in ast.nodes if node.is_leaf]


def leaf_value(node: AstNode) -> str:
    """The lexeme a leaf stands for: its label minus the marker prefix."""
    return node.label[len(LEAF_PREFIX):] if node.label.startswith(LEAF_PREFIX) else node.label
