import numpy as np
import pytest

from codesum.asts import (
    Ast,
    AstNode,
    BadIdOrder,
    CycleError,
    LeafPrefixViolation,
    MultipleRoots,
    ast_from_record,
    ast_to_record,
    build_propagation,
    init_node_embeddings,
    leaf_ids,
    truncate_ast,
    validate_ast,
)

from oracles import make_preorder_tree


def _ast(*entries):
    return ast_from_record({"nodes": [
        {"id": i, "label": label, "children": children}
        for i, (label, children) in enumerate(entries)
    ]})


def test_single_leaf_valid():
    ast = validate_ast(_ast(("ter_x", [])))
    assert leaf_ids(ast) == [0]


def test_leaf_with_child_rejected():
    with pytest.raises(LeafPrefixViolation):
        validate_ast(_ast(("ter_x", [1]), ("ter_y", [])))


def test_internal_with_prefix_rejected():
    ast = _ast(("root", [1]), ("ter_y", []))
    bad = Ast(nodes=(AstNode(0, "ter_root", (1,), False), ast.nodes[1]))
    with pytest.raises(LeafPrefixViolation):
        validate_ast(bad)


def test_two_node_tree_valid():
    ast = validate_ast(_ast(("root", [1]), ("ter_y", [])))
    assert len(ast) == 2


def test_bad_preorder_rejected():
    # 0 -> 2, 2 -> 1: pre-order would be 0, 2, 1
    with pytest.raises(BadIdOrder):
        validate_ast(_ast(("root", [2]), ("ter_a", []), ("mid", [1])))


def test_missing_child_rejected():
    with pytest.raises(BadIdOrder):
        validate_ast(_ast(("root", [5]), ("ter_a", [])))


def test_two_parents_rejected():
    with pytest.raises(CycleError):
        validate_ast(_ast(("root", [1, 2]), ("mid", [2]), ("ter_a", [])))


def test_multiple_roots_rejected():
    with pytest.raises(MultipleRoots):
        validate_ast(_ast(("root", [1]), ("ter_a", []), ("ter_b", [])))


def test_empty_rejected():
    with pytest.raises(BadIdOrder):
        validate_ast(Ast(nodes=()))


def test_record_roundtrip(tiny_ast):
    assert ast_from_record(ast_to_record(tiny_ast)) == tiny_ast


def test_propagation_single_node():
    ast = validate_ast(_ast(("ter_x", [])))
    assert np.array_equal(build_propagation(ast), np.array([[1.0]]))


def test_propagation_two_nodes():
    # hand evaluation: A_hat all ones, D_hat = diag(2, 2)
    ast = validate_ast(_ast(("root", [1]), ("ter_y", [])))
    assert np.allclose(build_propagation(ast), np.full((2, 2), 0.5), atol=1e-15)


def _dense_oracle(ast):
    n = len(ast.nodes)
    a = np.zeros((n, n))
    for node in ast.nodes:
        for c in node.children:
            a[node.id, c] = a[c, node.id] = 1.0
    a_hat = a + np.eye(n)
    d = np.diag(1.0 / np.sqrt(a_hat.sum(axis=1)))
    return d @ a_hat @ d


def test_propagation_path_of_three():
    ast = validate_ast(_ast(("root", [1]), ("mid", [2]), ("ter_a", [])))
    s = build_propagation(ast)
    assert np.allclose(s, _dense_oracle(ast), atol=1e-12)
    assert np.isclose(s[0, 0], 0.5)
    assert np.isclose(s[0, 1], 1.0 / np.sqrt(6.0))
    assert np.isclose(s[1, 1], 1.0 / 3.0)


def test_propagation_properties_random_trees():
    rng = np.random.default_rng(42)
    for _ in range(25):
        n = int(rng.integers(1, 30))
        ast = validate_ast(ast_from_record(make_preorder_tree(rng, n)))
        s = build_propagation(ast)
        assert np.abs(s - s.T).max() < 1e-12
        assert (s >= 0).all()
        assert (np.diag(s) > 0).all()
        assert np.allclose(s, _dense_oracle(ast), atol=1e-12)


def test_embeddings_equal_labels_equal_rows():
    ast = validate_ast(_ast(("root", [1, 2]), ("ter_x", []), ("ter_x", [])))
    emb = init_node_embeddings(ast, 16, seed=3)
    assert np.array_equal(emb[1], emb[2])
    assert not np.array_equal(emb[0], emb[1])


def test_embeddings_deterministic():
    ast = validate_ast(_ast(("root", [1]), ("ter_x", [])))
    a = init_node_embeddings(ast, 32, seed=5)
    b = init_node_embeddings(ast, 32, seed=5)
    assert np.array_equal(a, b)
    c = init_node_embeddings(ast, 32, seed=6)
    assert not np.array_equal(a, c)


def test_embeddings_unit_norm_scaling():
    labels = ["ter_w%d" % i for i in range(1000)]
    nodes = [{"id": 0, "label": "root", "children": list(range(1, 1001))}]
    nodes += [{"id": i + 1, "label": lab, "children": []} for i, lab in enumerate(labels)]
    ast = validate_ast(ast_from_record({"nodes": nodes}))
    emb = init_node_embeddings(ast, 64, seed=0)
    norms = np.linalg.norm(emb[1:], axis=1)
    assert abs(norms.mean() - 1.0) < 0.1


def test_leaf_ids_order():
    ast = validate_ast(
        _ast(("root", [1, 4]), ("mid", [2, 3]), ("ter_a", []), ("ter_b", []), ("ter_c", []))
    )
    assert leaf_ids(ast) == [2, 3, 4]


def test_truncate_keeps_prefix_tree():
    ast = validate_ast(
        _ast(("root", [1, 4]), ("mid", [2, 3]), ("ter_a", []), ("ter_b", []), ("ter_c", []))
    )
    cut = truncate_ast(ast, 3)
    assert len(cut.nodes) == 3
    assert cut.nodes[0].children == (1,)
    assert cut.nodes[1].children == (2,)
    # surviving leaves keep their original leaf flag
    assert leaf_ids(cut) == [2]
    prop = build_propagation(cut)
    assert prop.shape == (3, 3)


def test_truncate_noop_when_small(tiny_ast):
    assert truncate_ast(tiny_ast, 10) is tiny_ast
