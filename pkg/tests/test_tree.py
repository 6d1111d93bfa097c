import numpy as np
import pytest

from semtree.core import (
    DecisionParams,
    DecisionTree,
    LeafPayloads,
    TreeStructure,
    build_balanced,
    build_class_subtree,
    graft_classifier,
    leaf_decisions,
    predict,
    predict_batch,
    satisfied_leaves,
    traverse,
    traverse_batch,
)
from semtree.exceptions import InvalidArgument, InvalidState
from semtree.types import DecisionSign, SignedDecision


def unbalanced_tree() -> TreeStructure:
    # 4 internal nodes, 5 leaves; T3 hangs left of T1, T4/T5 under T3
    return TreeStructure.from_children(
        {0: (1, 2), 1: (3, 6), 2: (7, 8), 3: (4, 5)},
        {4: None, 5: None, 6: None, 7: None, 8: None},
    )


def height_one(weight: float = 1.0, bias: float = 0.0):
    return build_balanced(1), DecisionParams(np.array([[weight]]), np.array([bias]))


class TestBuildBalanced:
    def test_smallest_tree(self):
        tree = build_balanced(1)
        assert tree.num_internal == 1
        assert tree.num_leaves == 2
        assert tree.height == 1

    def test_height_four(self):
        tree = build_balanced(4)
        assert tree.num_internal == 15
        assert tree.num_leaves == 16
        assert tree.leaf_ids == tuple(range(15, 31))

    def test_every_leaf_at_full_depth(self):
        tree = build_balanced(3)
        assert {tree.depth(leaf) for leaf in tree.leaf_ids} == {3}

    def test_invalid_height(self):
        with pytest.raises(InvalidArgument, match="height must be >= 1"):
            build_balanced(0)


class TestClassSubtree:
    def test_two_classes(self):
        tree = build_class_subtree(2)
        assert tree.num_internal == 1
        assert tree.payloads() == (0, 1)

    def test_three_classes(self):
        tree = build_class_subtree(3)
        root = tree.internal_nodes[0]
        assert tree.is_leaf(root.right)
        assert not tree.is_leaf(root.left)
        left = tree.internal_nodes[root.left]
        assert tree.is_leaf(left.left) and tree.is_leaf(left.right)
        assert tree.payloads() == (0, 1, 2)

    def test_four_classes_complete(self):
        tree = build_class_subtree(4)
        assert tree.height == 2
        assert tree.payloads() == (0, 1, 2, 3)

    def test_single_class_rejected(self):
        with pytest.raises(InvalidArgument):
            build_class_subtree(1)


class TestGraftClassifier:
    def test_height_matches_class_depth(self):
        assert graft_classifier(2, 3) == build_class_subtree(3)

    def test_binary_copies(self):
        tree = graft_classifier(3, 2)
        assert tree.num_leaves == 8
        assert tree.payloads() == (0, 1) * 4

    def test_four_classes_height_four(self):
        tree = graft_classifier(4, 4)
        payloads = tree.payloads()
        assert len(payloads) == 16
        assert all(payloads.count(c) == 4 for c in range(4))

    def test_every_class_reachable(self):
        tree = graft_classifier(3, 5)
        assert set(tree.payloads()) == set(range(5))

    def test_too_shallow(self):
        with pytest.raises(InvalidArgument, match="cannot hold"):
            graft_classifier(1, 3)


class TestStructureValidation:
    def test_leaf_count_must_match(self):
        with pytest.raises(InvalidArgument, match="needs 2 leaves"):
            TreeStructure.from_children({0: (1, 2)}, {1: None})

    def test_shared_child_rejected(self):
        with pytest.raises(InvalidArgument):
            TreeStructure.from_children({0: (1, 2), 1: (3, 3)}, {2: None, 3: None, 4: None})

    def test_dict_round_trip(self):
        tree = graft_classifier(3, 3)
        assert TreeStructure.from_dict(tree.to_dict()) == tree

    def test_with_payloads(self):
        tree = build_balanced(1).with_payloads([4, 7])
        assert tree.payloads() == (4, 7)
        with pytest.raises(InvalidArgument, match="Expected 2 payloads"):
            tree.with_payloads([1])

    def test_malformed_dict(self):
        with pytest.raises(InvalidArgument, match="Malformed"):
            TreeStructure.from_dict({'nodes': [{'id': 0}], 'leaves': []})


class TestLeafDecisions:
    def test_deep_left_leaf(self):
        decisions = leaf_decisions(unbalanced_tree(), 5)
        assert decisions == (
            SignedDecision(0, DecisionSign.LEFT),
            SignedDecision(1, DecisionSign.LEFT),
            SignedDecision(3, DecisionSign.RIGHT),
        )

    def test_rightmost_leaf(self):
        decisions = leaf_decisions(unbalanced_tree(), 8)
        assert decisions == (SignedDecision(0, DecisionSign.RIGHT), SignedDecision(2, DecisionSign.RIGHT))

    def test_height_one_right_leaf(self):
        assert leaf_decisions(build_balanced(1), 2) == (SignedDecision(0, DecisionSign.RIGHT),)

    def test_internal_node_rejected(self):
        with pytest.raises(InvalidArgument, match="not a leaf"):
            leaf_decisions(unbalanced_tree(), 3)

    def test_path_signs(self):
        signs = unbalanced_tree().path_signs()
        assert signs.shape == (5, 4)
        assert list(signs[1]) == [-1, -1, 0, 1]
        assert list(signs[4]) == [1, 0, 1, 0]


class TestTraverse:
    def test_positive_goes_right(self):
        tree, params = height_one()
        assert traverse(tree, params, np.array([2.0])) == 2

    def test_zero_goes_left(self):
        tree, params = height_one()
        assert traverse(tree, params, np.array([0.0])) == 1

    def test_dimension_mismatch(self):
        tree, params = height_one()
        with pytest.raises(InvalidArgument):
            traverse(tree, params, np.array([1.0, 2.0]))

    def test_batch_matches_single(self):
        rng = np.random.default_rng(3)
        tree = build_balanced(3)
        params = DecisionParams(rng.standard_normal((7, 4)), rng.standard_normal(7))
        X = rng.standard_normal((200, 4))
        leaves = traverse_batch(tree, params, X)
        expected = [tree.leaf_index(traverse(tree, params, x)) for x in X]
        assert list(leaves) == expected

    def test_reached_leaf_is_the_unique_satisfied_leaf(self):
        rng = np.random.default_rng(5)
        tree = unbalanced_tree()
        params = DecisionParams(rng.standard_normal((4, 3)), rng.standard_normal(4))
        X = rng.standard_normal((500, 3))
        satisfied = satisfied_leaves(tree, params, X)
        assert np.all(satisfied.sum(axis=1) == 1)
        assert np.array_equal(satisfied.argmax(axis=1), traverse_batch(tree, params, X))


class TestPredict:
    def test_class_payload(self):
        tree, params = height_one()
        payloads = LeafPayloads.for_classes([0, 1])
        assert predict(tree, params, payloads, np.array([2.0])) == 1

    def test_regressor_payload(self):
        tree, params = height_one()
        payloads = LeafPayloads.for_regressors(np.array([[[0.0]], [[-1.0]]]).reshape(1, 2, 1),
                                               np.array([[0.0, 1.0]]))
        assert predict(tree, params, payloads, np.array([2.0]))[0] == pytest.approx(-1.0)

    def test_unset_payload(self):
        with pytest.raises(InvalidState, match="unset"):
            LeafPayloads.for_classes([0, None])

    def test_payload_count_mismatch(self):
        tree, params = height_one()
        with pytest.raises(InvalidState):
            predict_batch(tree, params, LeafPayloads.for_classes([0, 1, 0]), np.zeros((1, 1)))

    def test_decision_tree_predict(self):
        tree, params = height_one(bias=-1.0)
        model = DecisionTree(tree, params, LeafPayloads.for_classes([1, 0]))
        assert list(model.predict(np.array([[0.0], [3.0]]))) == [1, 0]


class TestDestandardize:
    def test_hyperplanes_act_on_raw_features(self):
        rng = np.random.default_rng(0)
        means = np.array([3.0, -1.0])
        stds = np.array([2.0, 0.5])
        params = DecisionParams(rng.standard_normal((3, 2)), rng.standard_normal(3))
        raw = rng.standard_normal((50, 2)) * stds + means
        scaled = (raw - means) / stds
        np.testing.assert_allclose(params.destandardize(means, stds).decision_values(raw),
                                   params.decision_values(scaled), atol=1e-12)

    def test_regressors_map_to_original_targets(self):
        means, stds = np.array([1.0]), np.array([4.0])
        payloads = LeafPayloads.for_regressors(np.array([[[2.0], [0.5]]]), np.array([[1.0, -1.0]]))
        raw = payloads.destandardize(means, stds, np.array([10.0]), np.array([3.0]))
        x = np.array([[5.0]])
        scaled_out = payloads.leaf_outputs(np.array([0]), (x - means) / stds)
        raw_out = raw.leaf_outputs(np.array([0]), x)
        assert raw_out[0, 0] == pytest.approx(scaled_out[0, 0] * 3.0 + 10.0)
