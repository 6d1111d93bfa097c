"""
Oblique decision tree skeletons: construction, class-subtree grafting and hard inference.

Internal nodes are numbered breadth-first from the root (``0..K-1``); leaves are numbered
left to right after them (``K..K+L-1``), so leaf index ``j`` is node id ``K + j``.
"""

from __future__ import annotations
import math
from collections import deque
from dataclasses import dataclass
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from ..exceptions import InvalidArgument, InvalidState
from ..types.aliases import LeafIndex, NodeID
from ..types.descriptors import InternalNode, Leaf, SignedDecision, SignedDecisionSet
from ..types.enums import DecisionSign, TaskType
from .params import DecisionParams, LeafPayloads


class TreeStructure:
    __slots__ = ('_internal', '_leaves', '_root', '_parent', '_depth', '_height', '_path_signs')

    def __init__(self, internal_nodes: Sequence[InternalNode], leaves: Sequence[Leaf], root: NodeID = NodeID(0)):
        self._internal: Tuple[InternalNode, ...] = tuple(internal_nodes)
        self._leaves: Tuple[Leaf, ...] = tuple(leaves)
        self._root = NodeID(root)
        self._parent: Dict[NodeID, Tuple[NodeID, DecisionSign]] = {}
        self._depth: Dict[NodeID, int] = {}
        self._path_signs: Optional[np.ndarray] = None
        self._validate()
        self._height = max(self._depth[leaf.node_id] for leaf in self._leaves)

    def _validate(self) -> None:
        K, L = len(self._internal), len(self._leaves)
        if K < 1:
            raise InvalidArgument("A tree needs at least one internal node")
        if L != K + 1:
            raise InvalidArgument(f"A binary tree with {K} internal nodes needs {K + 1} leaves, got {L}")
        for expected, node in enumerate(self._internal):
            if node.node_id != expected:
                raise InvalidArgument(f"Internal ids must be contiguous from 0; found {node.node_id} at {expected}")
        for offset, leaf in enumerate(self._leaves):
            if leaf.node_id != K + offset:
                raise InvalidArgument(f"Leaf ids must be contiguous from {K}; found {leaf.node_id}")
        if self._root != 0:
            raise InvalidArgument(f"Root must be internal node 0, got {self._root}")

        total = K + L
        for node in self._internal:
            for sign in (DecisionSign.LEFT, DecisionSign.RIGHT):
                child = node.child(sign)
                if not 0 <= child < total:
                    raise InvalidArgument(f"Node {node.node_id} points to unknown child {child}")
                if child == self._root or child in self._parent:
                    raise InvalidArgument(f"Node {child} has more than one parent")
                self._parent[NodeID(child)] = (node.node_id, sign)

        self._depth[self._root] = 0
        queue = deque([self._root])
        while queue:
            node_id = queue.popleft()
            if node_id < K:
                node = self._internal[node_id]
                for child in (node.left, node.right):
                    self._depth[NodeID(child)] = self._depth[node_id] + 1
                    queue.append(NodeID(child))
        if len(self._depth) != total:
            raise InvalidArgument("Tree contains nodes unreachable from the root")

    @classmethod
    def from_children(cls, children: Mapping[int, Tuple[int, int]],
                      leaf_payloads: Mapping[int, Optional[int]]) -> TreeStructure:
        """Build (and validate) a tree of any shape from explicit child links."""
        internal = [InternalNode(NodeID(i), NodeID(l), NodeID(r)) for i, (l, r) in sorted(children.items())]
        leaves = [Leaf(NodeID(i), payload) for i, payload in sorted(leaf_payloads.items())]
        return cls(internal, leaves)

    @property
    def internal_nodes(self) -> Tuple[InternalNode, ...]:
        return self._internal

    @property
    def leaves(self) -> Tuple[Leaf, ...]:
        return self._leaves

    @property
    def root(self) -> NodeID:
        return self._root

    @property
    def height(self) -> int:
        return self._height

    @property
    def num_internal(self) -> int:
        return len(self._internal)

    @property
    def num_leaves(self) -> int:
        return len(self._leaves)

    @property
    def leaf_ids(self) -> Tuple[NodeID, ...]:
        return tuple(leaf.node_id for leaf in self._leaves)

    def is_leaf(self, node_id: int) -> bool:
        return self.num_internal <= node_id < self.num_internal + self.num_leaves

    def leaf_index(self, node_id: int) -> LeafIndex:
        if not self.is_leaf(node_id):
            raise InvalidArgument(f"Node {node_id} is not a leaf")
        return LeafIndex(node_id - self.num_internal)

    def leaf_id(self, index: int) -> NodeID:
        return self._leaves[index].node_id

    def depth(self, node_id: int) -> int:
        if node_id not in self._depth:
            raise InvalidArgument(f"Unknown node {node_id}")
        return self._depth[NodeID(node_id)]

    def parent(self, node_id: int) -> Optional[Tuple[NodeID, DecisionSign]]:
        return self._parent.get(NodeID(node_id))

    def payloads(self) -> Tuple[Optional[int], ...]:
        return tuple(leaf.payload for leaf in self._leaves)

    def with_payloads(self, payloads: Sequence[Optional[int]]) -> TreeStructure:
        if len(payloads) != self.num_leaves:
            raise InvalidArgument(f"Expected {self.num_leaves} payloads, got {len(payloads)}")
        leaves = [leaf.with_payload(p) for leaf, p in zip(self._leaves, payloads)]
        return TreeStructure(self._internal, leaves, self._root)

    def path_signs(self) -> np.ndarray:
        """L x K matrix: +1 where the leaf needs D_i true, -1 where it needs D_i false, else 0."""
        if self._path_signs is None:
            signs = np.zeros((self.num_leaves, self.num_internal), dtype=np.int8)
            for leaf in self._leaves:
                for decision in leaf_decisions(self, leaf.node_id):
                    signs[leaf.node_id - self.num_internal, decision.node_id] = int(decision.sign)
            signs.setflags(write=False)
            self._path_signs = signs
        return self._path_signs

    def to_dict(self) -> Dict[str, Any]:
        return {
            'nodes': [{'id': n.node_id, 'left': n.left, 'right': n.right} for n in self._internal],
            'leaves': [{'id': leaf.node_id, 'payload': leaf.payload} for leaf in self._leaves],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> TreeStructure:
        try:
            children = {int(n['id']): (int(n['left']), int(n['right'])) for n in data['nodes']}
            payloads = {
                int(leaf['id']): None if leaf.get('payload') is None else int(leaf['payload'])
                for leaf in data['leaves']
            }
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidArgument(f"Malformed tree structure: {exc}") from exc
        return cls.from_children(children, payloads)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TreeStructure):
            return NotImplemented
        return self._internal == other._internal and self._leaves == other._leaves

    def __hash__(self) -> int:
        return hash((self._internal, self._leaves))

    def __repr__(self) -> str:
        return f"TreeStructure(internal={self.num_internal}, leaves={self.num_leaves}, height={self.height})"


@dataclass(eq=False)
class _Split:
    left: '_Shape'
    right: '_Shape'


@dataclass(eq=False)
class _Tip:
    payload: Optional[int] = None


_Shape = Union[_Split, _Tip]


def _materialize(shape: _Shape) -> TreeStructure:
    if isinstance(shape, _Tip):
        raise InvalidArgument("A tree needs at least one internal node")

    splits: List[_Split] = []
    queue = deque([shape])
    while queue:
        current = queue.popleft()
        if isinstance(current, _Split):
            splits.append(current)
            queue.append(current.left)
            queue.append(current.right)

    tips: List[_Tip] = []

    def collect(current: _Shape) -> None:
        if isinstance(current, _Tip):
            tips.append(current)
        else:
            collect(current.left)
            collect(current.right)

    collect(shape)

    K = len(splits)
    ids: Dict[int, NodeID] = {id(s): NodeID(i) for i, s in enumerate(splits)}
    ids.update({id(t): NodeID(K + j) for j, t in enumerate(tips)})
    internal = [InternalNode(ids[id(s)], ids[id(s.left)], ids[id(s.right)]) for s in splits]
    leaves = [Leaf(ids[id(t)], t.payload) for t in tips]
    return TreeStructure(internal, leaves)


def _balanced_shape(height: int) -> _Shape:
    if height == 0:
        return _Tip()
    return _Split(_balanced_shape(height - 1), _balanced_shape(height - 1))


def _class_shape(labels: Sequence[int]) -> _Shape:
    count = len(labels)
    if count == 1:
        return _Tip(labels[0])
    if count == 2:
        return _Split(_Tip(labels[0]), _Tip(labels[1]))
    height = math.ceil(math.log2(count))
    # deeper leaf pairs fill the left side first
    left_count = min(2 ** (height - 1), count - 2 ** (height - 2))
    return _Split(_class_shape(labels[:left_count]), _class_shape(labels[left_count:]))


def class_depth(num_classes: int) -> int:
    return math.ceil(math.log2(num_classes))


def build_balanced(height: int) -> TreeStructure:
    if height < 1:
        raise InvalidArgument(f"Tree height must be >= 1, got {height}")
    return _materialize(_balanced_shape(height))


def build_class_subtree(num_classes: int) -> TreeStructure:
    if num_classes < 2:
        raise InvalidArgument(f"A class subtree needs >= 2 classes, got {num_classes}")
    return _materialize(_class_shape(list(range(num_classes))))


def graft_classifier(height: int, num_classes: int) -> TreeStructure:
    """Balanced tree of height ``height - d_c`` whose leaves each become a class subtree."""
    if num_classes < 2:
        raise InvalidArgument(f"Classification needs >= 2 classes, got {num_classes}")
    d_c = class_depth(num_classes)
    if height < d_c:
        raise InvalidArgument(
            f"Height {height} cannot hold {num_classes} classes (needs >= {d_c})",
            height=height, num_classes=num_classes,
        )

    def graft(levels: int) -> _Shape:
        if levels == 0:
            return _class_shape(list(range(num_classes)))
        return _Split(graft(levels - 1), graft(levels - 1))

    return _materialize(graft(height - d_c))


def leaf_decisions(tree: TreeStructure, leaf_id: int) -> SignedDecisionSet:
    if not tree.is_leaf(leaf_id):
        raise InvalidArgument(f"Node {leaf_id} is not a leaf of the tree")
    path: List[SignedDecision] = []
    node = NodeID(leaf_id)
    link = tree.parent(node)
    while link is not None:
        parent, sign = link
        path.append(SignedDecision(parent, sign))
        link = tree.parent(parent)
    return tuple(reversed(path))


def _check_dims(tree: TreeStructure, params: DecisionParams) -> None:
    if params.num_internal != tree.num_internal:
        raise InvalidArgument(
            f"DecisionParams has {params.num_internal} rows but the tree has {tree.num_internal} internal nodes"
        )


def traverse(tree: TreeStructure, params: DecisionParams, x: np.ndarray) -> NodeID:
    """Go right iff A_i x + b_i > 0; ties (== 0) go left."""
    _check_dims(tree, params)
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (params.num_features,):
        raise InvalidArgument(f"Input has shape {x.shape}, expected ({params.num_features},)")
    values = params.decision_values(x[None, :])[0]
    node = tree.root
    while not tree.is_leaf(node):
        internal = tree.internal_nodes[node]
        node = internal.right if values[node] > 0 else internal.left
    return NodeID(node)


def traverse_batch(tree: TreeStructure, params: DecisionParams, X: np.ndarray) -> np.ndarray:
    """Vectorized ``traverse``; returns leaf indices (0-based among leaves)."""
    _check_dims(tree, params)
    values = params.decision_values(np.atleast_2d(X))
    lefts = np.array([n.left for n in tree.internal_nodes], dtype=np.int64)
    rights = np.array([n.right for n in tree.internal_nodes], dtype=np.int64)
    rows = np.arange(values.shape[0])
    current = np.full(values.shape[0], tree.root, dtype=np.int64)
    for _ in range(tree.height):
        active = current < tree.num_internal
        if not active.any():
            break
        nodes = current[active]
        go_right = values[rows[active], nodes] > 0
        current[active] = np.where(go_right, rights[nodes], lefts[nodes])
    return current - tree.num_internal


def satisfied_leaves(tree: TreeStructure, params: DecisionParams, X: np.ndarray) -> np.ndarray:
    """N x L boolean: leaf j has every signed decision true (zero counts as false)."""
    values = params.decision_values(np.atleast_2d(X))
    signs = tree.path_signs()
    truth = values > 0
    needs_right = (signs == 1).astype(np.int64)
    needs_left = (signs == -1).astype(np.int64)
    violations = (~truth).astype(np.int64) @ needs_right.T + truth.astype(np.int64) @ needs_left.T
    return violations == 0


def predict(tree: TreeStructure, params: DecisionParams, payloads: LeafPayloads, x: np.ndarray):
    """Class label of the reached leaf, or theta . x + alpha per regression output."""
    leaf = tree.leaf_index(traverse(tree, params, x))
    x = np.asarray(x, dtype=np.float64)
    out = payloads.leaf_outputs(np.array([leaf]), x[None, :])
    if payloads.task is TaskType.CLASSIFICATION:
        return int(out[0])
    return out[0]


def predict_batch(tree: TreeStructure, params: DecisionParams, payloads: LeafPayloads,
                  X: np.ndarray) -> np.ndarray:
    if payloads.num_leaves != tree.num_leaves:
        raise InvalidState(f"Payloads cover {payloads.num_leaves} leaves, tree has {tree.num_leaves}")
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    return payloads.leaf_outputs(traverse_batch(tree, params, X), X)


@dataclass(frozen=True)
class DecisionTree:
    """A complete hard tree: skeleton, hyperplanes and leaf payloads."""
    structure: TreeStructure
    params: DecisionParams
    payloads: LeafPayloads

    def __post_init__(self):
        _check_dims(self.structure, self.params)
        if self.payloads.num_leaves != self.structure.num_leaves:
            raise InvalidState(
                f"Payloads cover {self.payloads.num_leaves} leaves, tree has {self.structure.num_leaves}"
            )

    @property
    def task(self) -> TaskType:
        return self.payloads.task

    @property
    def num_features(self) -> int:
        return self.params.num_features

    def predict_leaves(self, X: np.ndarray) -> np.ndarray:
        return traverse_batch(self.structure, self.params, X)

    def predict(self, X: np.ndarray) -> np.ndarray:
        return predict_batch(self.structure, self.params, self.payloads, X)
