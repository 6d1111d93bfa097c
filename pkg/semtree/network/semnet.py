"""
Network encoding of an oblique decision tree.

Layers: a trainable decision layer (I = A x + b), a fixed +/-1 split layer with ReLU
(top_i = relu(I_i), bot_i = relu(-I_i)) and a fixed 0/1 leaf-connectivity layer
(L = leaf_mask . [top, bot]). The argmax leaf of L is the leaf reached by hard traversal.
Classification adds a MaxPool class head; regression adds per-leaf regressors selected by
an argmax one-hot with a straight-through backward.
"""

from __future__ import annotations
import hashlib
import math
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Union

import numpy as np
import torch
import torch.nn.functional as F
from torch import nn

from ..core.params import DecisionParams, LeafPayloads
from ..core.tree import DecisionTree, TreeStructure, leaf_decisions
from ..exceptions import InvalidArgument, InvalidState
from ..optim.overparam import fold_chain, make_overparam_chain
from ..types.enums import DecisionSign, TaskType
from ..types.protocols import IHardPredictor
from .estimators import argmax_one_hot

DTYPE = torch.float64
_EQUIV_CHUNK = 65536


def affine_columns(X: torch.Tensor, W: torch.Tensor, b: torch.Tensor) -> torch.Tensor:
    """Torch twin of ``semtree.core.params.affine_columns`` (same accumulation order)."""
    acc = b.unsqueeze(0).expand(X.shape[0], b.shape[0])
    for k in range(X.shape[1]):
        acc = acc + X[:, k:k + 1] * W[:, k]
    return acc


@dataclass
class ForwardRecord:
    I: torch.Tensor
    top: torch.Tensor
    bot: torch.Tensor
    L: torch.Tensor
    selected_leaf: torch.Tensor
    C: Optional[torch.Tensor] = None
    R: Optional[torch.Tensor] = None
    H: Optional[torch.Tensor] = None
    out: Optional[torch.Tensor] = None
    W: Optional[torch.Tensor] = None


def _build_masks(tree: TreeStructure):
    K, L = tree.num_internal, tree.num_leaves
    eye = torch.eye(K, dtype=DTYPE)
    split_mask = torch.cat([eye, -eye], dim=0)
    leaf_mask = torch.ones(L, 2 * K, dtype=DTYPE)
    for leaf in tree.leaves:
        j = tree.leaf_index(leaf.node_id)
        for decision in leaf_decisions(tree, leaf.node_id):
            if decision.sign is DecisionSign.RIGHT:
                leaf_mask[j, K + decision.node_id] = 0.0
            else:
                leaf_mask[j, decision.node_id] = 0.0
    return split_mask, leaf_mask


class SemNet(nn.Module):
    def __init__(
        self,
        tree: TreeStructure,
        num_features: int,
        task: TaskType = TaskType.CLASSIFICATION,
        output_dim: int = 1,
        overparams: Sequence[int] = (),
        generator: Optional[torch.Generator] = None,
    ):
        super().__init__()
        if num_features < 1:
            raise InvalidArgument(f"Input dimension must be >= 1, got {num_features}")
        if output_dim < 1:
            raise InvalidArgument(f"Output dimension must be >= 1, got {output_dim}")
        self.tree = tree
        self.task = TaskType(task)
        self._num_features = int(num_features)
        self.output_dim = int(output_dim) if self.task is TaskType.REGRESSION else 1
        self.overparams = tuple(int(w) for w in overparams)

        split_mask, leaf_mask = _build_masks(tree)
        self.register_buffer('split_mask', split_mask)
        self.register_buffer('leaf_mask', leaf_mask)

        if self.task is TaskType.CLASSIFICATION:
            labels = tree.payloads()
            if any(label is None for label in labels):
                raise InvalidState("Classification tree has leaves without class payloads")
            num_classes = max(labels) + 1
            class_map = torch.zeros(num_classes, tree.num_leaves, dtype=DTYPE)
            class_map[torch.tensor(labels), torch.arange(tree.num_leaves)] = 1.0
            self.register_buffer('class_map', class_map)
            self.regressors = None
        else:
            self.class_map = None
            bound = 1.0 / math.sqrt(num_features + 1)
            regressors = torch.empty(
                self.output_dim, tree.num_leaves, num_features + 1, dtype=DTYPE
            ).uniform_(-bound, bound, generator=generator)
            regressors[..., num_features] = 0.0
            self.regressors = nn.Parameter(regressors)

        self.chain = make_overparam_chain(tree.num_internal, num_features, self.overparams, generator)

    @property
    def num_features(self) -> int:
        return self._num_features

    @property
    def num_internal(self) -> int:
        return self.tree.num_internal

    @property
    def num_leaves(self) -> int:
        return self.tree.num_leaves

    @property
    def num_classes(self) -> int:
        return 0 if self.class_map is None else int(self.class_map.shape[0])

    @property
    def has_overparams(self) -> bool:
        return len(self.chain) > 1

    def decision_matrix(self) -> torch.Tensor:
        """K x (n+1) effective decision matrix; the last column holds the biases."""
        return fold_chain(self.chain)

    def node_counts(self) -> Dict[str, int]:
        K, L = self.num_internal, self.num_leaves
        counts = {
            'inputs': self.num_features + 1,
            'decision': K,
            'split': 2 * K,
            'leaves': L,
        }
        counts['total'] = sum(counts.values())
        return counts

    def trainable_decision_count(self) -> int:
        return self.num_internal * (self.num_features + 1)

    def masks_hash(self) -> str:
        digest = hashlib.blake2b(digest_size=16)
        for mask in (self.split_mask, self.leaf_mask, self.class_map):
            if mask is not None:
                digest.update(str(tuple(mask.shape)).encode('ascii'))
                digest.update(mask.detach().cpu().to(torch.int8).numpy().tobytes())
        return digest.hexdigest()

    def _as_batch(self, x: Union[torch.Tensor, np.ndarray]) -> torch.Tensor:
        X = torch.as_tensor(x, dtype=DTYPE)
        if X.dim() == 1:
            X = X.unsqueeze(0)
        if X.dim() != 2 or X.shape[1] != self.num_features:
            raise InvalidArgument(
                f"Input has shape {tuple(X.shape)}, expected (*, {self.num_features})"
            )
        return X

    def select_leaves(self, I: torch.Tensor, L: torch.Tensor) -> torch.Tensor:
        """
        argmax over L. Among equal maxima the leaf whose decisions all hold with
        zero treated as "left" wins, which is the leaf hard traversal reaches.
        """
        with torch.no_grad():
            K = self.num_internal
            is_max = L == L.max(dim=1, keepdim=True).values
            needs_right = (self.leaf_mask[:, K:] == 0).to(DTYPE)
            needs_left = (self.leaf_mask[:, :K] == 0).to(DTYPE)
            truth = (I > 0).to(DTYPE)
            violations = (1.0 - truth) @ needs_right.T + truth @ needs_left.T
            score = torch.where(is_max, -violations, torch.full_like(violations, -math.inf))
            return score.argmax(dim=1)

    def forward(self, x: Union[torch.Tensor, np.ndarray]) -> ForwardRecord:
        X = self._as_batch(x)
        n = self.num_features
        W = self.decision_matrix()
        I = affine_columns(X, W[:, :n], W[:, n])
        top = F.relu(I)
        bot = F.relu(-I)
        L = torch.cat([top, bot], dim=1) @ self.leaf_mask.T
        selected = self.select_leaves(I, L)
        record = ForwardRecord(I=I, top=top, bot=bot, L=L, selected_leaf=selected, W=W)

        if self.task is TaskType.CLASSIFICATION:
            pooled = torch.where(
                self.class_map.unsqueeze(0) > 0,
                L.unsqueeze(1),
                torch.full((), -math.inf, dtype=DTYPE),
            )
            # first index on ties, so the gradient reaches the lowest leaf id
            winners = pooled.argmax(dim=2, keepdim=True)
            record.C = pooled.gather(2, winners).squeeze(2)
        else:
            record.R = torch.stack(
                [affine_columns(X, self.regressors[d, :, :n], self.regressors[d, :, n])
                 for d in range(self.output_dim)],
                dim=1,
            )
            record.H = argmax_one_hot(L, selected)
            record.out = (record.H.unsqueeze(1) * record.R).sum(dim=2)
        return record

    def predict_leaves(self, X: Union[torch.Tensor, np.ndarray]) -> np.ndarray:
        with torch.no_grad():
            batch = self._as_batch(X)
            n = self.num_features
            W = self.decision_matrix()
            I = affine_columns(batch, W[:, :n], W[:, n])
            L = torch.cat([F.relu(I), F.relu(-I)], dim=1) @ self.leaf_mask.T
            return self.select_leaves(I, L).cpu().numpy()

    def predict(self, X: Union[torch.Tensor, np.ndarray]) -> np.ndarray:
        """Hard outputs: class ids (N,) or regression values (N x d)."""
        with torch.no_grad():
            record = self.forward(X)
            if self.task is TaskType.CLASSIFICATION:
                labels = torch.as_tensor(self.tree.payloads(), dtype=torch.int64)
                return labels[record.selected_leaf].cpu().numpy()
            return record.out.cpu().numpy()

    def decode(self) -> DecisionTree:
        with torch.no_grad():
            params = DecisionParams.from_matrix(self.decision_matrix().cpu().numpy())
            if self.task is TaskType.CLASSIFICATION:
                payloads = LeafPayloads.for_classes(self.tree.payloads())
            else:
                regressors = self.regressors.detach().cpu().numpy()
                n = self.num_features
                payloads = LeafPayloads.for_regressors(regressors[..., :n], regressors[..., n])
        return DecisionTree(self.tree, params, payloads)

    def load_decoded(self, tree: DecisionTree) -> SemNet:
        """Overwrite trainable values from a decoded tree (the chain collapses to one matrix)."""
        if tree.structure != self.tree:
            raise InvalidArgument("Decoded tree structure does not match this network")
        with torch.no_grad():
            matrix = torch.as_tensor(tree.params.as_matrix(), dtype=DTYPE)
            self.chain = nn.ParameterList([nn.Parameter(matrix.clone())])
            self.overparams = ()
            if self.task is TaskType.REGRESSION:
                theta = torch.as_tensor(tree.payloads.theta, dtype=DTYPE)
                alpha = torch.as_tensor(tree.payloads.alpha, dtype=DTYPE)
                self.regressors.copy_(torch.cat([theta, alpha.unsqueeze(-1)], dim=-1))
        return self

    def extra_repr(self) -> str:
        return (
            f"task={self.task.label}, n={self.num_features}, K={self.num_internal}, "
            f"leaves={self.num_leaves}, overparams={list(self.overparams)}"
        )


def encode(
    tree: TreeStructure,
    num_features: int,
    task: TaskType = TaskType.CLASSIFICATION,
    output_dim: int = 1,
    overparams: Sequence[int] = (),
    seed: Optional[int] = None,
) -> SemNet:
    generator = None
    if seed is not None:
        generator = torch.Generator().manual_seed(int(seed))
    return SemNet(tree, num_features, task, output_dim, overparams, generator)


def forward(net: SemNet, x: Union[torch.Tensor, np.ndarray]) -> ForwardRecord:
    return net(x)


def decode(net: SemNet) -> DecisionTree:
    return net.decode()


def check_equivalence(net: IHardPredictor, tree: IHardPredictor, inputs: np.ndarray) -> int:
    """Number of inputs on which the two predictors reach different leaves."""
    inputs = np.atleast_2d(np.asarray(inputs, dtype=np.float64))
    mismatches = 0
    for start in range(0, inputs.shape[0], _EQUIV_CHUNK):
        chunk = inputs[start:start + _EQUIV_CHUNK]
        mismatches += int(np.count_nonzero(net.predict_leaves(chunk) != tree.predict_leaves(chunk)))
    return mismatches


def boundary_points(params: DecisionParams, rng: np.random.Generator,
                    per_node: int = 16, box: float = 3.0) -> np.ndarray:
    """Random points in [-box, box]^n projected onto each hyperplane A_i x + b_i = 0."""
    points = []
    for A, b in zip(params.weights, params.biases):
        norm_sq = float(A @ A)
        if norm_sq == 0.0:
            continue
        X = rng.uniform(-box, box, size=(per_node, params.num_features))
        X = X - np.outer((X @ A + b) / norm_sq, A)
        points.append(X)
    if not points:
        return np.empty((0, params.num_features))
    return np.vstack(points)
