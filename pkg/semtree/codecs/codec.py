"""
JSON codecs for checkpoints and the decoded-tree interchange format.

Checkpoints carry enough to rebuild the network exactly (tree skeleton, trainable
tensors as float64 lists, over-parameterization factors) plus integrity data: the
blake2b hash of the fixed masks and a checksum over the trainable values.
"""

from __future__ import annotations
import hashlib
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

import numpy as np
import torch

from ..core.params import DecisionParams, LeafPayloads
from ..core.tree import DecisionTree, TreeStructure
from ..data.dataset import Standardizer
from ..exceptions import CheckpointCorruption, InvalidArgument, SemTreeError
from ..network.semnet import DTYPE, SemNet, encode
from ..types.enums import TaskType

logger = logging.getLogger(__name__)

CHECKPOINT_VERSION = 1
TREE_FORMAT = 'semtree-tree'
TREE_VERSION = 1

PathLike = Union[str, Path]


@dataclass
class Checkpoint:
    net: SemNet
    config_hash: Optional[str]
    seed: Optional[int]
    standardizer: Optional[Standardizer] = None
    epoch: Optional[int] = None


@dataclass(frozen=True)
class TreeDocument:
    tree: DecisionTree
    config_hash: Optional[str] = None
    seed: Optional[int] = None
    destandardized: bool = False


def _values_checksum(arrays) -> str:
    digest = hashlib.blake2b(digest_size=8)
    for array in arrays:
        digest.update(np.ascontiguousarray(array, dtype=np.float64).tobytes())
    return digest.hexdigest()


def _tensor_list(tensor: torch.Tensor) -> list:
    return tensor.detach().cpu().to(DTYPE).numpy().tolist()


class CheckpointCodec:
    """Encode/decode checkpoints and tree documents, validating integrity on load."""

    __slots__ = ('_indent',)

    def __init__(self, indent: Optional[int] = None):
        self._indent = indent

    @staticmethod
    def compute_masks_hash(net: SemNet) -> str:
        return net.masks_hash()

    def encode_checkpoint(
        self,
        net: SemNet,
        config_hash: Optional[str] = None,
        seed: Optional[int] = None,
        standardizer: Optional[Standardizer] = None,
        epoch: Optional[int] = None,
    ) -> Dict[str, Any]:
        trainables = [p.detach().cpu().numpy() for p in net.chain]
        data: Dict[str, Any] = {
            'version': CHECKPOINT_VERSION,
            'task': net.task.label,
            'num_features': net.num_features,
            'output_dim': net.output_dim,
            'masks_hash': self.compute_masks_hash(net),
            'tree': net.tree.to_dict(),
            'params': _tensor_list(net.decision_matrix()),
            'overparams': list(net.overparams),
            'overparam_chain': [p.tolist() for p in trainables],
        }
        if net.regressors is not None:
            regressors = net.regressors.detach().cpu().numpy()
            data['regressors'] = regressors.tolist()
            trainables.append(regressors)
        data['checksum'] = _values_checksum(trainables)
        data['config_hash'] = config_hash
        data['seed'] = seed
        data['epoch'] = epoch
        data['standardizer'] = standardizer.to_dict() if standardizer is not None else None
        return data

    def decode_checkpoint(self, data: Mapping[str, Any]) -> Checkpoint:
        try:
            if data.get('version') != CHECKPOINT_VERSION:
                raise CheckpointCorruption(f"Unsupported checkpoint version {data.get('version')!r}")
            tree = TreeStructure.from_dict(data['tree'])
            net = encode(tree, int(data['num_features']), TaskType.parse(data['task']),
                         int(data.get('output_dim', 1)), tuple(data.get('overparams', ())))
            factors = [np.asarray(f, dtype=np.float64) for f in data['overparam_chain']]
            regressors = None
            if net.regressors is not None:
                regressors = np.asarray(data['regressors'], dtype=np.float64)
        except CheckpointCorruption:
            raise
        except (KeyError, TypeError, ValueError, SemTreeError) as exc:
            raise CheckpointCorruption(f"Malformed checkpoint: {exc}") from exc

        self.validate_integrity(net, data, factors, regressors)
        with torch.no_grad():
            for param, factor in zip(net.chain, factors):
                param.copy_(torch.as_tensor(factor, dtype=DTYPE))
            if regressors is not None:
                net.regressors.copy_(torch.as_tensor(regressors, dtype=DTYPE))

        standardizer = None
        if data.get('standardizer') is not None:
            standardizer = Standardizer.from_dict(data['standardizer'])
        return Checkpoint(net=net, config_hash=data.get('config_hash'), seed=data.get('seed'),
                          standardizer=standardizer, epoch=data.get('epoch'))

    def validate_integrity(self, net: SemNet, data: Mapping[str, Any], factors, regressors) -> None:
        actual = self.compute_masks_hash(net)
        if actual != data.get('masks_hash'):
            raise CheckpointCorruption("Mask hash mismatch: tree skeleton does not match checkpoint",
                                       expected_hash=data.get('masks_hash'), actual_hash=actual)
        if len(factors) != len(net.chain):
            raise CheckpointCorruption(f"Checkpoint has {len(factors)} factors, expected {len(net.chain)}")
        for param, factor in zip(net.chain, factors):
            if tuple(factor.shape) != tuple(param.shape):
                raise CheckpointCorruption(
                    f"Factor shape {factor.shape} does not match {tuple(param.shape)}"
                )
        if regressors is not None and tuple(regressors.shape) != tuple(net.regressors.shape):
            raise CheckpointCorruption(f"Regressor shape {regressors.shape} does not match")
        values = list(factors) + ([regressors] if regressors is not None else [])
        checksum = _values_checksum(values)
        if checksum != data.get('checksum'):
            raise CheckpointCorruption("Parameter checksum mismatch",
                                       expected_hash=data.get('checksum'), actual_hash=checksum)

    def save_checkpoint(self, path: PathLike, net: SemNet, **kwargs) -> Path:
        return self._write(path, self.encode_checkpoint(net, **kwargs))

    def load_checkpoint(self, path: PathLike) -> Checkpoint:
        return self.decode_checkpoint(self._read(path))

    def encode_tree(self, tree: DecisionTree, config_hash: Optional[str] = None,
                    seed: Optional[int] = None, destandardized: bool = False) -> Dict[str, Any]:
        """
        Tree interchange document: ``{n, task, nodes, leaves}``. Each node carries its own
        ``weights``/``bias`` and child ids; each leaf carries ``class`` or ``theta``/``alpha``
        (a flat ``theta`` and scalar ``alpha`` for one output, one row per output otherwise).
        """
        structure, params, payloads = tree.structure, tree.params, tree.payloads
        nodes = [
            {
                'id': int(node.node_id),
                'weights': params.weights[node.node_id].tolist(),
                'bias': float(params.biases[node.node_id]),
                'left': int(node.left),
                'right': int(node.right),
            }
            for node in structure.internal_nodes
        ]
        leaves = []
        for leaf in structure.leaves:
            j = structure.leaf_index(leaf.node_id)
            if tree.task is TaskType.CLASSIFICATION:
                leaves.append({'id': int(leaf.node_id), 'class': int(payloads.classes[j])})
            elif payloads.output_dim == 1:
                leaves.append({'id': int(leaf.node_id), 'theta': payloads.theta[0, j].tolist(),
                               'alpha': float(payloads.alpha[0, j])})
            else:
                leaves.append({'id': int(leaf.node_id), 'theta': payloads.theta[:, j].tolist(),
                               'alpha': payloads.alpha[:, j].tolist()})
        return {
            'format': TREE_FORMAT,
            'version': TREE_VERSION,
            'n': tree.num_features,
            'task': tree.task.label,
            'nodes': nodes,
            'leaves': leaves,
            'destandardized': destandardized,
            'config_hash': config_hash,
            'seed': seed,
        }

    def decode_tree(self, data: Mapping[str, Any]) -> TreeDocument:
        if data.get('format', TREE_FORMAT) != TREE_FORMAT:
            raise InvalidArgument(f"Not a tree document (format={data.get('format')!r})")
        try:
            n = int(data['n'])
            task = TaskType.parse(data['task'])
            nodes = sorted(data['nodes'], key=lambda node: int(node['id']))
            leaves = sorted(data['leaves'], key=lambda leaf: int(leaf['id']))
            children = {int(node['id']): (int(node['left']), int(node['right'])) for node in nodes}
            weights = np.asarray([node['weights'] for node in nodes], dtype=np.float64).reshape(len(nodes), n)
            biases = np.asarray([node['bias'] for node in nodes], dtype=np.float64)
            if task is TaskType.CLASSIFICATION:
                labels = {int(leaf['id']): int(leaf['class']) for leaf in leaves}
                structure = TreeStructure.from_children(children, labels)
                payloads = LeafPayloads.for_classes(structure.payloads())
            else:
                structure = TreeStructure.from_children(children, {int(leaf['id']): None for leaf in leaves})
                theta = [np.asarray(leaf['theta'], dtype=np.float64) for leaf in leaves]
                alpha = [np.asarray(leaf['alpha'], dtype=np.float64) for leaf in leaves]
                # (leaves, d, n) -> (d, leaves, n)
                theta = np.stack([t.reshape(-1, n) for t in theta]).transpose(1, 0, 2)
                alpha = np.stack([a.reshape(-1) for a in alpha]).T
                payloads = LeafPayloads.for_regressors(np.ascontiguousarray(theta),
                                                       np.ascontiguousarray(alpha))
        except (KeyError, TypeError, ValueError, SemTreeError) as exc:
            raise InvalidArgument(f"Malformed tree document: {exc}") from exc
        return TreeDocument(DecisionTree(structure, DecisionParams(weights, biases), payloads),
                            data.get('config_hash'), data.get('seed'),
                            bool(data.get('destandardized', False)))

    def save_tree(self, path: PathLike, tree: DecisionTree, **kwargs) -> Path:
        return self._write(path, self.encode_tree(tree, **kwargs))

    def load_tree(self, path: PathLike) -> TreeDocument:
        try:
            return self.decode_tree(self._read(path))
        except CheckpointCorruption as exc:
            raise InvalidArgument(exc.message) from exc

    def _write(self, path: PathLike, data: Mapping[str, Any]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open('w', encoding='utf-8') as handle:
            json.dump(data, handle, indent=self._indent, sort_keys=True)
            handle.write('\n')
        logger.debug("Wrote %s", path)
        return path

    @staticmethod
    def _read(path: PathLike) -> Dict[str, Any]:
        path = Path(path)
        try:
            with path.open('r', encoding='utf-8') as handle:
                data = json.load(handle)
        except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise CheckpointCorruption(f"Cannot read {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise CheckpointCorruption(f"{path} does not hold a JSON object")
        return data


def dump_standardizer(standardizer: Standardizer, path: PathLike) -> Path:
    return CheckpointCodec(indent=2)._write(path, standardizer.to_dict())
