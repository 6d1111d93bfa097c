from __future__ import annotations
from typing import NewType

NodeID = NewType('NodeID', int)
LeafIndex = NewType('LeafIndex', int)
ClassLabel = NewType('ClassLabel', int)
ConfigHash = NewType('ConfigHash', str)
