from .codec import Checkpoint, CheckpointCodec, TreeDocument, dump_standardizer

__all__ = ["Checkpoint", "CheckpointCodec", "TreeDocument", "dump_standardizer"]
