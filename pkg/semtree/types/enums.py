from __future__ import annotations
from enum import IntEnum


class _ParsableEnum(IntEnum):
    @classmethod
    def parse(cls, value: str) -> "_ParsableEnum":
        if isinstance(value, cls):
            return value
        key = str(value).strip().upper().replace('-', '_')
        try:
            return cls[key]
        except KeyError:
            choices = ', '.join(m.name.lower() for m in cls)
            raise ValueError(f"Unknown {cls.__name__} '{value}' (expected one of: {choices})")

    @property
    def label(self) -> str:
        return self.name.lower()


class TaskType(_ParsableEnum):
    CLASSIFICATION = 1
    REGRESSION = 2


class OptimizerType(_ParsableEnum):
    SGD = 1
    ADAM = 2
    RMSPROP = 3


class SchedulerType(_ParsableEnum):
    LINEAR = 1
    COSINE = 2


class DataFormat(_ParsableEnum):
    CSV = 1
    LIBSVM = 2


class DecisionSign(IntEnum):
    LEFT = -1
    RIGHT = 1

    @property
    def symbol(self) -> str:
        return '+' if self is DecisionSign.RIGHT else '-'
