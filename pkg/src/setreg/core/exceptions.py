#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Custom exceptions for setreg
"""


class SetRegError(Exception):
    """Base exception for setreg"""
    pass


class InputError(SetRegError):
    """Malformed or inconsistent user input"""
    pass


class SceneParseError(InputError):
    """Scene or mapping file could not be read or violates the schema"""
    def __init__(self, detail: str, path: str = None):
        self.path = path
        self.detail = detail
        super().__init__(f"{path}: {detail}" if path else detail)


class DimensionMismatchError(InputError):
    """Point dimension does not match the set dimension"""
    def __init__(self, expected: int, actual: int):
        self.expected = expected
        self.actual = actual
        super().__init__(f"dimension mismatch: expected {expected}, got {actual}")


class NotInIntersectionError(InputError):
    """Reference point is not a common point of the collection"""
    def __init__(self, index: int, distance: float):
        self.index = index
        self.distance = distance
        super().__init__(
            f"x̄ not in intersection: distance to set {index} is {distance:.3e}"
        )


class InfeasiblePolyhedronError(InputError):
    """Polyhedron rows describe an empty set"""
    pass


class PreconditionError(InputError):
    """An operation precondition does not hold"""
    pass


class ConfigurationError(SetRegError):
    """Configuration related errors"""
    pass


class EstimatorDiagnostic(SetRegError):
    """Numerical diagnostic raised by an estimator"""
    def __init__(self, kind: str, detail: str):
        self.kind = kind
        self.detail = detail
        super().__init__(f"{kind}: {detail}")


class CheckFailure(SetRegError):
    """A regression check did not hold"""
    def __init__(self, name: str, detail: str = ""):
        self.name = name
        self.detail = detail
        super().__init__(f"check {name} failed" + (f": {detail}" if detail else ""))
