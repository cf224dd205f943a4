"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class ZipStreamError(Exception):
    """Base class for every error raised by the library."""


# core
class SpecSyntaxError(ZipStreamError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col


class UndefinedVariable(ZipStreamError):
    def __init__(self, name: str):
        super().__init__(f"undefined variable {name}")
        self.name = name


class DuplicateEquation(ZipStreamError):
    def __init__(self, name: str):
        super().__init__(f"duplicate equation for {name}")
        self.name = name


class ArityZero(ZipStreamError):
    pass


class ProjInNonPiDialect(ZipStreamError):
    pass


# semantics
class BudgetExhausted(ZipStreamError):
    pass


class NotFlat(ZipStreamError):
    pass


# analysis
class PiDialectUnsupported(ZipStreamError):
    pass


class RootHoistForbidden(ZipStreamError):
    pass


class NoRedex(ZipStreamError):
    pass


class InternalNonTermination(ZipStreamError):
    pass


# transform / graphs
class NotProductive(ZipStreamError):
    pass


class CobasisMismatch(ZipStreamError):
    pass


class DifferentK(ZipStreamError):
    pass


class AlphabetMismatch(ZipStreamError):
    pass


class NotZeroInvariant(ZipStreamError):
    def __init__(self, node: object, message: str = ""):
        super().__init__(message or f"not invariant under leading zeros at {node}")
        self.node = node


# pdl
class UnknownLabel(ZipStreamError):
    pass


class UnknownAtom(ZipStreamError):
    pass


class PdlSyntaxError(ZipStreamError):
    pass


# fractran
class Timeout(ZipStreamError):
    pass


class NotDecreasing(ZipStreamError):
    pass
