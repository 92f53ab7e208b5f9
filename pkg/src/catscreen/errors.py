"""Exception types shared across the toolchain.

Every error that crosses a module boundary gets a named class so callers
(and the MCP/CLI layers) can map failures to structured responses without
string matching.
"""


class CatscreenError(Exception):
    """Base class for all library errors."""


# crystal / CIF
class MissingCellParameter(CatscreenError):
    def __init__(self, tag):
        self.tag = tag
        super().__init__(f"CIF is missing cell parameter tag {tag!r}")


class MissingAtomLoop(CatscreenError):
    pass


class UnknownElementSymbol(CatscreenError):
    def __init__(self, symbol, where=""):
        self.symbol = symbol
        msg = f"unknown element symbol {symbol!r}"
        if where:
            msg += f" ({where})"
        super().__init__(msg)


class IndexOutOfRange(CatscreenError, IndexError):
    pass


class ZeroMultiplier(CatscreenError, ValueError):
    pass


class SingularLattice(CatscreenError):
    pass


# optimade
class EmptyElementList(CatscreenError, ValueError):
    pass


class ProviderUnreachable(CatscreenError):
    def __init__(self, provider, reason):
        self.provider = provider
        self.reason = reason
        super().__init__(f"provider {provider!r} unreachable: {reason}")


class MalformedEntry(CatscreenError):
    pass


class NoResults(CatscreenError):
    pass


class MissingField(CatscreenError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"entry is missing required field {name!r}")


# slab
class TilingFailed(CatscreenError):
    def __init__(self, message, debug=None):
        self.debug = debug or {}
        super().__init__(message)


class DegenerateCut(CatscreenError):
    pass


# surfmod
class StrainOutOfRange(CatscreenError, ValueError):
    pass


class ElementNotInTopLayer(CatscreenError):
    pass


class InvalidElement(CatscreenError, ValueError):
    pass


# energetics
class NonFiniteResult(CatscreenError):
    pass


class CalculatorFailure(CatscreenError):
    def __init__(self, step, reason):
        self.step = step
        super().__init__(f"calculator failed at step {step}: {reason}")


class BridgeUnavailable(CatscreenError):
    pass


class ProtocolViolation(CatscreenError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"{message}: {line!r}"
        super().__init__(message)


class WorkerTimeout(CatscreenError):
    pass


class BackendLoadFailure(CatscreenError):
    pass


# adsorb
class NoSurfaceAtoms(CatscreenError):
    pass


class NonFiniteInput(CatscreenError, ValueError):
    pass


class EmptyList(CatscreenError, ValueError):
    pass


class TooManyFacets(CatscreenError, ValueError):
    pass


class UnknownAdsorbate(CatscreenError, KeyError):
    pass


# campaign
class EvaluationBackendFailure(CatscreenError):
    pass


class EmptyLedger(CatscreenError):
    pass


class MalformedLedgerLine(CatscreenError):
    def __init__(self, lineno, reason):
        self.lineno = lineno
        super().__init__(f"malformed ledger line {lineno}: {reason}")


# mcp / cli
class ArgumentValidation(CatscreenError, ValueError):
    def __init__(self, field, reason):
        self.field = field
        super().__init__(f"invalid argument {field!r}: {reason}")
