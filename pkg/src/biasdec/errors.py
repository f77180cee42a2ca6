"""Exception hierarchy shared by all biasdec modules."""


class BiasdecError(Exception):
    """Base class for all errors raised by this package."""


# --- posterior / alphabet files ---

class MalformedHeader(BiasdecError):
    pass


class DimensionMismatch(BiasdecError):
    pass


class RowNotNormalized(BiasdecError):
    def __init__(self, row: int, residual: float):
        self.row = row
        self.residual = residual
        super().__init__(
            f"row {row} is not a probability distribution (residual {residual:.3e})"
        )


class DuplicateSymbol(BiasdecError):
    pass


class MissingReserved(BiasdecError):
    pass


class IoFailure(BiasdecError):
    pass


# --- ARPA language model ---

class SectionMissing(BiasdecError):
    pass


class CountMismatch(BiasdecError):
    def __init__(self, order: int, declared: int, parsed: int):
        self.order = order
        self.declared = declared
        self.parsed = parsed
        super().__init__(
            f"{order}-gram count mismatch: header declares {declared}, body has {parsed}"
        )


class BadRecord(BiasdecError):
    def __init__(self, line_no: int, message: str):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}")


# --- biasing trie ---

class EmptyWord(BiasdecError):
    pass


# --- decoder ---

class EmptyBeam(BiasdecError):
    pass


# --- metrics ---

class BaseZero(BiasdecError):
    pass


class EmptyCorpus(BiasdecError):
    pass


# --- synthetic corpus ---

class SymbolOutOfAlphabet(BiasdecError):
    pass
