"""Exception hierarchy shared by every module."""


class NetficError(Exception):
    """Base class for all errors raised by netfic."""


class UnknownBlock(NetficError, KeyError):
    def __init__(self, name: str):
        super().__init__(name)
        self.name = name

    def __str__(self) -> str:
        return f"unknown block {self.name!r}"


class WidthMismatch(NetficError, ValueError):
    pass


class DomainViolation(NetficError, ValueError):
    pass


class CapExceeded(NetficError):
    def __init__(self, size: int, cap: int):
        super().__init__(f"domain of size {size} exceeds enumeration cap {cap}")
        self.size = size
        self.cap = cap


class CycleDetected(NetficError):
    def __init__(self, edges):
        self.edges = tuple(edges)
        super().__init__(f"cycle through edges {', '.join(self.edges)}")


class MissingKernel(NetficError, KeyError):
    def __str__(self) -> str:
        return f"no local kernel for edge {self.args[0]!r}"


class MissingDecoder(NetficError, KeyError):
    def __str__(self) -> str:
        return f"no decoder for {self.args[0]!r}"


class LengthMismatch(NetficError, ValueError):
    pass


class TableTooLarge(NetficError, ValueError):
    pass


class InvalidProblem(NetficError, ValueError):
    """A problem failed structural validation; ``findings`` lists why."""

    def __init__(self, findings):
        self.findings = list(findings)
        super().__init__("; ".join(str(f) for f in self.findings))


class InstanceSyntaxError(NetficError, ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


class InstanceSemanticError(NetficError, ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
