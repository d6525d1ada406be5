"""Exception hierarchy shared by every module of the package."""


class MkAbeError(Exception):
    """Base class for all errors raised by mkabe."""


class FormulaSyntaxError(MkAbeError, ValueError):
    def __init__(self, position: int, expected: str, found: str = ""):
        self.position = position
        self.expected = expected
        self.found = found
        got = f", found {found!r}" if found else ", found end of input"
        super().__init__(f"at position {position}: expected {expected}{got}")


class SizeExceeded(MkAbeError, ValueError):
    pass


class FormatError(MkAbeError, ValueError):
    def __init__(self, path: str, message: str):
        self.path = path
        self.message = message
        super().__init__(f"{path}: {message}")


class InvalidParams(MkAbeError, ValueError):
    pass


class GenerationFailure(MkAbeError, RuntimeError):
    pass


class NotSatisfied(MkAbeError):
    """The offered attribute set does not satisfy the access formula."""


class MissingMasterKey(MkAbeError, KeyError):
    def __init__(self, attr: str):
        self.attr = attr
        super().__init__(f"no master key for attribute {attr!r}")

    def __str__(self):
        return self.args[0]


class AttributeMismatch(MkAbeError, ValueError):
    pass


class UnknownAttribute(MkAbeError, KeyError):
    def __init__(self, attr: str):
        self.attr = attr
        super().__init__(f"attribute {attr!r} has no public key")

    def __str__(self):
        return self.args[0]


class DuplicateAttribute(MkAbeError, ValueError):
    pass


class IntegrityFailure(MkAbeError):
    """Decrypted message does not match the ciphertext's integrity tag."""


class ProtocolViolation(MkAbeError):
    """A game adversary broke the rules of the security game."""
