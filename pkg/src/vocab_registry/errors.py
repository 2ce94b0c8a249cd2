"""Domain error hierarchy.

Every error carries a stable ``code`` string that the HTTP layer maps to a
status and that tests assert against.  Codes are the operation-level error
names (``TokenTaken``, ``VersionConflict``, ...), not HTTP concepts.
"""

from __future__ import annotations


class RegistryError(Exception):
    code = "RegistryError"

    def __init__(self, message: str = "", **details):
        super().__init__(message or self.code)
        self.message = message or self.code
        self.details = details

    def __str__(self) -> str:
        return self.message


def _error(name: str, base: type = RegistryError) -> type:
    return type(name, (base,), {"code": name})


# Lookups that failed.
UnknownAgent = _error("UnknownAgent")
UnknownScheme = _error("UnknownScheme")
UnknownConcept = _error("UnknownConcept")
UnknownVersion = _error("UnknownVersion")
UnknownFormat = _error("UnknownFormat")
UnknownToken = _error("UnknownToken")
UnknownSubscription = _error("UnknownSubscription")

# Bad input.
EmptyName = _error("EmptyName")
NoContacts = _error("NoContacts")
BadToken = _error("BadToken")
BadStrategy = _error("BadStrategy")
BadUri = _error("BadUri")
MissingLabelForSlug = _error("MissingLabelForSlug")
EmptyEdits = _error("EmptyEdits")
EmptyItems = _error("EmptyItems")
EmptyBatch = _error("EmptyBatch")
TooFewDrafts = _error("TooFewDrafts")
TooFewSources = _error("TooFewSources")
UriMismatch = _error("UriMismatch")
BadHeader = _error("BadHeader")

# State conflicts.
TokenTaken = _error("TokenTaken")
DuplicateUri = _error("DuplicateUri")
Deprecated = _error("Deprecated")
AlreadyDeprecated = _error("AlreadyDeprecated")
DeprecatedIsTerminal = _error("DeprecatedIsTerminal")
TokenUsed = _error("TokenUsed")
TokenExpired = _error("TokenExpired")

# Permissions.
NotOwner = _error("NotOwner")
NotMaintainer = _error("NotMaintainer")
Unauthenticated = _error("Unauthenticated")

# Store.
IoFailure = _error("IoFailure")
DataDirLocked = _error("DataDirLocked")


class VersionConflict(RegistryError):
    code = "VersionConflict"

    def __init__(self, expected: int, actual: int):
        super().__init__(
            f"expected version {expected} but head is {actual}",
            expected=expected,
            actual=actual,
        )
        self.expected = expected
        self.actual = actual


class CorruptRecord(RegistryError):
    code = "CorruptRecord"

    def __init__(self, version: int, message: str = ""):
        super().__init__(message or f"corrupt log record at version {version}", version=version)
        self.version = version


class ValidationFailed(RegistryError):
    """Carries the violated rule ids and the full violation list."""

    code = "ValidationFailed"

    def __init__(self, violations):
        self.violations = list(violations)
        self.rules = sorted({v.rule for v in self.violations})
        super().__init__(
            "validation failed: " + ", ".join(self.rules),
            rules=self.rules,
        )


class BadRow(RegistryError):
    code = "BadRow"

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}", line=line)
        self.line = line


class ParseFailed(RegistryError):
    code = "ParseFailed"

    def __init__(self, errors):
        self.errors = list(errors)
        first = f"line {self.errors[0][0]}: {self.errors[0][1]}" if self.errors else ""
        super().__init__(f"payload did not parse: {first}", errors=self.errors)


MintFailed = _error("MintFailed")
NoScheme = _error("NoScheme")
MultipleSchemes = _error("MultipleSchemes")
PeerUnreachable = _error("PeerUnreachable")
ProtocolError = _error("ProtocolError")
