"""Exception types shared across the package.

Exit-code mapping used by the CLI: validation failures are reported as data
(lists of violations), PreconditionError maps to exit code 2 and
ResourceCapError to exit code 3.
"""


class ForgeError(Exception):
    pass


class PreconditionError(ForgeError):
    """An operation was called outside its contract."""


class NotDecomposableError(ForgeError):
    """An inclusion admits no factorization into elementary attachments."""


class ResourceCapError(ForgeError):
    """A construction exceeded its configured size budget."""
