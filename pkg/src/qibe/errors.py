"""Exception hierarchy shared across the package.

The CLI maps these onto its exit-code table, so raising the right class
matters more than the message text.
"""


class QibeError(Exception):
    """Base class for all package errors."""


class InvalidInputError(QibeError):
    """Bad parameters, malformed files, or out-of-domain values (exit 2)."""


class ContractError(QibeError):
    """A defining algebraic contract failed, e.g. A*R != H(id) (exit 3)."""


class DecryptionError(QibeError):
    """Decryption could not disentangle the message register (exit 4)."""


class EntangledRegisterError(QibeError):
    """A register marginal was requested while other registers still vary."""


class FrameError(QibeError):
    """Malformed, truncated, or unknown handshake frame (exit 5)."""


class HandshakeError(QibeError):
    """Protocol-level handshake failure, e.g. key-hash mismatch (exit 6)."""
