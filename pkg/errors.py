"""
Exception types shared across ratdyn modules
"""


class RatdynError(Exception):
    """Base class for all ratdyn failures"""


class ParameterError(RatdynError, ValueError):
    """Inadmissible parameters or a call outside the branch an operation covers"""


class DomainError(RatdynError, ValueError):
    """A map evaluation left the state space"""

    def __init__(self, message: str, index: int = -1):
        super().__init__(message if index < 0 else f"{message} (at step {index})")
        self.index = index


class PolycoreError(RatdynError):
    """Exact algebra misuse: mismatched variable tables, zero denominators"""


class CertificateRefuted(RatdynError):
    """A certificate came back Refuted; the CLI maps it to exit code 3"""

    def __init__(self, claim: str, witness: str):
        super().__init__(f"certificate {claim} refuted, witness term {witness}")
        self.claim = claim
        self.witness = witness
