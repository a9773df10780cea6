"""Exception types shared across the package."""


class LlmLimitsError(Exception):
    """Base class for all domain errors."""


class UnknownNameError(LlmLimitsError, KeyError):
    """Requested a builtin model/chip that does not exist."""

    def __init__(self, kind: str, name: str, valid: list[str]):
        self.kind = kind
        self.name = name
        self.valid = sorted(valid)
        super().__init__(f"unknown {kind} {name!r}; valid names: {', '.join(self.valid)}")

    def __str__(self) -> str:  # KeyError would repr() the message otherwise
        return self.args[0]


class WrongArchitectureError(LlmLimitsError, ValueError):
    """Model routed to the wrong workload path (dense vs MLA/MoE)."""


class DomainError(LlmLimitsError, ValueError):
    """Argument outside its valid domain (e.g. imbalance factor < 1)."""


class ConstraintError(LlmLimitsError, ValueError):
    """System composition violates a mapping constraint."""


class InfeasibleError(LlmLimitsError):
    """Deployment cannot fit on the system; carries the violated constraint."""

    def __init__(self, reason: str):
        self.reason = reason
        super().__init__(reason)


class ConfigError(LlmLimitsError, ValueError):
    """Config file failed validation; message identifies the offending field."""
