"""Global limits and protocol constants."""

import os
from dataclasses import dataclass, replace

DEFAULT_DENSE_CAP = 12


class CapacityError(ValueError):
    """Raised when a dense operation is requested above the qubit cap."""


def dense_cap() -> int:
    """Largest n for dense simulation; ``HAMPROBE_DENSE_CAP`` overrides."""
    raw = os.environ.get("HAMPROBE_DENSE_CAP")
    return int(raw) if raw else DEFAULT_DENSE_CAP


def check_dense(n: int) -> None:
    cap = dense_cap()
    if n > cap:
        raise CapacityError(f"n={n} exceeds the dense-simulation cap {cap}")


@dataclass(frozen=True)
class ProtocolConfig:
    """Constants that instantiate the big-O budgets.

    ``c_t=None`` means each protocol uses its own default evolution-time
    constant (1/3 for the sparsity testers, 1/2 for the sparse learner).
    """

    c_T: float = 1.0
    c_t: float | None = None
    c_taylor: float = 1.0
    C_BH: float = 2.0
    max_shots: int = 10**15

    def with_(self, **kw) -> "ProtocolConfig":
        return replace(self, **kw)


DEFAULT_CONFIG = ProtocolConfig()
