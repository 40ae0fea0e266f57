"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """A run configuration is inconsistent (bad field, unclosed sector, ...)."""


class ProtocolFailure(RuntimeError):
    """The conditioned branch has vanishing probability; the run must restart."""

    def __init__(self, probability: float, step: int | None = None):
        self.probability = probability
        self.step = step
        where = f" at step {step}" if step is not None else ""
        super().__init__(
            f"conditional branch probability {probability:.3e}{where} "
            "is below threshold; the procedure must be started over"
        )
