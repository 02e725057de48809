"""Exception types shared across the package."""


class RaingenError(Exception):
    """Base class for all raingen errors."""


class CsvFormatError(RaingenError):
    """An input CSV could not be parsed into a monthly series."""


class SeriesValidationError(RaingenError):
    """A series violates a hard validity requirement."""


class FitError(RaingenError):
    """Model estimation could not produce a usable model."""


class PipelineError(RaingenError):
    """A pipeline stage failed; :attr:`stage` names the stage."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage
