"""Exception hierarchy shared by the analyzer modules."""


class YamabeSpectraError(Exception):
    """Base class for all errors raised by this package."""


class SpectrumFormatError(YamabeSpectraError, ValueError):
    """A spectrum file could not be parsed, or violates a spectrum invariant."""

    def __init__(self, message, line=None, field=None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)


class ModelError(YamabeSpectraError, ValueError):
    """The two factors do not form an admissible product model."""


class DegeneratePairError(YamabeSpectraError):
    """The pair of factor metrics is degenerate, so J_s is singular for every s."""


class TruncationError(YamabeSpectraError):
    """A factor spectrum is not listed far enough to certify a complete answer."""

    def __init__(self, factor, required, available):
        self.factor = factor
        self.required = required
        self.available = available
        super().__init__(
            f"truncation insufficient for factor {factor!r}: need eigenvalues "
            f"complete up to {required}, spectrum is certified only up to {available}"
        )


class InstantError(YamabeSpectraError, ValueError):
    """The Morse index was requested exactly at a degeneracy instant."""


class InvariantViolation(YamabeSpectraError, AssertionError):
    """An internal consistency identity failed; indicates a bug."""
