"""Exception hierarchy.

Every error raised by the library derives from :class:`OhcaError`, so the CLI
can catch one type and report ``type(err).__name__`` as the machine-readable
error name.
"""


class OhcaError(ValueError):
    """Base class for all library errors."""


class EmptyTrace(OhcaError):
    pass


class DegenerateTraffic(OhcaError):
    pass


class ZeroPacketCount(OhcaError):
    def __init__(self, station: int):
        super().__init__(f"station {station} has zero packet count")
        self.station = station


class DimensionMismatch(OhcaError):
    pass


class InfeasibleMinimum(OhcaError):
    pass


class SeriesExceedsBudget(OhcaError):
    pass


class NoFeasibleL(OhcaError):
    pass


class NoAdmissibleSeries(OhcaError):
    pass


class CaseInapplicable(OhcaError):
    pass


class ZeroProbability(OhcaError):
    pass


class UnknownStrategy(OhcaError):
    pass


class EncodingError(OhcaError):
    pass


class EmptyDataset(OhcaError):
    pass
