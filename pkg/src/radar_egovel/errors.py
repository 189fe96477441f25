"""Exception hierarchy shared across the package."""


class RadarError(Exception):
    """Base class for every error raised by radar_egovel."""


class ZeroRangeDetection(RadarError, ValueError):
    """A detection sits at the sensor origin and has no direction."""


class InvalidLossSpec(RadarError, ValueError):
    pass


class DegenerateSample(RadarError):
    """A minimal sample whose directions are (nearly) coplanar."""


class NotEnoughDetections(RadarError):
    pass


class NoValidHypothesis(RadarError):
    """Every sampled minimal set was degenerate."""


class RankDeficient(RadarError):
    """The selected directions do not span three dimensions."""


class NonFiniteObjective(RadarError, FloatingPointError):
    pass


class NonMonotonicTimestamp(RadarError, ValueError):
    pass


class OutOfSpan(RadarError, ValueError):
    """Query time falls outside the ground-truth time span."""


class NoPairs(RadarError):
    """No estimate could be paired with ground truth."""


class ParseError(RadarError, ValueError):
    def __init__(self, reason, line=None, source=None):
        self.reason = reason
        self.line = line
        self.source = source
        where = ""
        if source is not None:
            where += f"{source}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {reason}".strip() if where else reason)


class MissingColumn(ParseError):
    def __init__(self, column, source=None):
        self.column = column
        super().__init__(f"missing required column {column!r}", line=1, source=source)


class NonMonotonicScanId(ParseError):
    pass


class ConfigError(RadarError, ValueError):
    def __init__(self, message, key=None):
        self.key = key
        super().__init__(message)
