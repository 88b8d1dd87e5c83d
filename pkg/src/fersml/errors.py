"""Exception hierarchy shared by the fersml modules."""


class FersmlError(Exception):
    """Base class for every error raised by this package."""


class EmptyTable(FersmlError, ValueError):
    """Interpolation was requested on a probability table with no entries."""


class UnknownFactorName(FersmlError, KeyError):
    def __init__(self, name):
        super().__init__(name)
        self.name = name

    def __str__(self):
        return f"factor {self.name!r} does not name a skill"


class LineupError(FersmlError):
    """The starting team cannot be resolved for a formation."""


class UnresolvedPlayer(LineupError):
    def __init__(self, player_id, formation_name=None):
        super().__init__(player_id, formation_name)
        self.player_id = player_id
        self.formation_name = formation_name

    def __str__(self):
        return (f"no starting_team entry applies to player_id {self.player_id} "
                f"in formation {self.formation_name!r}")


class AmbiguousEntry(LineupError):
    def __init__(self, player_id, formation_name=None):
        super().__init__(player_id, formation_name)
        self.player_id = player_id
        self.formation_name = formation_name

    def __str__(self):
        return (f"several starting_team entries apply to player_id {self.player_id} "
                f"in formation {self.formation_name!r}")


class FormationError(FersmlError):
    """A formation cannot be used by the match engine."""


class WrongPlayerCount(FormationError):
    def __init__(self, name, count):
        super().__init__(name, count)
        self.name = name
        self.count = count

    def __str__(self):
        return f"formation {self.name!r} has {self.count} positions, the engine needs 10"


class OutOfBounds(FersmlError, IndexError):
    """A coordinate lies outside the 1024 x 640 pitch."""


class BadNormalizer(FersmlError, ValueError):
    """Magnitude colouring got N <= 0 or n > N."""


class TooFewValues(FersmlError, ValueError):
    """Descriptive statistics need at least two values."""


class EmptySample(FersmlError, ValueError):
    """A hypothesis test was handed an empty sample."""


class InvalidDocument(FersmlError, ValueError):
    """A document failed validation where a valid one was required."""

    def __init__(self, findings):
        self.findings = list(findings)
        super().__init__("; ".join(str(f) for f in self.findings) or "invalid document")
