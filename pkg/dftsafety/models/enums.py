from enum import Enum


class GateKind(Enum):
    """
    The kinds of gates a DFT may contain. Values are the keywords of the
    text format.
    """

    And = "and"
    Or = "or"
    Vot = "vot"
    Pand = "pand"
    Seq = "seq"
    Spare = "wsp"


class DependencyKind(Enum):
    """Functional (failure-forwarding) or activation dependency."""

    Fdep = "fdep"
    Adep = "adep"


class RedundancyMode(Enum):
    """
    How the paths of a task are combined: all paths must fail (AND, also
    written `hot`), or standby paths take over left to right (SPARE).
    """

    And = "and"
    Hot = "hot"
    Cold = "cold"
    Warm = "warm"

    @property
    def standby(self) -> bool:
        return self in (RedundancyMode.Cold, RedundancyMode.Warm)


class BlockTemplateKind(Enum):
    """Built-in block fault tree templates."""

    Standard = "standard"
    Voter = "voter"
    Switch = "switch"
    Custom = "custom"


class Measure(Enum):
    """
    Safety measures that can be evaluated on a CTMC.

    Probability measures report a complement; AFH, MTTF and MTDF do not.
    """

    Reliability = "reliability"
    Unreliability = "unreliability"
    Afh = "afh"
    Mttf = "mttf"
    Ffa = "ffa"
    Fwd = "fwd"
    Mtdf = "mtdf"
    Mdr = "mdr"
    Flod = "flod"
    Silfo = "silfo"

    @property
    def is_probability(self) -> bool:
        return self not in (Measure.Afh, Measure.Mttf, Measure.Mtdf)


class ExportFormat(Enum):
    """Output formats of `emit_results`."""

    Csv = "csv"
    Dot = "dot"
    TransitionList = "list"
