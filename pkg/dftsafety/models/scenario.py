from __future__ import annotations

from typing import Dict, List, Mapping, Optional, Set, Tuple

import networkx as nx

from dftsafety.errors import ScenarioError, UnknownBlockReferenceError
from dftsafety.models.dft import Dft, LabelSpec
from dftsafety.models.enums import BlockTemplateKind, RedundancyMode
from dftsafety.models.expressions import ZERO, RateExpression
from dftsafety.models.utilities import _classname

Channel = Tuple[str, str]
"""A directed channel `(source block, target block)`."""


def channel_name(channel: Channel) -> str:
    return "{}->{}".format(*channel)


def internal_bus(platform: str) -> str:
    """Id of the implicit internal bus of a platform."""
    return "{}.intern".format(platform)


class Block(object):
    """A function block and the template its fault tree is built from."""

    id: str
    template: BlockTemplateKind
    rate: RateExpression
    """Rate of the block's internal fault; zero makes it a dummy event."""
    dormancy: Optional[float]
    """Dormancy of the internal fault; None lets the task structure decide."""
    threshold: int
    """Number of faulty inputs failing a voter block."""
    switching_rate: RateExpression
    """Failure rate of a switch block's switching mechanism."""
    fragment: Optional[Dft]
    """The fault tree of a custom block, with block-local ids."""
    inputs: Dict[str, str]
    """Custom blocks: source block -> input-fault element of the fragment."""
    outputs: Dict[str, str]
    """Custom blocks: target block -> output element (the root by default)."""
    hardware: Optional[str]
    """Custom blocks: the hardware-fault element of the fragment."""

    def __init__(
        self,
        id: str,
        template: BlockTemplateKind = BlockTemplateKind.Standard,
        rate: RateExpression = ZERO,
        dormancy: Optional[float] = None,
        threshold: int = 2,
        switching_rate: RateExpression = ZERO,
        fragment: Optional[Dft] = None,
        inputs: Optional[Mapping[str, str]] = None,
        outputs: Optional[Mapping[str, str]] = None,
        hardware: Optional[str] = None,
    ):
        self.id = id
        self.template = template
        self.rate = rate
        self.dormancy = dormancy
        self.threshold = threshold
        self.switching_rate = switching_rate
        self.fragment = fragment
        self.inputs = dict(inputs or {})
        self.outputs = dict(outputs or {})
        self.hardware = hardware

    def __repr__(self) -> str:
        return "{}({}, {}, rate={})".format(
            _classname(self), repr(self.id), self.template, repr(str(self.rate))
        )


class BlockDiagram(object):
    """Function blocks connected by directed channels; cycles are allowed."""

    blocks: Dict[str, Block]
    channels: List[Channel]

    def __init__(self, blocks: List[Block], channels: List[Channel]):
        self.blocks = {b.id: b for b in blocks}
        self.channels = list(channels)
        for source, target in self.channels:
            for endpoint in (source, target):
                if endpoint not in self.blocks:
                    raise UnknownBlockReferenceError(endpoint)

    def inputs(self, block: str) -> List[str]:
        """Source blocks of the channels into `block`, in channel order."""
        return [s for s, t in self.channels if t == block]

    def outputs(self, block: str) -> List[str]:
        return [t for s, t in self.channels if s == block]

    def __repr__(self) -> str:
        return "{}(blocks={}, channels={})".format(
            _classname(self), repr(list(self.blocks)), repr(self.channels)
        )


class BlockFaultTree(object):
    """The fault tree of one block and how its channels attach to it."""

    tree: Dft
    """The fragment; its `top` is the block's failure element."""
    inputs: Dict[Channel, str]
    """Input channel -> dummy input-fault event."""
    outputs: Dict[Channel, str]
    """Output channel -> element whose failure makes the output faulty."""
    hardware: str
    """The dummy event representing failure of the block's hardware."""

    def __init__(
        self,
        tree: Dft,
        inputs: Mapping[Channel, str],
        outputs: Mapping[Channel, str],
        hardware: str,
    ):
        self.tree = tree
        self.inputs = dict(inputs)
        self.outputs = dict(outputs)
        self.hardware = hardware

    @property
    def root(self) -> str:
        return self.tree.top

    def __repr__(self) -> str:
        return "{}(root={}, inputs={}, outputs={}, hardware={})".format(
            _classname(self),
            repr(self.root),
            repr(self.inputs),
            repr(self.outputs),
            repr(self.hardware),
        )


class Path(object):
    """An ordered list of blocks realising a task."""

    blocks: List[str]
    name: Optional[str]
    """Explicit element id of the path; `<task>.p<i>` otherwise."""

    def __init__(self, blocks: List[str], name: Optional[str] = None):
        self.blocks = list(blocks)
        self.name = name

    def __repr__(self) -> str:
        return "{}({}, name={})".format(_classname(self), repr(self.blocks), repr(self.name))


class Task(object):
    """A task fails if all its paths fail (AND) or its standby paths run out (SPARE)."""

    id: str
    mode: RedundancyMode
    paths: List[Path]
    dormancy: float
    """Dormancy of blocks in warm standby paths."""

    def __init__(
        self,
        id: str,
        paths: List[Path],
        mode: RedundancyMode = RedundancyMode.And,
        dormancy: float = 0.5,
    ):
        self.id = id
        self.paths = list(paths)
        self.mode = mode
        self.dormancy = dormancy

    def path_id(self, index: int) -> str:
        path = self.paths[index]
        return path.name or "{}.p{}".format(self.id, index + 1)

    def __repr__(self) -> str:
        return "{}({}, {}, mode={})".format(
            _classname(self), repr(self.id), repr(self.paths), self.mode
        )


class TaskSpec(object):
    """The system fails if any task fails."""

    tasks: List[Task]
    top: str
    """Id of the top-level OR gate."""

    def __init__(self, tasks: List[Task], top: str = "system"):
        self.tasks = list(tasks)
        self.top = top

    def __repr__(self) -> str:
        return "{}({}, top={})".format(_classname(self), repr(self.tasks), repr(self.top))


class EEArchitecture(object):
    """
    Hardware platforms and the buses between them. Each bus is a transitive
    relation over platforms; every platform also has an internal bus
    `<platform>.intern` connecting it to itself.
    """

    platforms: List[str]
    buses: Dict[str, Set[Tuple[str, str]]]
    """Bus id -> the ordered platform pairs it connects."""

    def __init__(
        self,
        platforms: List[str],
        buses: Optional[Mapping[str, Set[Tuple[str, str]]]] = None,
    ):
        self.platforms = list(platforms)
        self.buses = {}
        for bus, pairs in (buses or {}).items():
            self.add_bus(bus, pairs)

    def add_bus(self, bus: str, pairs):
        """Adds a bus connecting `pairs` and everything they imply by transitivity."""
        for pair in pairs:
            for platform in pair:
                if platform not in self.platforms:
                    raise ScenarioError(
                        "Bus {} refers to an unknown platform".format(bus), platform
                    )
        graph = nx.transitive_closure(nx.DiGraph(list(pairs)), reflexive=False)
        self.buses[bus] = set(graph.edges())

    def add_complete_bus(self, bus: str, members: List[str]):
        """Adds a bus connecting every pair of `members`."""
        self.add_bus(bus, [(a, b) for a in members for b in members if a != b])

    def buses_between(self, source: str, target: str) -> List[str]:
        """Buses connecting `source` to `target`; only the internal bus if they coincide."""
        if source == target:
            return [internal_bus(source)]
        return sorted(b for b, pairs in self.buses.items() if (source, target) in pairs)

    def connects(self, bus: str, source: str, target: str) -> bool:
        if source == target:
            return bus == internal_bus(source)
        return (source, target) in self.buses.get(bus, ())

    def __repr__(self) -> str:
        return "{}(platforms={}, buses={})".format(
            _classname(self), repr(self.platforms), repr(sorted(self.buses))
        )


class HardwareAssignment(object):
    """Where blocks run and which bus carries each channel."""

    block_map: Dict[str, str]
    """Block -> platform."""
    channel_map: Dict[Channel, str]
    """Channel -> bus (an internal bus for same-platform channels)."""

    def __init__(self, block_map: Mapping[str, str], channel_map: Mapping[Channel, str]):
        self.block_map = dict(block_map)
        self.channel_map = dict(channel_map)

    def __eq__(self, other) -> bool:
        if isinstance(other, HardwareAssignment):
            return (self.block_map, self.channel_map) == (other.block_map, other.channel_map)
        return False

    def __repr__(self) -> str:
        return "{}({}, {})".format(_classname(self), repr(self.block_map), repr(self.channel_map))


class HardwareTemplate(object):
    """
    Failure model of a platform or bus: transient and permanent faults, each
    partly covered by a safety mechanism.
    """

    transient: RateExpression
    permanent: RateExpression
    safety_mechanism: RateExpression
    coverage: Dict[str, RateExpression]
    """Covered fraction per fault class (`transient`, `permanent`)."""
    dormancy: float
    """Dormancy of the hardware events until the platform is activated."""
    infallible: bool
    """Infallible hardware is represented by a single dummy event."""

    def __init__(
        self,
        transient: RateExpression = ZERO,
        permanent: RateExpression = ZERO,
        safety_mechanism: RateExpression = ZERO,
        coverage: Optional[Mapping[str, RateExpression]] = None,
        dormancy: float = 0.0,
        infallible: bool = False,
    ):
        self.transient = transient
        self.permanent = permanent
        self.safety_mechanism = safety_mechanism
        self.coverage = {"transient": ZERO, "permanent": ZERO}
        self.coverage.update(coverage or {})
        self.dormancy = dormancy
        self.infallible = infallible

    @classmethod
    def infallible_hardware(cls) -> HardwareTemplate:
        return cls(infallible=True)

    def __repr__(self) -> str:
        if self.infallible:
            return "{}(infallible=True)".format(_classname(self))
        return "{}(transient={}, permanent={}, safety_mechanism={}, coverage={})".format(
            _classname(self),
            repr(str(self.transient)),
            repr(str(self.permanent)),
            repr(str(self.safety_mechanism)),
            repr({k: str(v) for k, v in self.coverage.items()}),
        )


class Scenario(object):
    """Everything needed to synthesise the complete DFT of a system."""

    diagram: BlockDiagram
    tasks: TaskSpec
    architecture: EEArchitecture
    block_map: Dict[str, str]
    """Block -> platform."""
    channel_map: Dict[Channel, str]
    """Explicit channel -> bus choices; the rest is derived."""
    hardware: Dict[str, HardwareTemplate]
    """Failure model per platform and per fallible bus."""
    labels: LabelSpec
    parameters: Dict[str, Optional[float]]

    def __init__(
        self,
        diagram: BlockDiagram,
        tasks: TaskSpec,
        architecture: EEArchitecture,
        block_map: Mapping[str, str],
        hardware: Mapping[str, HardwareTemplate],
        channel_map: Optional[Mapping[Channel, str]] = None,
        labels: Optional[LabelSpec] = None,
        parameters: Optional[Mapping[str, Optional[float]]] = None,
    ):
        self.diagram = diagram
        self.tasks = tasks
        self.architecture = architecture
        self.block_map = dict(block_map)
        self.hardware = dict(hardware)
        self.channel_map = dict(channel_map or {})
        self.labels = labels if labels is not None else LabelSpec()
        self.parameters = dict(parameters or {})

    def __repr__(self) -> str:
        return "{}(blocks={}, tasks={}, platforms={})".format(
            _classname(self),
            len(self.diagram.blocks),
            len(self.tasks.tasks),
            len(self.architecture.platforms),
        )
