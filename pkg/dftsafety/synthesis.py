"""
Synthesis of the complete DFT of a system from its block diagram, task
structure, E/E architecture and hardware assignment.

The result has three layers: the system layer (tasks and paths over block
roots), the block layer (one fault tree per function block, wired along the
channels by FDEPs) and the hardware layer (one fault tree per platform and
fallible bus, forwarding its failure into the blocks it hosts and activated
together with them).
"""

from __future__ import annotations

import logging
from typing import Dict, List, Mapping, Optional

import networkx as nx

from dftsafety.errors import (
    AmbiguousBusError,
    ChannelMismatchError,
    InconsistentAssignmentError,
    MissingBlockFTError,
    MissingHardwareFTError,
    NoConnectingBusError,
    ScenarioError,
    SpareModuleOverlapError,
    UnknownBlockReferenceError,
    ValidationError,
)
from dftsafety.models.dft import BasicEvent, Dependency, Dft, Gate
from dftsafety.models.enums import BlockTemplateKind, DependencyKind, GateKind, RedundancyMode
from dftsafety.models.expressions import ONE, RateExpression
from dftsafety.models.scenario import (
    Block,
    BlockDiagram,
    BlockFaultTree,
    Channel,
    EEArchitecture,
    HardwareAssignment,
    HardwareTemplate,
    Scenario,
    TaskSpec,
    channel_name,
    internal_bus,
)
from dftsafety.semantics import module_closure, structure_graph, validate

logger = logging.getLogger(__name__)

FAULT_CLASSES = ("transient", "permanent")


def _event(element_id: str, rate: RateExpression, dormancy: float = 1.0, transient=False):
    """A basic event, or a dummy one if its rate is the zero expression."""
    if rate.is_zero():
        return BasicEvent.dummy_event(element_id)
    return BasicEvent(element_id, rate, dormancy, transient=transient)


def _merge(target: Dft, fragment: Dft):
    for element in fragment.elements.values():
        target.add(element)
    for name, value in fragment.parameters.items():
        target.parameters.setdefault(name, value)


def block_fault_tree(
    block: Block, diagram: BlockDiagram, dormancy: Optional[float] = None
) -> BlockFaultTree:
    """
    Builds the fault tree of `block` from its template. Every element id is
    prefixed with the block id; the root is the block id itself. `dormancy`
    applies to the internal fault unless the block fixes its own.
    """
    if block.template == BlockTemplateKind.Custom:
        return _custom_fault_tree(block, diagram)
    b = block.id
    sources = diagram.inputs(b)
    inputs = {(s, b): "{}.in_{}".format(b, s) for s in sources}
    outputs = {(b, t): b for t in diagram.outputs(b)}
    hardware = "{}.hw".format(b)
    if block.dormancy is not None:
        dormancy = block.dormancy
    elif dormancy is None:
        dormancy = 1.0
    elements = [
        BasicEvent.dummy_event(hardware),
        _event("{}.intern".format(b), block.rate, dormancy),
    ]
    elements.extend(BasicEvent.dummy_event(i) for i in inputs.values())
    children = [hardware, "{}.intern".format(b)]
    input_ids = list(inputs.values())
    if block.template == BlockTemplateKind.Standard:
        if input_ids:
            elements.append(Gate("{}.input".format(b), GateKind.Or, input_ids))
            children.append("{}.input".format(b))
    elif block.template == BlockTemplateKind.Voter:
        if block.threshold < 1 or block.threshold > len(input_ids):
            raise ScenarioError(
                "Voter threshold {} needs between 1 and {} inputs".format(
                    block.threshold, len(input_ids)
                ),
                b,
            )
        elements.append(Gate("{}.input".format(b), GateKind.Vot, input_ids, block.threshold))
        children.append("{}.input".format(b))
    elif block.template == BlockTemplateKind.Switch:
        if len(input_ids) < 2:
            raise ScenarioError("A switch needs a primary and a backup input", b)
        switching = "{}.switching".format(b)
        elements.append(_event(switching, block.switching_rate, dormancy))
        elements.append(Gate("{}.wrong_path".format(b), GateKind.Pand, [switching, input_ids[0]]))
        elements.append(Gate("{}.input".format(b), GateKind.And, input_ids))
        children.extend(["{}.wrong_path".format(b), "{}.input".format(b)])
    elements.append(Gate(b, GateKind.Or, children))
    return BlockFaultTree(Dft(elements, top=b), inputs, outputs, hardware)


def _custom_fault_tree(block: Block, diagram: BlockDiagram) -> BlockFaultTree:
    b = block.id
    fragment = block.fragment
    if fragment is None or fragment.top is None:
        raise ScenarioError("Custom block needs a fragment with a top-level event", b)

    def rename(element_id: str) -> str:
        if element_id == fragment.top:
            return b
        if element_id not in fragment:
            raise ChannelMismatchError(
                b, "Custom block refers to unknown element {}".format(element_id)
            )
        return "{}.{}".format(b, element_id)

    tree = Dft(top=b, parameters=fragment.parameters)
    for element in fragment.elements.values():
        if isinstance(element, BasicEvent):
            tree.add(
                BasicEvent(
                    rename(element.id),
                    element.rate,
                    element.dormancy,
                    element.transient,
                    element.dummy,
                )
            )
        elif isinstance(element, Gate):
            children = [rename(c) for c in element.children]
            tree.add(Gate(rename(element.id), element.kind, children, element.threshold))
        else:
            targets = [rename(t) for t in element.targets]
            trigger = rename(element.trigger)
            tree.add(Dependency(rename(element.id), element.kind, trigger, targets))
    if len(fragment.labels):
        logger.warning("Ignoring labels of the fragment of custom block %s", b)

    sources = diagram.inputs(b)
    targets = diagram.outputs(b)
    for source in block.inputs:
        if source not in sources:
            raise ChannelMismatchError(channel_name((source, b)), "No such input channel")
    for target in block.outputs:
        if target not in targets:
            raise ChannelMismatchError(channel_name((b, target)), "No such output channel")
    inputs = {}
    for source in sources:
        if source not in block.inputs:
            raise ChannelMismatchError(channel_name((source, b)))
        inputs[(source, b)] = rename(block.inputs[source])
    outputs = {(b, t): rename(block.outputs.get(t, fragment.top)) for t in targets}
    if block.hardware is None:
        raise ScenarioError("Custom block needs a hardware-fault element", b)
    return BlockFaultTree(tree, inputs, outputs, rename(block.hardware))


def connect_blocks(diagram: BlockDiagram, block_fts: Mapping[str, BlockFaultTree]) -> Dft:
    """
    The disjoint union of all block fault trees plus one FDEP per channel,
    from the source's output failure to the target's input fault. The result
    has no top-level event yet.
    """
    connected = Dft()
    for block in diagram.blocks:
        if block not in block_fts:
            raise MissingBlockFTError(block)
        _merge(connected, block_fts[block].tree)
    for channel in diagram.channels:
        source, target = channel
        output = block_fts[source].outputs.get(channel)
        if output is None:
            raise ChannelMismatchError(
                channel_name(channel), "Channel not an output of its source"
            )
        input_fault = block_fts[target].inputs.get(channel)
        if input_fault is None:
            raise ChannelMismatchError(channel_name(channel), "Channel not an input of its target")
        connected.add(
            Dependency(
                "fdep.{}.{}".format(source, target), DependencyKind.Fdep, output, [input_fault]
            )
        )
    logger.debug("Connected %d blocks along %d channels", len(block_fts), len(diagram.channels))
    return connected


def build_system_layer(tasks: TaskSpec, connected: Dft) -> Dft:
    """
    Adds paths, tasks and the top-level OR over all tasks on top of the
    connected block fault trees.
    """
    system = connected.copy()
    task_elements = []
    for task in tasks.tasks:
        path_elements = []
        for index, path in enumerate(task.paths):
            for block in path.blocks:
                if block not in system:
                    raise UnknownBlockReferenceError(block)
            if len(path.blocks) == 1 and path.name is None:
                path_elements.append(path.blocks[0])
                continue
            path_id = task.path_id(index)
            system.add(Gate(path_id, GateKind.Or, list(dict.fromkeys(path.blocks))))
            path_elements.append(path_id)
        if not path_elements:
            raise ScenarioError("Task has no paths", task.id)
        if task.mode.standby:
            _check_independent(task.id, system, path_elements)
        if len(path_elements) == 1:
            task_elements.append(path_elements[0])
            continue
        kind = GateKind.Spare if task.mode.standby else GateKind.And
        system.add(Gate(task.id, kind, path_elements))
        task_elements.append(task.id)
    system.add(Gate(tasks.top, GateKind.Or, list(dict.fromkeys(task_elements))))
    system.top = tasks.top
    return system


def _check_independent(task: str, dft: Dft, roots: List[str]):
    graph = structure_graph(dft)
    seen: Dict[str, str] = {}
    for root in roots:
        for element in sorted(module_closure(graph, root)):
            if element in seen:
                raise SpareModuleOverlapError(task, element)
            seen[element] = root


def instantiate_hardware_ft(template: HardwareTemplate, platform: str) -> Dft:
    """
    The fault tree of one platform or bus: it fails by a transient or a
    permanent fault. Each fault class fails either uncovered, or covered
    after the safety mechanism has already failed; the SEQ makes the covered
    fault possible only then. Transient leaves carry the transient flag.
    """
    if template.infallible:
        return Dft([BasicEvent.dummy_event(platform)], top=platform)
    p = platform
    dormancy = template.dormancy
    safety_mechanism = "{}.sm".format(p)
    elements = [_event(safety_mechanism, template.safety_mechanism, dormancy)]
    for fault_class in FAULT_CLASSES:
        rate = getattr(template, fault_class)
        coverage = template.coverage[fault_class]
        transient = fault_class == "transient"
        prefix = "{}.{}".format(p, fault_class)
        uncovered = _event(prefix + ".uncovered", (ONE - coverage) * rate, dormancy, transient)
        covered = _event(prefix + ".covered", coverage * rate, dormancy, transient)
        elements.extend([uncovered, covered])
        elements.append(Gate(prefix + ".detected", GateKind.And, [safety_mechanism, covered.id]))
        elements.append(Gate(prefix + ".seq", GateKind.Seq, [safety_mechanism, covered.id]))
        elements.append(Gate(prefix, GateKind.Or, [uncovered.id, prefix + ".detected"]))
    elements.append(Gate(p, GateKind.Or, [p + "." + c for c in FAULT_CLASSES]))
    return Dft(elements, top=p)


def derive_channel_assignment(
    block_map: Mapping[str, str],
    diagram: BlockDiagram,
    architecture: EEArchitecture,
    explicit: Optional[Mapping[Channel, str]] = None,
) -> HardwareAssignment:
    """
    Maps every channel onto a bus: the internal bus if both blocks share a
    platform, else the unique bus connecting the two platforms. Explicit
    choices are checked instead of derived.
    """
    explicit = dict(explicit or {})
    for block in diagram.blocks:
        if block not in block_map:
            raise InconsistentAssignmentError(block, "Block is not assigned to a platform")
    for block, platform in block_map.items():
        if block not in diagram.blocks:
            raise UnknownBlockReferenceError(block)
        if platform not in architecture.platforms:
            raise InconsistentAssignmentError(block, "Unknown platform {}".format(platform))
    channel_map = {}
    for channel in diagram.channels:
        source, target = (block_map[b] for b in channel)
        if channel in explicit:
            bus = explicit.pop(channel)
            if not architecture.connects(bus, source, target):
                raise InconsistentAssignmentError(
                    channel_name(channel),
                    "Bus {} does not connect {} to {}".format(bus, source, target),
                )
            channel_map[channel] = bus
            continue
        candidates = architecture.buses_between(source, target)
        if not candidates:
            raise NoConnectingBusError(channel_name(channel))
        if len(candidates) > 1:
            raise AmbiguousBusError(channel_name(channel), candidates)
        channel_map[channel] = candidates[0]
    for channel in explicit:
        raise InconsistentAssignmentError(channel_name(channel), "Assigned channel does not exist")
    return HardwareAssignment(block_map, channel_map)


def _activation_roots(hardware_ft: Dft) -> List[str]:
    """The root plus the parentless gates (the SEQs) of a hardware fault tree."""
    children = {c for g in hardware_ft.gates for c in g.children}
    orphans = [g.id for g in hardware_ft.gates if g.id not in children and g.id != hardware_ft.top]
    return [hardware_ft.top] + orphans


def _infallible(hardware_ft: Dft) -> bool:
    root = hardware_ft.elements.get(hardware_ft.top)
    return isinstance(root, BasicEvent) and root.dummy


def assemble_complete(
    system: Dft,
    hardware_fts: Mapping[str, Dft],
    assignment: HardwareAssignment,
    block_fts: Mapping[str, BlockFaultTree],
) -> Dft:
    """
    Adds the hardware layer: per block an FDEP from its platform's fault tree
    to the block's hardware fault and an ADEP from the block root to the
    platform; per channel on a fallible bus an FDEP from the bus fault tree to
    the target's input fault. Internal buses without a fault tree are
    infallible and get no FDEP.
    """
    complete = system.copy()
    merged = set()

    def hardware_root(hardware: str) -> str:
        if hardware not in hardware_fts:
            raise MissingHardwareFTError(hardware)
        if hardware not in merged:
            merged.add(hardware)
            _merge(complete, hardware_fts[hardware])
        return hardware_fts[hardware].top

    for block, block_ft in block_fts.items():
        platform = assignment.block_map.get(block)
        if platform is None:
            raise InconsistentAssignmentError(block, "Block is not assigned to a platform")
        root = hardware_root(platform)
        complete.add(
            Dependency("fdep.hw.{}".format(block), DependencyKind.Fdep, root, [block_ft.hardware])
        )
        activated = _activation_roots(hardware_fts[platform])
        complete.add(
            Dependency("adep.{}".format(block), DependencyKind.Adep, block_ft.root, activated)
        )

    bus_fdeps = 0
    for block_ft in block_fts.values():
        for channel, input_fault in block_ft.inputs.items():
            bus = assignment.channel_map.get(channel)
            if bus is None:
                raise InconsistentAssignmentError(channel_name(channel), "Channel has no bus")
            platform = assignment.block_map.get(channel[0])
            if bus == internal_bus(platform) and bus not in hardware_fts:
                continue
            if bus in hardware_fts and _infallible(hardware_fts[bus]):
                continue
            root = hardware_root(bus)
            complete.add(
                Dependency(
                    "fdep.bus.{}.{}".format(*channel), DependencyKind.Fdep, root, [input_fault]
                )
            )
            bus_fdeps += 1
    logger.info(
        "Hardware layer: %d hardware fault trees, %d blocks, %d bus dependencies",
        len(merged),
        len(block_fts),
        bus_fdeps,
    )
    return complete


def _backup_input(diagram: BlockDiagram, channel: Channel) -> bool:
    source, target = channel
    if diagram.blocks[target].template != BlockTemplateKind.Switch:
        return False
    return diagram.inputs(target)[0] != source


def _task_dormancies(scenario: Scenario) -> Dict[str, float]:
    """
    Internal dormancy of the blocks that only serve standby paths: 0 in cold
    paths, the task's dormancy in warm ones, the largest if standby paths
    share a block. Blocks of running paths and every block feeding them
    through channels keep their own dormancy; a switch reads its backup
    inputs only after switching, so those channels do not count.
    """
    diagram = scenario.diagram
    channels = nx.DiGraph()
    channels.add_nodes_from(diagram.blocks)
    channels.add_edges_from(c for c in diagram.channels if not _backup_input(diagram, c))
    running = set()
    standby: Dict[str, float] = {}
    for task in scenario.tasks.tasks:
        if not task.mode.standby:
            for path in task.paths:
                running.update(path.blocks)
            continue
        running.update(task.paths[0].blocks)
        dormancy = 0.0 if task.mode == RedundancyMode.Cold else task.dormancy
        for path in task.paths[1:]:
            for block in path.blocks:
                standby[block] = max(standby.get(block, dormancy), dormancy)
    for block in list(running):
        running |= nx.ancestors(channels, block)
    for block in sorted(set(standby) & running):
        logger.debug("%s feeds a running path and is not dormant", block)
    return {b: d for b, d in standby.items() if b not in running}


def synthesize(scenario: Scenario) -> Dft:
    """
    Builds and validates the complete DFT of a scenario. Raises the
    `ScenarioError` family for inconsistent scenarios and `ValidationError`
    if the result is not well-formed.
    """
    diagram = scenario.diagram
    dormancies = _task_dormancies(scenario)
    block_fts = {
        b: block_fault_tree(block, diagram, dormancies.get(b))
        for b, block in diagram.blocks.items()
    }
    connected = connect_blocks(diagram, block_fts)
    system = build_system_layer(scenario.tasks, connected)
    assignment = derive_channel_assignment(
        scenario.block_map, diagram, scenario.architecture, scenario.channel_map
    )
    used = list(dict.fromkeys(assignment.block_map[b] for b in diagram.blocks))
    used.extend(bus for bus in dict.fromkeys(assignment.channel_map.values()) if bus not in used)
    hardware_fts = {}
    for hardware in used:
        template = scenario.hardware.get(hardware)
        if template is None:
            if hardware in scenario.architecture.platforms:
                raise MissingHardwareFTError(hardware)
            if not hardware.endswith(".intern"):
                raise MissingHardwareFTError(hardware)
            continue
        hardware_fts[hardware] = instantiate_hardware_ft(template, hardware)
    complete = assemble_complete(system, hardware_fts, assignment, block_fts)
    for name, value in scenario.parameters.items():
        complete.parameters[name] = value
    complete.labels = scenario.labels
    diagnostics = validate(complete)
    if diagnostics:
        raise ValidationError(diagnostics)
    logger.info(
        "Synthesised DFT: %d elements (%d basic events) from %d blocks",
        len(complete),
        len(complete.basic_events),
        len(diagram.blocks),
    )
    return complete
