"""
Reading scenario documents (YAML).

    parameters: {lambda_s: 1.0e-7}
    blocks:
      Camera: {rate: lambda_s}
      Radar: {rate: lambda_s}
      Fusion: {template: voter, threshold: 1}
      Planner: {}
    channels: [[Camera, Fusion], [Radar, Fusion], "Fusion -> Planner"]
    tasks:
      driving: {mode: cold, paths: [[Fusion, Planner], {name: fallback, blocks: [Radar]}]}
    architecture:
      platforms: {ECU1: ecu, ADAS1: adas}
      buses: {CAN: {members: [ECU1, ADAS1], hardware: can}}
    hardware:
      ecu: {permanent: 1.0e-7}
      adas: {transient: 1.0e-4, permanent: 1.0e-5, safety_mechanism: 1.0e-5, coverage: 0.99}
      can: {permanent: 1.0e-7}
    assignment:
      blocks: {Camera: ECU1, Radar: ECU1, Fusion: ADAS1, Planner: ADAS1}
      channels: {"Camera -> Fusion": CAN}
    labels:
      degraded: failed(driving.p1) & !failed(system)
"""

from __future__ import annotations

import logging
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

import yaml

from dftsafety.errors import DftError, ScenarioError, UnknownBlockReferenceError
from dftsafety.models.dft import LabelSpec
from dftsafety.models.enums import BlockTemplateKind, RedundancyMode
from dftsafety.models.expressions import ZERO, RateExpression
from dftsafety.models.scenario import (
    Block,
    BlockDiagram,
    Channel,
    EEArchitecture,
    HardwareTemplate,
    Path,
    Scenario,
    Task,
    TaskSpec,
    internal_bus,
)
from dftsafety.parser import parse_dft

logger = logging.getLogger(__name__)

_SECTIONS = {
    "parameters",
    "blocks",
    "channels",
    "tasks",
    "top",
    "architecture",
    "hardware",
    "assignment",
    "labels",
}
_BLOCK_KEYS = {
    "template",
    "rate",
    "dormancy",
    "threshold",
    "switching_rate",
    "fragment",
    "inputs",
    "outputs",
    "hardware",
}
_HARDWARE_KEYS = {
    "transient",
    "permanent",
    "safety_mechanism",
    "coverage",
    "dormancy",
    "infallible",
}


def _mapping(value: Any, where: str) -> Dict[str, Any]:
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ScenarioError("Expected a mapping", where)
    return {str(k): v for k, v in value.items()}


def _sequence(value: Any, where: str) -> List[Any]:
    if value is None:
        return []
    if not isinstance(value, list):
        raise ScenarioError("Expected a list", where)
    return value


def _check_keys(entry: Mapping[str, Any], allowed, where: str):
    unknown = sorted(set(entry) - set(allowed))
    if unknown:
        raise ScenarioError("Unknown key {}".format(", ".join(unknown)), where)


def _rate(value: Any, where: str) -> RateExpression:
    if value is None:
        return ZERO
    if isinstance(value, bool) or not isinstance(value, (int, float, str)):
        raise ScenarioError("Expected a number or rate expression", where)
    try:
        return RateExpression.parse(value)
    except DftError as e:
        raise ScenarioError(e.message, where)


def _number(value: Any, where: str, kind=float):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError("Expected a number", where)
    if kind is int and int(value) != value:
        raise ScenarioError("Expected an integer", where)
    return kind(value)


def _enum(enum, value: Any, where: str):
    try:
        return enum(str(value).strip().lower())
    except ValueError:
        choices = ", ".join(m.value for m in enum)
        raise ScenarioError("Expected one of {}".format(choices), where)


def _channel(value: Any, where: str) -> Channel:
    if isinstance(value, str) and "->" in value:
        source, _, target = value.partition("->")
        return source.strip(), target.strip()
    if isinstance(value, list) and len(value) == 2:
        return str(value[0]), str(value[1])
    raise ScenarioError("Expected [source, target] or 'source -> target'", where)


def _block(block_id: str, entry: Any) -> Block:
    where = "blocks.{}".format(block_id)
    entry = _mapping(entry, where)
    _check_keys(entry, _BLOCK_KEYS, where)
    template = _enum(BlockTemplateKind, entry.get("template", "standard"), where + ".template")
    fragment = None
    if template == BlockTemplateKind.Custom:
        text = entry.get("fragment")
        if not isinstance(text, str):
            raise ScenarioError("Custom block needs a DFT text fragment", where + ".fragment")
        fragment = parse_dft(text, check=False)
    elif "fragment" in entry:
        raise ScenarioError("Only custom blocks take a fragment", where + ".fragment")
    dormancy = entry.get("dormancy")
    return Block(
        block_id,
        template,
        rate=_rate(entry.get("rate"), where + ".rate"),
        dormancy=None if dormancy is None else _number(dormancy, where + ".dormancy"),
        threshold=_number(entry.get("threshold", 2), where + ".threshold", int),
        switching_rate=_rate(entry.get("switching_rate"), where + ".switching_rate"),
        fragment=fragment,
        inputs={str(k): str(v) for k, v in _mapping(entry.get("inputs"), where).items()},
        outputs={str(k): str(v) for k, v in _mapping(entry.get("outputs"), where).items()},
        hardware=None if entry.get("hardware") is None else str(entry["hardware"]),
    )


def _path(value: Any, where: str) -> Path:
    if isinstance(value, str):
        return Path([value])
    if isinstance(value, list):
        return Path([str(b) for b in value])
    entry = _mapping(value, where)
    _check_keys(entry, {"name", "blocks"}, where)
    blocks = [str(b) for b in _sequence(entry.get("blocks"), where + ".blocks")]
    if not blocks:
        raise ScenarioError("Path without blocks", where)
    name = entry.get("name")
    return Path(blocks, None if name is None else str(name))


def _task(task_id: str, entry: Any) -> Task:
    where = "tasks.{}".format(task_id)
    if isinstance(entry, list):
        entry = {"paths": entry}
    entry = _mapping(entry, where)
    _check_keys(entry, {"mode", "paths", "dormancy"}, where)
    paths = [
        _path(p, "{}.paths[{}]".format(where, i))
        for i, p in enumerate(_sequence(entry.get("paths"), where + ".paths"))
    ]
    return Task(
        task_id,
        paths,
        _enum(RedundancyMode, entry.get("mode", "and"), where + ".mode"),
        _number(entry.get("dormancy", 0.5), where + ".dormancy"),
    )


def _hardware_template(name: str, entry: Any) -> HardwareTemplate:
    where = "hardware.{}".format(name)
    entry = _mapping(entry, where)
    _check_keys(entry, _HARDWARE_KEYS, where)
    if entry.get("infallible"):
        return HardwareTemplate.infallible_hardware()
    coverage = entry.get("coverage", 0)
    if isinstance(coverage, dict):
        coverage = _mapping(coverage, where + ".coverage")
        _check_keys(coverage, ("transient", "permanent"), where + ".coverage")
        coverages = {k: _rate(v, "{}.coverage.{}".format(where, k)) for k, v in coverage.items()}
    else:
        shared = _rate(coverage, where + ".coverage")
        coverages = {"transient": shared, "permanent": shared}
    return HardwareTemplate(
        transient=_rate(entry.get("transient"), where + ".transient"),
        permanent=_rate(entry.get("permanent"), where + ".permanent"),
        safety_mechanism=_rate(entry.get("safety_mechanism"), where + ".safety_mechanism"),
        coverage=coverages,
        dormancy=_number(entry.get("dormancy", 0.0), where + ".dormancy"),
    )


def _hardware_reference(
    entry: Any, templates: Mapping[str, HardwareTemplate], where: str
) -> Tuple[Optional[HardwareTemplate], Dict[str, Any]]:
    """Resolves `entry` (a template name or a mapping with `hardware`/`infallible`)."""
    if entry is None:
        return None, {}
    if isinstance(entry, str):
        entry = {"hardware": entry}
    entry = _mapping(entry, where)
    if entry.get("infallible"):
        return HardwareTemplate.infallible_hardware(), entry
    name = entry.get("hardware")
    if name is None:
        return None, entry
    if str(name) not in templates:
        raise ScenarioError("Unknown hardware template {}".format(name), where)
    return templates[str(name)], entry


def parse_scenario(document: Union[str, Mapping[str, Any]]) -> Scenario:
    """
    Builds a `Scenario` from a YAML text or an already loaded mapping.
    Channels without an explicit bus are assigned when the scenario is
    synthesised.
    """
    if isinstance(document, str):
        try:
            document = yaml.safe_load(document)
        except yaml.YAMLError as e:
            raise ScenarioError("Malformed scenario document", str(e))
    root = _mapping(document, "scenario")
    _check_keys(root, _SECTIONS, "scenario")

    parameters = {}
    for name, value in _mapping(root.get("parameters"), "parameters").items():
        parameters[name] = None if value is None else _number(value, "parameters." + name)

    blocks = [_block(b, e) for b, e in _mapping(root.get("blocks"), "blocks").items()]
    if not blocks:
        raise ScenarioError("Scenario has no blocks", "blocks")
    channels = [
        _channel(c, "channels[{}]".format(i))
        for i, c in enumerate(_sequence(root.get("channels"), "channels"))
    ]
    diagram = BlockDiagram(blocks, channels)

    tasks = [_task(t, e) for t, e in _mapping(root.get("tasks"), "tasks").items()]
    if not tasks:
        raise ScenarioError("Scenario has no tasks", "tasks")
    task_spec = TaskSpec(tasks, str(root.get("top", "system")))

    templates = {
        name: _hardware_template(name, entry)
        for name, entry in _mapping(root.get("hardware"), "hardware").items()
    }
    architecture_entry = _mapping(root.get("architecture"), "architecture")
    _check_keys(architecture_entry, ("platforms", "buses"), "architecture")
    platforms_entry = architecture_entry.get("platforms")
    if isinstance(platforms_entry, list):
        platforms_entry = {str(p): None for p in platforms_entry}
    platforms_entry = _mapping(platforms_entry, "architecture.platforms")
    architecture = EEArchitecture(list(platforms_entry))
    hardware: Dict[str, HardwareTemplate] = {}
    for platform, entry in platforms_entry.items():
        where = "architecture.platforms.{}".format(platform)
        template, entry = _hardware_reference(entry, templates, where)
        _check_keys(entry, ("hardware", "infallible"), where)
        if template is not None:
            hardware[platform] = template
    for bus, entry in _mapping(architecture_entry.get("buses"), "architecture.buses").items():
        where = "architecture.buses.{}".format(bus)
        template, entry = _hardware_reference(entry, templates, where)
        _check_keys(entry, ("pairs", "members", "hardware", "infallible"), where)
        internal = any(bus == internal_bus(p) for p in architecture.platforms)
        if "members" in entry:
            members = [str(m) for m in _sequence(entry["members"], where + ".members")]
            architecture.add_complete_bus(bus, members)
        elif "pairs" in entry:
            pairs = [
                _channel(p, "{}.pairs[{}]".format(where, i))
                for i, p in enumerate(_sequence(entry["pairs"], where + ".pairs"))
            ]
            architecture.add_bus(bus, pairs)
        elif not internal:
            logger.warning("Bus %s connects no platforms", bus)
            architecture.add_bus(bus, [])
        if template is not None:
            hardware[bus] = template

    assignment = _mapping(root.get("assignment"), "assignment")
    _check_keys(assignment, ("blocks", "channels"), "assignment")
    block_map = {
        str(b): str(p) for b, p in _mapping(assignment.get("blocks"), "assignment.blocks").items()
    }
    for block in block_map:
        if block not in diagram.blocks:
            raise UnknownBlockReferenceError(block)
    channel_map = {
        _channel(c, "assignment.channels"): str(bus)
        for c, bus in _mapping(assignment.get("channels"), "assignment.channels").items()
    }

    labels = LabelSpec()
    for name, predicate in _mapping(root.get("labels"), "labels").items():
        try:
            labels.add(name, str(predicate))
        except DftError as e:
            raise ScenarioError(e.message, "labels.{}".format(name))

    scenario = Scenario(
        diagram,
        task_spec,
        architecture,
        block_map,
        hardware,
        channel_map=channel_map,
        labels=labels,
        parameters=parameters,
    )
    logger.debug("Parsed scenario: %r", scenario)
    return scenario


def load_scenario(path: str) -> Scenario:
    """Reads and parses a scenario file."""
    with open(path, "r", encoding="utf-8") as f:
        return parse_scenario(f.read())
