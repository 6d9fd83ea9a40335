import unittest

import networkx as nx
from pytest import approx

import dftsafety
from dftsafety import measures
from dftsafety.errors import (
    AmbiguousBusError,
    ChannelMismatchError,
    InconsistentAssignmentError,
    MissingBlockFTError,
    MissingHardwareFTError,
    NoConnectingBusError,
    SpareModuleOverlapError,
    UnknownBlockReferenceError,
)
from dftsafety.models.dft import BasicEvent
from dftsafety.models.enums import (
    BlockTemplateKind,
    DependencyKind,
    GateKind,
    RedundancyMode,
)
from dftsafety.models.expressions import RateExpression
from dftsafety.models.scenario import (
    Block,
    BlockDiagram,
    EEArchitecture,
    HardwareTemplate,
    Path,
    Scenario,
    Task,
    TaskSpec,
)
from dftsafety.semantics import structure_graph
from dftsafety.statespace import StateExplorer
from dftsafety.synthesis import (
    block_fault_tree,
    build_system_layer,
    connect_blocks,
    derive_channel_assignment,
    _task_dormancies,
    instantiate_hardware_ft,
)
from tests import fixtures


def rate(value) -> RateExpression:
    return RateExpression.parse(value)


def diagram() -> BlockDiagram:
    return BlockDiagram(
        [Block("A", rate=rate(1)), Block("B", rate=rate(2)), Block("C", rate=rate(3))],
        [("A", "C"), ("B", "C")],
    )


def scenario(tasks, block_map=None, architecture=None, hardware=None, **kwargs) -> Scenario:
    architecture = architecture or EEArchitecture(["P"])
    return Scenario(
        kwargs.pop("diagram", None) or diagram(),
        TaskSpec(tasks),
        architecture,
        block_map or {"A": "P", "B": "P", "C": "P"},
        hardware
        if hardware is not None
        else {p: HardwareTemplate.infallible_hardware() for p in architecture.platforms},
        **kwargs,
    )


def mttf(dft: dftsafety.Dft) -> float:
    return measures.mttf(dftsafety.build_ctmc(dft)).value


class TestBlockFaultTree(unittest.TestCase):
    def test_standard(self):
        block_ft = block_fault_tree(Block("C", rate=rate(3)), diagram())
        tree = block_ft.tree
        self.assertEqual(block_ft.root, "C")
        self.assertEqual(tree.elements["C"].children, ["C.hw", "C.intern", "C.input"])
        self.assertEqual(tree.elements["C.input"].children, ["C.in_A", "C.in_B"])
        self.assertEqual(block_ft.inputs, {("A", "C"): "C.in_A", ("B", "C"): "C.in_B"})
        self.assertEqual(block_ft.hardware, "C.hw")
        self.assertTrue(tree.elements["C.in_A"].dummy)

    def test_source_block(self):
        block_ft = block_fault_tree(Block("A", rate=rate(1)), diagram())
        self.assertNotIn("A.input", block_ft.tree)
        self.assertEqual(block_ft.outputs, {("A", "C"): "A"})

    def test_zero_rate_is_dummy(self):
        block_ft = block_fault_tree(Block("A"), diagram())
        self.assertTrue(block_ft.tree.elements["A.intern"].dummy)

    def test_dormancy(self):
        block_ft = block_fault_tree(Block("A", rate=rate(1)), diagram(), dormancy=0.25)
        self.assertEqual(block_ft.tree.elements["A.intern"].dormancy, 0.25)
        block = Block("A", rate=rate(1), dormancy=0.75)
        tree = block_fault_tree(block, diagram(), 0.25).tree
        self.assertEqual(tree.elements["A.intern"].dormancy, 0.75)

    def test_voter(self):
        block = Block("C", BlockTemplateKind.Voter, rate(3), threshold=2)
        gate = block_fault_tree(block, diagram()).tree.elements["C.input"]
        self.assertEqual(gate.kind, GateKind.Vot)
        self.assertEqual(gate.threshold, 2)

    def test_voter_threshold(self):
        block = Block("C", BlockTemplateKind.Voter, rate(3), threshold=3)
        with self.assertRaises(dftsafety.ScenarioError):
            block_fault_tree(block, diagram())

    def test_switch(self):
        block = Block("C", BlockTemplateKind.Switch, rate(3), switching_rate=rate(0.1))
        tree = block_fault_tree(block, diagram()).tree
        self.assertEqual(tree.elements["C.wrong_path"].kind, GateKind.Pand)
        self.assertEqual(tree.elements["C.wrong_path"].children, ["C.switching", "C.in_A"])
        self.assertEqual(tree.elements["C.input"].kind, GateKind.And)
        self.assertEqual(tree.elements["C.switching"].rate.evaluate({}), 0.1)

    def test_switch_needs_two_inputs(self):
        with self.assertRaises(dftsafety.ScenarioError):
            block_fault_tree(Block("A", BlockTemplateKind.Switch), diagram())

    def test_custom(self):
        fragment = dftsafety.parse_dft(
            "toplevel R; R or X I H; X lambda=1; I lambda=0 dummy; H lambda=0 dummy;",
            check=False,
        )
        block = Block(
            "C",
            BlockTemplateKind.Custom,
            fragment=fragment,
            inputs={"A": "I", "B": "I"},
            hardware="H",
        )
        block_ft = block_fault_tree(block, diagram())
        self.assertEqual(block_ft.root, "C")
        self.assertEqual(block_ft.tree.elements["C"].children, ["C.X", "C.I", "C.H"])
        self.assertEqual(block_ft.inputs[("A", "C")], "C.I")
        self.assertEqual(block_ft.hardware, "C.H")

    def test_custom_unmapped_input(self):
        fragment = dftsafety.parse_dft(
            "toplevel R; R or I H; I lambda=0 dummy; H lambda=0 dummy;", check=False
        )
        block = Block("C", BlockTemplateKind.Custom, fragment=fragment, inputs={"A": "I"})
        with self.assertRaises(ChannelMismatchError):
            block_fault_tree(block, diagram())


class TestLayers(unittest.TestCase):
    def block_fts(self):
        d = diagram()
        return {b: block_fault_tree(block, d) for b, block in d.blocks.items()}

    def test_connect_blocks(self):
        connected = connect_blocks(diagram(), self.block_fts())
        dependency = connected.elements["fdep.A.C"]
        self.assertEqual(dependency.kind, DependencyKind.Fdep)
        self.assertEqual(dependency.trigger, "A")
        self.assertEqual(dependency.targets, ["C.in_A"])
        self.assertIsNone(connected.top)

    def test_connect_blocks_missing_tree(self):
        block_fts = self.block_fts()
        del block_fts["B"]
        with self.assertRaises(MissingBlockFTError):
            connect_blocks(diagram(), block_fts)

    def test_system_layer(self):
        connected = connect_blocks(diagram(), self.block_fts())
        tasks = TaskSpec(
            [
                Task("t", [Path(["A", "C"]), Path(["B", "C"])]),
                Task("u", [Path(["B"])]),
            ]
        )
        system = build_system_layer(tasks, connected)
        self.assertEqual(system.top, "system")
        self.assertEqual(system.elements["system"].children, ["t", "B"])
        self.assertEqual(system.elements["t"].kind, GateKind.And)
        self.assertEqual(system.elements["t"].children, ["t.p1", "t.p2"])
        self.assertEqual(system.elements["t.p2"].children, ["B", "C"])

    def test_standby_paths_must_be_independent(self):
        connected = connect_blocks(diagram(), self.block_fts())
        tasks = TaskSpec(
            [Task("t", [Path(["A", "C"]), Path(["B", "C"])], RedundancyMode.Warm)]
        )
        with self.assertRaises(SpareModuleOverlapError):
            build_system_layer(tasks, connected)

    def test_unknown_block_in_path(self):
        connected = connect_blocks(diagram(), self.block_fts())
        with self.assertRaises(UnknownBlockReferenceError):
            build_system_layer(TaskSpec([Task("t", [Path(["Z"])])]), connected)


class TestHardware(unittest.TestCase):
    def test_infallible(self):
        tree = instantiate_hardware_ft(HardwareTemplate.infallible_hardware(), "P")
        self.assertEqual(list(tree.elements), ["P"])
        self.assertTrue(tree.elements["P"].dummy)

    def test_fault_classes(self):
        template = HardwareTemplate(
            transient=rate(1e-4),
            permanent=rate(1e-5),
            safety_mechanism=rate(1e-6),
            coverage={"transient": rate(0.9), "permanent": rate(0.99)},
        )
        tree = instantiate_hardware_ft(template, "P")
        self.assertEqual(tree.top, "P")
        self.assertEqual(tree.elements["P"].children, ["P.transient", "P.permanent"])
        uncovered = tree.elements["P.transient.uncovered"]
        self.assertTrue(uncovered.transient)
        self.assertEqual(uncovered.rate.evaluate({}), approx(1e-5))
        covered = tree.elements["P.permanent.covered"]
        self.assertFalse(covered.transient)
        self.assertEqual(covered.rate.evaluate({}), approx(0.99e-5))
        self.assertEqual(tree.elements["P.permanent.seq"].kind, GateKind.Seq)
        self.assertEqual(
            tree.elements["P.permanent.seq"].children, ["P.sm", "P.permanent.covered"]
        )
        self.assertEqual(dftsafety.validate(tree), [])

    def test_parametric_rates(self):
        template = HardwareTemplate(permanent=rate("mu"), coverage={"permanent": rate(0.5)})
        tree = instantiate_hardware_ft(template, "P")
        self.assertEqual(tree.elements["P.permanent.covered"].rate.evaluate({"mu": 4.0}), 2.0)
        self.assertIsInstance(tree.elements["P.sm"], BasicEvent)
        self.assertTrue(tree.elements["P.sm"].dummy)


class TestChannelAssignment(unittest.TestCase):
    def architecture(self) -> EEArchitecture:
        architecture = EEArchitecture(["P1", "P2", "P3"])
        architecture.add_bus("CAN", [("P1", "P2"), ("P2", "P3")])
        return architecture

    def test_transitive_bus(self):
        architecture = self.architecture()
        self.assertEqual(architecture.buses_between("P1", "P3"), ["CAN"])
        self.assertEqual(architecture.buses_between("P3", "P1"), [])

    def test_internal_bus(self):
        assignment = derive_channel_assignment(
            {"A": "P1", "B": "P1", "C": "P1"}, diagram(), self.architecture()
        )
        self.assertEqual(set(assignment.channel_map.values()), {"P1.intern"})

    def test_derived_bus(self):
        assignment = derive_channel_assignment(
            {"A": "P1", "B": "P3", "C": "P3"}, diagram(), self.architecture()
        )
        self.assertEqual(assignment.channel_map[("A", "C")], "CAN")
        self.assertEqual(assignment.channel_map[("B", "C")], "P3.intern")

    def test_no_bus(self):
        with self.assertRaises(NoConnectingBusError):
            derive_channel_assignment(
                {"A": "P3", "B": "P3", "C": "P1"}, diagram(), self.architecture()
            )

    def test_ambiguous_bus(self):
        architecture = self.architecture()
        architecture.add_complete_bus("ETH", ["P1", "P2"])
        block_map = {"A": "P1", "B": "P2", "C": "P2"}
        with self.assertRaises(AmbiguousBusError) as context:
            derive_channel_assignment(block_map, diagram(), architecture)
        self.assertEqual(context.exception.buses, ["CAN", "ETH"])
        assignment = derive_channel_assignment(
            block_map, diagram(), architecture, {("A", "C"): "ETH"}
        )
        self.assertEqual(assignment.channel_map[("A", "C")], "ETH")

    def test_explicit_bus_must_connect(self):
        with self.assertRaises(InconsistentAssignmentError):
            derive_channel_assignment(
                {"A": "P1", "B": "P1", "C": "P2"},
                diagram(),
                self.architecture(),
                {("A", "C"): "P1.intern"},
            )

    def test_unassigned_block(self):
        with self.assertRaises(InconsistentAssignmentError):
            derive_channel_assignment({"A": "P1", "B": "P1"}, diagram(), self.architecture())

    def test_unknown_platform(self):
        with self.assertRaises(InconsistentAssignmentError):
            derive_channel_assignment(
                {"A": "P1", "B": "P1", "C": "P9"}, diagram(), self.architecture()
            )

    def test_unknown_channel_block(self):
        with self.assertRaises(UnknownBlockReferenceError):
            BlockDiagram([Block("A")], [("A", "Z")])


class TestSynthesize(unittest.TestCase):
    def test_series(self):
        dft = dftsafety.synthesize(scenario([Task("t", [Path(["A", "B", "C"])])]))
        self.assertEqual(dft.top, "system")
        self.assertEqual(dftsafety.validate(dft), [])
        self.assertEqual(mttf(dft), approx(1 / 6))

    def test_channel_propagation(self):
        # C fails when A or B fails, through the channel dependencies
        dft = dftsafety.synthesize(scenario([Task("t", [Path(["C"])])]))
        self.assertEqual(mttf(dft), approx(1 / 6))
        self.assertIn("fdep.A.C", dft)
        self.assertIn("adep.C", dft)
        self.assertIn("fdep.hw.C", dft)

    def test_standby_block_feeding_running_path_stays_active(self):
        tasks = [Task("t", [Path(["C"]), Path(["A"])], RedundancyMode.Cold)]
        self.assertEqual(_task_dormancies(scenario(tasks)), {})
        isolated = BlockDiagram([Block("A"), Block("B"), Block("C")], [])
        self.assertEqual(_task_dormancies(scenario(tasks, diagram=isolated)), {"A": 0.0})

    def test_switch_backup_input_stays_dormant(self):
        d = BlockDiagram(
            [Block("M"), Block("F"), Block("S", BlockTemplateKind.Switch)],
            [("M", "S"), ("F", "S")],
        )
        tasks = [
            Task("t", [Path(["M"]), Path(["F"])], RedundancyMode.Cold),
            Task("u", [Path(["S"])]),
        ]
        block_map = {"M": "P", "F": "P", "S": "P"}
        self.assertEqual(_task_dormancies(scenario(tasks, block_map, diagram=d)), {"F": 0.0})
        swapped = BlockDiagram(list(d.blocks.values()), [("F", "S"), ("M", "S")])
        self.assertEqual(_task_dormancies(scenario(tasks, block_map, diagram=swapped)), {})

    def test_shared_standby_block_takes_largest_dormancy(self):
        isolated = BlockDiagram([Block("A"), Block("B"), Block("C")], [])
        tasks = [
            Task("u", [Path(["B"]), Path(["A"])], RedundancyMode.Cold),
            Task("v", [Path(["C"]), Path(["A"])], RedundancyMode.Warm, dormancy=0.3),
        ]
        self.assertEqual(_task_dormancies(scenario(tasks, diagram=isolated)), {"A": 0.3})

    def test_cold_standby(self):
        d = BlockDiagram([Block("M", rate=rate(1)), Block("S", rate=rate(1))], [])
        tasks = [Task("t", [Path(["M"]), Path(["S"])], RedundancyMode.Cold)]
        dft = dftsafety.synthesize(scenario(tasks, {"M": "P", "S": "P"}, diagram=d))
        self.assertEqual(dft.elements["t"].kind, GateKind.Spare)
        self.assertEqual(dft.elements["S.intern"].dormancy, 0.0)
        self.assertEqual(mttf(dft), approx(2.0))

    def test_platform_failure(self):
        d = BlockDiagram([Block("A")], [])
        tasks = [Task("t", [Path(["A"])])]
        hardware = {"P": HardwareTemplate(permanent=rate(1))}
        dft = dftsafety.synthesize(scenario(tasks, {"A": "P"}, hardware=hardware, diagram=d))
        self.assertEqual(mttf(dft), approx(1.0))

    def test_missing_hardware(self):
        with self.assertRaises(MissingHardwareFTError):
            dftsafety.synthesize(scenario([Task("t", [Path(["C"])])], hardware={}))

    def test_parameters_and_labels(self):
        d = BlockDiagram([Block("A", rate=rate("mu"))], [])
        labels = dftsafety.LabelSpec({"degraded": "failed(A.intern)"})
        dft = dftsafety.synthesize(
            scenario(
                [Task("t", [Path(["A"])])],
                {"A": "P"},
                diagram=d,
                labels=labels,
                parameters={"mu": 0.5},
            )
        )
        self.assertEqual(dft.parameters, {"mu": 0.5})
        self.assertEqual(dft.labels, labels)
        self.assertEqual(mttf(dft), approx(2.0))

    def test_serialised_round_trip(self):
        loaded = dftsafety.load_scenario(fixtures.scenario_path("fusion.yaml"))
        synthesized = dftsafety.synthesize(loaded)
        self.assertEqual(
            dftsafety.parse_dft(dftsafety.serialize_dft(synthesized)), synthesized
        )


FEEDBACK = """
blocks: {A: {rate: 1}, B: {rate: 2}, C: {rate: 3}}
channels: [[A, B], [B, C], [C, A]]
tasks: {control: [C]}
architecture: {platforms: {ECU: {infallible: true}}}
assignment: {blocks: {A: ECU, B: ECU, C: ECU}}
"""


def load(name: str) -> Scenario:
    return dftsafety.load_scenario(fixtures.scenario_path(name))


class TestScenarioFamilies(unittest.TestCase):
    def test_golden_trees(self):
        for family in ("sc1", "sc2", "sc3"):
            with self.subTest(family):
                synthesized = dftsafety.synthesize(load(family + ".yaml"))
                with open(fixtures.scenario_path(family + ".dft"), encoding="utf-8") as f:
                    golden = dftsafety.parse_dft(f.read())
                self.assertEqual(dict(synthesized.elements), dict(golden.elements))
                self.assertEqual(synthesized.top, golden.top)
                self.assertEqual(synthesized.parameters, golden.parameters)
                self.assertEqual(synthesized.labels, golden.labels)

    def test_element_count(self):
        families = ("sc1", "sc2", "sc3", "sc2_arch_a", "sc2_arch_b", "fusion", "bus")
        for name in (f + ".yaml" for f in families):
            with self.subTest(name):
                loaded = load(name)
                d = loaded.diagram
                block_fts = {b: block_fault_tree(block, d) for b, block in d.blocks.items()}
                system = build_system_layer(loaded.tasks, connect_blocks(d, block_fts))
                assignment = derive_channel_assignment(
                    loaded.block_map, d, loaded.architecture, loaded.channel_map
                )
                fallible = [
                    channel
                    for channel, bus in assignment.channel_map.items()
                    if bus in loaded.hardware and not loaded.hardware[bus].infallible
                ]
                used = set(assignment.block_map.values())
                used |= {assignment.channel_map[c] for c in fallible}
                hardware = sum(
                    len(instantiate_hardware_ft(loaded.hardware[h], h)) for h in used
                )
                complete = dftsafety.synthesize(loaded)
                self.assertEqual(
                    len(complete), len(system) + hardware + 2 * len(d.blocks) + len(fallible)
                )

    def test_feedback_cycle(self):
        dft = dftsafety.synthesize(dftsafety.parse_scenario(FEEDBACK))
        channel_fdeps = sorted(
            d.id
            for d in dft.dependencies
            if d.kind == DependencyKind.Fdep and not d.id.startswith("fdep.hw.")
        )
        self.assertEqual(channel_fdeps, ["fdep.A.B", "fdep.B.C", "fdep.C.A"])
        self.assertEqual(dftsafety.validate(dft), [])
        self.assertTrue(nx.is_directed_acyclic_graph(structure_graph(dft)))
        self.assertEqual(mttf(dft), approx(1 / 6))

    def test_channel_assignment_example(self):
        d = BlockDiagram([Block("B1"), Block("B2"), Block("B3")], [("B1", "B3"), ("B2", "B3")])
        architecture = EEArchitecture(["ECU1", "ADAS1"])
        architecture.add_complete_bus("CAN", ["ECU1", "ADAS1"])
        assignment = derive_channel_assignment(
            {"B1": "ECU1", "B2": "ADAS1", "B3": "ADAS1"}, d, architecture
        )
        self.assertEqual(
            assignment.channel_map, {("B1", "B3"): "CAN", ("B2", "B3"): "ADAS1.intern"}
        )

    def test_hardware_wiring_example(self):
        d = BlockDiagram([Block("B1"), Block("B2"), Block("B3")], [("B1", "B3"), ("B2", "B3")])
        architecture = EEArchitecture(["ECU1", "ADAS1"])
        architecture.add_complete_bus("CAN", ["ECU1", "ADAS1"])
        hardware = {
            "ECU1": HardwareTemplate(permanent=rate(1e-7)),
            "ADAS1": HardwareTemplate(
                transient=rate(1e-4),
                permanent=rate(1e-5),
                safety_mechanism=rate(1e-5),
                coverage={"transient": rate(0.99), "permanent": rate(0.99)},
            ),
            "CAN": HardwareTemplate(permanent=rate(1e-7)),
        }
        dft = dftsafety.synthesize(
            scenario(
                [Task("t", [Path(["B3"])])],
                {"B1": "ECU1", "B2": "ADAS1", "B3": "ADAS1"},
                architecture,
                hardware,
                diagram=d,
            )
        )
        hardware_fdeps = {
            (e.trigger, tuple(e.targets))
            for e in dft.dependencies
            if e.id.startswith(("fdep.hw.", "fdep.bus."))
        }
        self.assertEqual(
            hardware_fdeps,
            {
                ("ECU1", ("B1.hw",)),
                ("ADAS1", ("B2.hw",)),
                ("ADAS1", ("B3.hw",)),
                ("CAN", ("B3.in_B1",)),
            },
        )
        self.assertEqual(
            dft.elements["adep.B1"].targets,
            ["ECU1", "ECU1.transient.seq", "ECU1.permanent.seq"],
        )

    def test_cold_fallback_platform_starts_dormant(self):
        loaded = load("sc3.yaml")
        self.assertEqual(_task_dormancies(loaded), {"fbEP": 0.0, "fbTP": 0.0})
        active = StateExplorer(dftsafety.synthesize(loaded)).initial_marking().active
        self.assertIn("ADAS1.permanent.uncovered", active)
        self.assertIn("IECU.permanent.uncovered", active)
        self.assertNotIn("ADAS2.permanent.uncovered", active)
        self.assertNotIn("ADAS2.sm", active)

    def test_hot_paths_start_active(self):
        active = StateExplorer(dftsafety.synthesize(load("sc2.yaml"))).initial_marking().active
        self.assertIn("ADAS1.permanent.uncovered", active)
        self.assertIn("ADAS2.permanent.uncovered", active)


LIFETIME = 10000.0


class TestArchitectureVariants(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.single = dftsafety.build_ctmc(dftsafety.synthesize(load("sc2_arch_a.yaml")))
        cls.split = dftsafety.build_ctmc(dftsafety.synthesize(load("sc2_arch_b.yaml")))

    def test_single_adas_unreliability(self):
        unreliability = measures.unreliability(self.single, LIFETIME).value
        self.assertGreater(unreliability, 6.0e-2 / 3)
        self.assertLess(unreliability, 6.0e-2 * 3)

    def test_single_adas_mttf(self):
        value = measures.mttf(self.single).value
        self.assertGreater(value, 6.9e4 / 3)
        self.assertLess(value, 6.9e4 * 3)

    def test_single_adas_never_degrades(self):
        # losing the ADAS takes both paths at once
        self.assertGreater(self.single.num_states, 1)
        self.assertFalse(self.single.label("degraded").any())

    def test_split_paths_degrade(self):
        self.assertTrue(self.split.label("degraded").any())

    def test_split_paths_are_more_reliable(self):
        single = measures.unreliability(self.single, LIFETIME).value
        split = measures.unreliability(self.split, LIFETIME).value
        self.assertLess(split, single / 2)
        self.assertGreater(split, 1.0e-2 / 3)
        self.assertLess(split, 1.0e-2 * 3)
        self.assertGreater(measures.mttf(self.split).value, measures.mttf(self.single).value)
