"""Executive tests: cycle formulas, oracle equivalence, run-loop policy."""

import random

import numpy as np
import pytest

from thorsim.core import LifParams, NeuronState
from thorsim.errors import SimulationError
from thorsim.events import LeakEvent, NeuronEvent
from thorsim.io import NetworkConfig, build_simulator
from thorsim.memory import MemType, mem_geometry
from thorsim.pipeline import Simulator, TimingConfig, TimingMode
from thorsim.validation import (
    ScalarExecutive,
    random_events,
    random_network,
    run_equivalence,
)


def quiet_state(thresh=255):
    return NeuronState(0, 0, thresh, 0, 0, 0, 0)


def make_sim(n=256, p=32, learning=True, mode=TimingMode.THOR, overhead=4, f_clk=400e6, s=None):
    params = LifParams(n, p, learning)
    geom = mem_geometry(n, p, s if s is not None else 4 * n * n, MemType.SCM)
    sim = Simulator(params, geom, TimingConfig(mode=mode, event_overhead_cycles=overhead, f_clk=f_clk))
    sim.init_neurons([quiet_state() for _ in range(n)])
    return sim


class TestCycleFormulas:
    def test_reference_design_neuron_event(self):
        sim = make_sim(256, 32)
        assert sim.execute_neuron_event(0).core_cycles == 9

    def test_serial_design_neuron_event(self):
        sim = make_sim(256, 1)
        assert sim.execute_neuron_event(0).core_cycles == 257

    @pytest.mark.parametrize("n,p", [(8, 2), (16, 4), (32, 8), (64, 32), (256, 8)])
    def test_pipeline_fill_formula(self, n, p):
        sim = make_sim(n, p)
        assert sim.execute_neuron_event(0).core_cycles == n // p + 1
        assert sim.execute_leak_event().core_cycles == n // p + 1

    def test_synapse_event_two_cycles(self):
        sim = make_sim(16, 4)
        result = sim.execute_synapse_event(3, 5)
        assert result.core_cycles == 2
        assert result.sop_count == 1

    def test_event_overhead_in_run_totals(self):
        sim = make_sim(256, 32, overhead=4)
        trace = sim.run([NeuronEvent(0)])
        assert trace.total_cycles == 13  # 9 core + 4 overhead
        assert trace.total_sops == 256

    def test_out_of_range_ids_rejected(self):
        sim = make_sim(16, 4)
        with pytest.raises(ValueError):
            sim.execute_neuron_event(16)
        with pytest.raises(ValueError):
            sim.execute_synapse_event(0, 99)

    def test_pipelined_ops_require_thor_mode(self):
        sim = make_sim(16, 4, mode=TimingMode.BASELINE)
        with pytest.raises(SimulationError):
            sim.execute_neuron_event(0)


class TestFunctionalBehavior:
    def test_zero_weights_no_spikes(self):
        sim = make_sim(32, 8)
        result = sim.execute_neuron_event(0)
        assert result.spike_vectors == []
        assert result.spikes_emitted == 0

    def test_synapse_event_spike_vector_addressing(self):
        sim = make_sim(16, 4)
        sim.neuron_mem.load(0, NeuronState(250, 0, 255, 0, 0, 0, 0))
        sim.synapse_mem.set_weight(0, 0, 15)
        result = sim.execute_synapse_event(0, 0)
        assert len(result.spike_vectors) == 1
        vec = result.spike_vectors[0]
        assert vec.bits == 0b1
        assert vec.offset == 0

    def test_leak_event_applies_everywhere(self):
        sim = make_sim(16, 4)
        for i in range(16):
            sim.neuron_mem.load(i, NeuronState(100, 5, 255, 0, 0, 0, 0))
        result = sim.execute_leak_event()
        assert result.sop_count == 0
        assert all(sim.neuron_mem.peek(i).v_mem == 95 for i in range(16))

    def test_ledger_conservation_reads_cover_sops(self):
        sim = make_sim(256, 32)
        result = sim.execute_neuron_event(0)
        p = 32
        group_reads = result.ledger_delta.neuron_mem.reads / sim.neuron_mem.read_subbanks
        assert group_reads >= result.sop_count / p

    def test_bank_trace_alternates(self):
        sim = make_sim(256, 32)
        trace = sim.execute_neuron_event(0).bank_trace
        reads = [r for r, _ in trace if r is not None]
        writes = [w for _, w in trace if w is not None]
        assert reads == [i % 2 for i in range(8)]
        assert writes == [i % 2 for i in range(8)]
        # In every overlapped cycle the read and write hit different banks.
        for r, w in trace:
            if r is not None and w is not None:
                assert r != w


class TestBaselineMode:
    def test_neuron_event_timing(self):
        sim = make_sim(256, 32, mode=TimingMode.BASELINE)
        result = sim.execute(NeuronEvent(0))
        assert result.core_cycles == 512

    def test_synapse_word_sharing(self):
        sim = make_sim(256, 32, mode=TimingMode.BASELINE, learning=False)
        result = sim.execute(NeuronEvent(0))
        assert result.ledger_delta.synapse_mem.reads == 32  # one access per 8 SOPs

    def test_baseline_run_requires_baseline_mode(self):
        sim = make_sim(16, 4)
        with pytest.raises(SimulationError):
            sim.baseline_run([])

    def test_functional_identity_with_thor_mode(self):
        rng = random.Random(11)
        config = random_network(rng, 32, 4, learning=True)
        events = random_events(rng, 32, 200)

        thor = build_simulator(config)
        thor_trace = thor.run(events, max_events=2000)

        config_base = NetworkConfig(**{**vars(config)})
        config_base.mode = TimingMode.BASELINE
        base = build_simulator(config_base)
        base_trace = base.baseline_run(events, max_events=2000)

        assert np.array_equal(thor.neuron_mem.state, base.neuron_mem.state)
        assert np.array_equal(thor.synapse_mem.weights, base.synapse_mem.weights)
        assert thor_trace.output_spikes == base_trace.output_spikes
        assert thor_trace.total_sops == base_trace.total_sops
        assert base_trace.total_cycles > thor_trace.total_cycles


class TestThroughputIdentity:
    @pytest.mark.parametrize(
        "n,p,overhead,f",
        [(256, 32, 4, 400e6), (256, 1, 4, 400e6), (64, 8, 0, 100e6), (32, 4, 7, 1e9)],
    )
    def test_saturating_neuron_events(self, n, p, overhead, f):
        sim = make_sim(n, p, overhead=overhead, f_clk=f)
        trace = sim.run([NeuronEvent(i % n) for i in range(20)])
        expected = n * f / (n // p + 1 + overhead)
        assert trace.throughput_sops == pytest.approx(expected, rel=1e-12)


class TestRunLoop:
    def test_empty_stream(self):
        trace = make_sim(16, 4).run([])
        assert trace.total_cycles == 0
        assert trace.total_sops == 0
        assert trace.rows == []

    def test_recurrent_event_sop_accounting(self):
        # One external event makes exactly neuron 1 fire once; the internal
        # replay adds a second full broadcast: N * (1 + 1) SOPs.
        n, p = 8, 2
        sim = make_sim(n, p)
        for i in range(n):
            sim.neuron_mem.load(i, NeuronState(0, 0, 10 if i == 1 else 200, 0, 0, 0, 0))
        sim.synapse_mem.set_weight(0, 1, 15)
        trace = sim.run([NeuronEvent(0)])
        assert trace.total_sops == n * 2
        assert [row.kind for row in trace.rows] == ["NEUR", "NEUR"]
        assert trace.output_spikes == [(1, 0)]

    def test_internal_events_served_before_external(self):
        n, p = 8, 2
        sim = make_sim(n, p)
        for i in range(n):
            sim.neuron_mem.load(i, NeuronState(0, 0, 10 if i == 1 else 200, 0, 0, 0, 0))
        sim.synapse_mem.set_weight(0, 1, 15)
        trace = sim.run([NeuronEvent(0), LeakEvent()])
        # The recurrent broadcast of neuron 1 runs before the pending leak.
        assert [row.kind for row in trace.rows] == ["NEUR", "NEUR", "LEAK"]

    def test_max_events_truncates_deterministically(self):
        sim = make_sim(16, 4)
        trace = sim.run([NeuronEvent(0)] * 10, max_events=3)
        assert trace.total_events == 3
        assert trace.truncated

    def test_trace_determinism(self):
        rng = random.Random(3)
        config = random_network(rng, 16, 4, learning=True)
        events = random_events(rng, 16, 100)
        t1 = build_simulator(config).run(events)
        t2 = build_simulator(config).run(events)
        assert t1.rows == t2.rows
        assert t1.output_spikes == t2.output_spikes
        assert t1.ledger.as_dict() == t2.ledger.as_dict()


class TestOracleEquivalence:
    @pytest.mark.parametrize("n,p,learning", [(8, 2, True), (16, 4, False), (32, 8, True)])
    def test_small_random_networks(self, n, p, learning):
        rng = random.Random(n * 100 + p)
        config = random_network(rng, n, p, learning)
        events = random_events(rng, n, 300)
        report = run_equivalence(config, events, max_events=3000)
        assert report.matched, report.detail

    def test_scalar_executive_replays_recurrence(self):
        n, p = 8, 2
        params = LifParams(n, p, True)
        neurons = [NeuronState(0, 0, 10 if i == 1 else 200, 0, 0, 0, 0) for i in range(n)]
        weights = [[0] * n for _ in range(n)]
        weights[0][1] = 15
        scalar = ScalarExecutive(params, neurons, weights)
        result = scalar.run([NeuronEvent(0)])
        assert result.total_sops == n * 2
        assert result.output_spikes == [(1, 0)]

    def test_divergence_is_located(self):
        rng = random.Random(5)
        config = random_network(rng, 16, 4, learning=True)
        events = random_events(rng, 16, 50)
        report = run_equivalence(config, events, inject_fault=True)
        assert not report.matched
        assert "neuron 0" in report.detail
