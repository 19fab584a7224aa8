"""File format tests: round trips, parse errors, cross-format identity."""

import random

import numpy as np
import pytest

from thorsim.core import NeuronState
from thorsim.errors import ConfigError, FormatError
from thorsim.events import LeakEvent, NeuronEvent, SynapseEvent
from thorsim.io import (
    MAGIC,
    build_simulator,
    load_network,
    load_neuron_image,
    load_synapse_image,
    parse_events,
    parse_spike_log,
    read_trace_rows,
    save_network,
    save_neuron_image,
    save_synapse_image,
    write_events,
    write_spike_log,
    write_trace,
)
from thorsim.validation import random_events, random_network


def minimal_config(n=8, p=2, **overrides):
    rng = random.Random(1234)
    config = random_network(rng, n, p, learning=True)
    for key, value in overrides.items():
        setattr(config, key, value)
    return config


class TestNetworkFormat:
    def test_minimal_config_round_trips(self, tmp_path):
        config = minimal_config()
        path = tmp_path / "net.cfg"
        save_network(config, str(path))
        loaded = load_network(str(path))
        assert loaded.n == config.n
        assert loaded.p == config.p
        assert loaded.neurons == config.neurons
        assert np.array_equal(loaded.weights, config.weights)
        # Canonical form is a fixed point of save(load(.)).
        path2 = tmp_path / "net2.cfg"
        save_network(loaded, str(path2))
        assert path.read_bytes() == path2.read_bytes()

    def test_constraint_violation_is_named(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text(f"{MAGIC}\nNETWORK\nN 12\nP 5\nS 576\nMEMTYPE scm\nEND\n")
        with pytest.raises(ValueError, match="power of two"):
            load_network(str(path))

    def test_non_dividing_bank_size_is_named(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text(f"{MAGIC}\nNETWORK\nN 8\nP 2\nS 100\nMEMTYPE scm\nEND\n")
        with pytest.raises(ConfigError, match="divide"):
            load_network(str(path))

    def test_parse_error_carries_line_number(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text(f"{MAGIC}\nNETWORK\nN 8\nP 2\nS 256\nMEMTYPE scm\nBOGUS 1\nEND\n")
        with pytest.raises(FormatError, match="bad.cfg:7"):
            load_network(str(path))

    def test_missing_magic_rejected(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("N 8\nP 2\n")
        with pytest.raises(FormatError, match="magic"):
            load_network(str(path))

    def test_dense_and_sparse_weights_load_identically(self, tmp_path):
        rng = random.Random(7)
        n, p = 16, 4
        triples = [
            (rng.randrange(n), rng.randrange(n), rng.randint(1, 15)) for _ in range(40)
        ]
        header = f"{MAGIC}\nNETWORK\nN {n}\nP {p}\nS {4 * n * n}\nMEMTYPE scm\n"

        dense = np.zeros((n, n), dtype=int)
        for pre, post, w in triples:
            dense[pre, post] = w
        dense_lines = "WEIGHTS dense\n" + "\n".join(
            " ".join(str(int(w)) for w in row) for row in dense
        )
        sparse_lines = "WEIGHTS sparse\n" + "\n".join(
            f"WEIGHT {pre} {post} {w}" for pre, post, w in triples
        )
        dense_path = tmp_path / "dense.cfg"
        sparse_path = tmp_path / "sparse.cfg"
        dense_path.write_text(header + dense_lines + "\nEND\n")
        sparse_path.write_text(header + sparse_lines + "\nEND\n")

        sim_dense = build_simulator(load_network(str(dense_path)))
        sim_sparse = build_simulator(load_network(str(sparse_path)))
        assert np.array_equal(sim_dense.synapse_mem.weights, sim_sparse.synapse_mem.weights)

    def test_crlf_tolerated(self, tmp_path):
        config = minimal_config()
        path = tmp_path / "net.cfg"
        save_network(config, str(path))
        crlf = tmp_path / "crlf.cfg"
        crlf.write_bytes(path.read_bytes().replace(b"\n", b"\r\n"))
        loaded = load_network(str(crlf))
        assert loaded.neurons == config.neurons

    def test_neuron_default_fills_unlisted(self, tmp_path):
        path = tmp_path / "net.cfg"
        path.write_text(
            f"{MAGIC}\nNETWORK\nN 8\nP 2\nS 256\nMEMTYPE scm\n"
            "NEURON_DEFAULT 5 1 200 0 0 0 0\n"
            "NEURON 3 9 1 200 0 0 0 0\nEND\n"
        )
        config = load_network(str(path))
        assert config.neurons[0] == NeuronState(5, 1, 200, 0, 0, 0, 0)
        assert config.neurons[3].v_mem == 9


class TestEventFormat:
    def test_empty_file_is_empty_stream(self, tmp_path):
        path = tmp_path / "events.aer"
        path.write_text("")
        assert parse_events(str(path)) == []

    def test_round_trip(self, tmp_path):
        events = [NeuronEvent(3), SynapseEvent(1, 7), LeakEvent(), NeuronEvent(0)]
        path = tmp_path / "events.aer"
        write_events(events, str(path))
        assert parse_events(str(path)) == events

    def test_range_error(self, tmp_path):
        path = tmp_path / "events.aer"
        path.write_text("NEUR 300\n")
        with pytest.raises(FormatError, match="out of range"):
            parse_events(str(path), n_neurons=256)

    def test_malformed_line_number(self, tmp_path):
        path = tmp_path / "events.aer"
        path.write_text("NEUR 1\nSYN nope 2\n")
        with pytest.raises(FormatError, match="events.aer:2"):
            parse_events(str(path))

    def test_headerless_stream_accepted(self, tmp_path):
        path = tmp_path / "events.aer"
        path.write_text("NEUR 1\nLEAK\n")
        assert parse_events(str(path)) == [NeuronEvent(1), LeakEvent()]


class TestSpikeLog:
    def test_round_trip_identity(self, tmp_path):
        spikes = [(17, 0), (254, 3), (0, 3), (31, 9)]
        path = tmp_path / "spikes.txt"
        write_spike_log(spikes, str(path))
        assert parse_spike_log(str(path)) == spikes


class TestTraceCsv:
    def test_rows_and_summary_round_trip(self, tmp_path):
        config = minimal_config(16, 4)
        sim = build_simulator(config)
        events = random_events(random.Random(2), 16, 40)
        trace = sim.run(events, max_events=400)
        path = tmp_path / "trace.csv"
        write_trace(trace, str(path))
        rows, summary = read_trace_rows(str(path))
        assert len(rows) == trace.total_events
        assert int(summary["total_cycles"]) == trace.total_cycles
        assert int(summary["total_sops"]) == trace.total_sops
        assert summary["mode"] == "thor"
        assert sum(r["cycles"] for r in rows) == trace.total_cycles


class TestMemoryImages:
    def test_neuron_image_round_trip(self, tmp_path):
        config = minimal_config(16, 4)
        sim = build_simulator(config)
        path = tmp_path / "neurons.hex"
        save_neuron_image(sim, str(path))

        blank = build_simulator(minimal_config(16, 4))
        blank.neuron_mem.state[:] = 0
        load_neuron_image(blank, str(path))
        assert np.array_equal(blank.neuron_mem.state, sim.neuron_mem.state)

    def test_synapse_image_round_trip(self, tmp_path):
        config = minimal_config(16, 4)
        sim = build_simulator(config)
        path = tmp_path / "synapses.hex"
        save_synapse_image(sim, str(path))

        blank = build_simulator(minimal_config(16, 4))
        blank.synapse_mem.weights[:] = 0
        load_synapse_image(blank, str(path))
        assert np.array_equal(blank.synapse_mem.weights, sim.synapse_mem.weights)

    def test_image_geometry_mismatch_rejected(self, tmp_path):
        sim = build_simulator(minimal_config(16, 4))
        path = tmp_path / "neurons.hex"
        save_neuron_image(sim, str(path))
        other = build_simulator(minimal_config(8, 2))
        with pytest.raises(ConfigError, match="geometry"):
            load_neuron_image(other, str(path))

    def test_word_count_checked(self, tmp_path):
        sim = build_simulator(minimal_config(16, 4))
        path = tmp_path / "neurons.hex"
        save_neuron_image(sim, str(path))
        truncated = path.read_text().splitlines()[:-2]
        path.write_text("\n".join(truncated) + "\n")
        with pytest.raises(FormatError, match="hex words"):
            load_neuron_image(sim, str(path))
