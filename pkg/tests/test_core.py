"""Neuron dynamics and plasticity rule tests.

Derived expectations come from independent in-test oracles: exhaustive
enumeration for the saturating arithmetic and a standalone rule table
for the plasticity branches.
"""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thorsim.core import (
    STATE_BYTES,
    LifParams,
    NeuronState,
    ScalarNetwork,
    calcium_update,
    lif_integrate,
    lif_leak,
    scalar_reference_step,
    sdsp_update,
)
from thorsim.events import LeakEvent, NeuronEvent, SynapseEvent


def make_state(**overrides):
    base = dict(
        v_mem=0, leak=0, v_thresh=255, ca_theta_mem=0, ca_level=0, ca_theta_lo=0, ca_theta_hi=0
    )
    base.update(overrides)
    return NeuronState(**base)


states = st.builds(
    NeuronState,
    v_mem=st.integers(0, 255),
    leak=st.integers(0, 255),
    v_thresh=st.integers(0, 255),
    ca_theta_mem=st.integers(0, 255),
    ca_level=st.integers(0, 255),
    ca_theta_lo=st.integers(0, 255),
    ca_theta_hi=st.integers(0, 255),
)


class TestNeuronState:
    def test_serialized_size_and_byte_order(self):
        s = NeuronState(1, 2, 3, 4, 5, 6, 7)
        raw = s.to_bytes()
        assert len(raw) == STATE_BYTES == 7
        # byte 0 = v_mem, 1 = leak, 2 = threshold, 4 = calcium level.
        assert raw[0] == 1
        assert raw[1] == 2
        assert raw[2] == 3
        assert raw[4] == 5
        assert NeuronState.from_bytes(raw) == s

    def test_rejects_out_of_range_fields(self):
        with pytest.raises(ValueError):
            NeuronState(256, 0, 0, 0, 0, 0, 0)
        with pytest.raises(ValueError):
            make_state(ca_level=-1)


class TestLifIntegrate:
    def test_zero_input(self):
        res = lif_integrate(make_state(v_mem=0, v_thresh=10), 0)
        assert res.new_state.v_mem == 0
        assert not res.spiked

    def test_fire_and_reset(self):
        # 8 + 5 = 13 >= 10
        res = lif_integrate(make_state(v_mem=8, v_thresh=10), 5)
        assert res.spiked
        assert res.new_state.v_mem == 0

    def test_exhaustive_against_scalar_arithmetic(self):
        # Oracle: plain-integer saturating add then threshold compare.
        for v in range(0, 256, 3):
            for w in range(16):
                for thresh in (0, 1, 100, 255):
                    expected_v = min(v + w, 255)
                    expected_spike = expected_v >= thresh
                    res = lif_integrate(make_state(v_mem=v, v_thresh=thresh), w)
                    assert res.spiked == expected_spike, (v, w, thresh)
                    assert res.new_state.v_mem == (0 if expected_spike else expected_v)

    def test_saturation_then_fire(self):
        res = lif_integrate(make_state(v_mem=250, v_thresh=255), 15)
        assert res.spiked
        assert res.new_state.v_mem == 0

    def test_rejects_bad_weight(self):
        with pytest.raises(ValueError):
            lif_integrate(make_state(), 16)

    @given(states, st.integers(0, 15))
    @settings(max_examples=200)
    def test_read_only_bytes_invariant(self, state, w):
        res = lif_integrate(state, w)
        a, b = state.to_bytes(), res.new_state.to_bytes()
        for i in (1, 2, 3, 5, 6):
            assert a[i] == b[i]
        assert 0 <= res.new_state.v_mem <= 255
        if res.spiked:
            assert res.new_state.v_mem == 0


class TestLifLeak:
    def test_floor_at_zero(self):
        assert lif_leak(make_state(v_mem=0, leak=5), learning=False).v_mem == 0

    def test_scalar_subtraction(self):
        # Oracle: max(0, v - leak) over a grid.
        for v in range(0, 256, 7):
            for leak in range(0, 256, 11):
                out = lif_leak(make_state(v_mem=v, leak=leak), learning=False)
                assert out.v_mem == max(0, v - leak)

    def test_calcium_floor(self):
        out = lif_leak(make_state(ca_level=0), learning=True)
        assert out.ca_level == 0

    def test_calcium_decay_only_with_learning(self):
        s = make_state(ca_level=7)
        assert lif_leak(s, learning=True).ca_level == 6
        assert lif_leak(s, learning=False).ca_level == 7

    def test_idempotent_at_floor(self):
        s = make_state(v_mem=0, ca_level=0, leak=9)
        assert lif_leak(s, learning=True) == s


class TestCalciumUpdate:
    def test_increment(self):
        assert calcium_update(make_state(ca_level=3), True).ca_level == 4

    def test_saturation(self):
        assert calcium_update(make_state(ca_level=255), True).ca_level == 255

    def test_identity_without_spike(self):
        s = make_state(ca_level=3)
        assert calcium_update(s, False) is s

    def test_rejected_without_learning(self):
        with pytest.raises(ValueError):
            calcium_update(make_state(), True, learning=False)


def sdsp_oracle(w, v_mem, theta_mem, ca, lo, hi):
    """Independent restatement of the rule table."""
    if lo <= ca < hi:
        if v_mem >= theta_mem:
            return min(15, w + 1)
        return max(0, w - 1)
    return w


class TestSdspUpdate:
    def test_upper_saturation(self):
        post = make_state(v_mem=200, ca_theta_mem=100, ca_level=5, ca_theta_lo=2, ca_theta_hi=10)
        assert sdsp_update(15, post) == 15

    def test_potentiation(self):
        post = make_state(v_mem=200, ca_theta_mem=100, ca_level=5, ca_theta_lo=2, ca_theta_hi=10)
        assert sdsp_update(7, post) == 8

    def test_outside_calcium_window(self):
        post = make_state(v_mem=200, ca_theta_mem=100, ca_level=0, ca_theta_lo=2, ca_theta_hi=10)
        assert sdsp_update(7, post) == 7

    def test_rule_table_enumeration(self):
        for w in (0, 1, 7, 14, 15):
            for v_mem in (0, 99, 100, 255):
                for ca in (0, 2, 5, 9, 10, 255):
                    post = make_state(
                        v_mem=v_mem, ca_theta_mem=100, ca_level=ca, ca_theta_lo=2, ca_theta_hi=10
                    )
                    assert sdsp_update(w, post) == sdsp_oracle(w, v_mem, 100, ca, 2, 10)

    @given(st.integers(0, 15), states)
    @settings(max_examples=300)
    def test_output_always_in_range(self, w, post):
        out = sdsp_update(w, post)
        assert 0 <= out <= 15
        assert out == sdsp_oracle(
            w, post.v_mem, post.ca_theta_mem, post.ca_level, post.ca_theta_lo, post.ca_theta_hi
        )


@given(states, st.lists(st.tuples(st.sampled_from(["sop", "leak", "ca"]), st.integers(0, 15)), max_size=30))
@settings(max_examples=150)
def test_read_only_bytes_survive_any_op_sequence(state, ops):
    original = state.to_bytes()
    for op, w in ops:
        if op == "sop":
            state = lif_integrate(state, w).new_state
        elif op == "leak":
            state = lif_leak(state, learning=True)
        else:
            state = calcium_update(state, post_spiked=bool(w % 2), learning=True)
    final = state.to_bytes()
    for i in (1, 2, 3, 5, 6):
        assert original[i] == final[i]


def quiet_network(n=4, p=2, learning=True, thresh=10, w=0):
    params = LifParams(n, p, learning)
    neurons = [make_state(v_thresh=thresh) for _ in range(n)]
    weights = [[w] * n for _ in range(n)]
    return ScalarNetwork(params, neurons, weights)


class TestScalarReference:
    def test_zero_weight_neuron_event(self):
        net = quiet_network(w=0, thresh=10)
        outcome = scalar_reference_step(net, NeuronEvent(0))
        assert outcome.spikes == []
        assert outcome.sop_count == 4
        assert all(s.v_mem == 0 for s in net.neurons)

    def test_all_spike_hand_instance(self):
        # N=4, all weights 15, thresholds 10, v_mem 0: every SOP lands 15 >= 10.
        net = quiet_network(w=15, thresh=10)
        outcome = scalar_reference_step(net, NeuronEvent(2))
        assert outcome.spikes == [0, 1, 2, 3]
        assert all(s.v_mem == 0 for s in net.neurons)

    def test_synapse_event_touches_one_neuron(self):
        net = quiet_network(w=3, thresh=100)
        before = [s.v_mem for s in net.neurons]
        outcome = scalar_reference_step(net, SynapseEvent(2, 3))
        assert outcome.sop_count == 1
        after = [s.v_mem for s in net.neurons]
        assert after[3] == before[3] + 3
        assert after[:3] == before[:3]

    def test_neuron_event_performs_n_sops(self):
        net = quiet_network(n=8, p=2, w=1, thresh=200)
        assert scalar_reference_step(net, NeuronEvent(0)).sop_count == 8

    def test_leak_event(self):
        params = LifParams(4, 2, False)
        neurons = [make_state(v_mem=100, leak=5) for _ in range(4)]
        net = ScalarNetwork(params, neurons, [[0] * 4 for _ in range(4)])
        scalar_reference_step(net, LeakEvent())
        assert all(s.v_mem == 95 for s in net.neurons)

    def test_unknown_event_rejected(self):
        net = quiet_network()
        with pytest.raises(TypeError):
            scalar_reference_step(net, "not-an-event")

    def test_learning_disabled_leaves_calcium_block_alone(self):
        params = LifParams(4, 2, False)
        neurons = [make_state(v_thresh=5, ca_level=9) for _ in range(4)]
        weights = [[15] * 4 for _ in range(4)]
        net = ScalarNetwork(params, neurons, weights)
        outcome = scalar_reference_step(net, NeuronEvent(0))
        assert outcome.spikes == [0, 1, 2, 3]
        assert all(s.ca_level == 9 for s in net.neurons)
        assert net.weights == [[15] * 4 for _ in range(4)]
