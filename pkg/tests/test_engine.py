import random
from ipaddress import IPv4Address

from hypothesis import given
from hypothesis import strategies as st

from generators import oracle_action, packets, policies, random_packet, random_policy
from xdnp.analyzer import AtomicMatch, compile_policy
from xdnp.engine import MatchResult, SwitchState, evaluate, match_atom, switch_handle
from xdnp.model import Condition, Drop, Field, Forward, NormalForwarding, PacketHeader, Policy, Rule

ip = IPv4Address


def pkt(src, dst, sport=0, dport=0):
    return PacketHeader(ip(src), ip(dst), sport, dport)


def test_match_atom():
    assert match_atom(AtomicMatch(Field.DST_IP, ip("10.0.0.2")), pkt("10.0.0.1", "10.0.0.2"))
    assert match_atom(AtomicMatch(Field.SRC_PORT, 23), pkt("10.0.0.1", "10.0.0.2", 23, 80))
    assert not match_atom(AtomicMatch(Field.SRC_IP, ip("192.168.0.1")), pkt("10.0.0.3", "10.0.0.2"))
    assert not match_atom(AtomicMatch(Field.DST_PORT, 23), pkt("10.0.0.1", "10.0.0.2", 23, 80))


def test_evaluate_demo(demo_cp):
    assert evaluate(demo_cp, pkt("10.0.0.3", "10.0.0.2")) == MatchResult(Forward(1), 0, 0)
    assert evaluate(demo_cp, pkt("192.168.0.1", "10.0.0.9")) == MatchResult(Forward(1), 0, 1)
    assert evaluate(demo_cp, pkt("10.0.0.3", "10.0.0.1", 23)) == MatchResult(Drop(), 1, 0)
    miss = evaluate(demo_cp, pkt("10.0.0.3", "10.0.0.1"))
    assert miss.is_default and miss.action == NormalForwarding()
    assert str(miss) == "default:normal"


def test_lowest_clause_reported(demo_cp):
    # both clauses of rule 1 hold
    assert evaluate(demo_cp, pkt("192.168.0.1", "10.0.0.2")).matched_clause == 0


def test_empty_policy_uses_default():
    for default in (NormalForwarding(), Drop()):
        cp = compile_policy(Policy("E"), default)
        r = evaluate(cp, pkt("10.0.0.1", "10.0.0.2"))
        assert r == MatchResult(default) and r.matched_clause is None


def test_first_match_wins():
    cond = Condition(Field.DST_PORT, 80)
    cp = compile_policy(Policy("F", [Rule([cond], Forward(7)), Rule([cond], Drop())]))
    assert evaluate(cp, pkt("10.0.0.1", "10.0.0.2", 1, 80)) == MatchResult(Forward(7), 0, 0)


def test_evaluate_matches_oracle_seeded():
    rng = random.Random(3)
    for _ in range(100):
        policy = random_policy(rng)
        cp = compile_policy(policy)
        for _ in range(100):
            p = random_packet(rng)
            action, index = oracle_action(policy, p)
            got = evaluate(cp, p)
            assert (got.action if index is not None else None, got.matched_entry) == (action, index)


@given(policies(), packets)
def test_evaluate_matches_oracle(policy, p):
    action, index = oracle_action(policy, p)
    got = evaluate(compile_policy(policy), p)
    assert got.matched_entry == index
    if index is not None:
        assert got.action == action


def test_same_packet_twice(demo_cp):
    state = SwitchState()
    p = pkt("10.0.0.3", "10.0.0.2")
    first, state = switch_handle(state, demo_cp, p)
    assert (state.stats.packet_ins, state.stats.table_hits) == (1, 0)
    second, state = switch_handle(state, demo_cp, p)
    assert (state.stats.packet_ins, state.stats.table_hits) == (1, 1)
    assert first == second == Forward(1)


def test_fresh_state_installs(demo_cp):
    _, state = switch_handle(SwitchState(), demo_cp, pkt("10.0.0.1", "10.0.0.3"))
    assert state.stats.packet_ins == state.stats.installs == len(state.flow_table) == 1


def test_normal_forwarding_resolved_before_install(demo_cp):
    state = SwitchState()
    action = state.handle(demo_cp, pkt("10.0.0.1", "10.0.0.3"), lambda p: 3)
    assert action == Forward(3)
    assert list(state.flow_table.values()) == [Forward(3)]
    assert state.handle(demo_cp, pkt("10.0.0.1", "10.0.0.9"), lambda p: None) == Drop()
    assert state.handle(demo_cp, pkt("10.0.0.1", "10.0.0.8")) == NormalForwarding()


def cache_transparent(cp, trace):
    state = SwitchState()
    cached = [state.handle(cp, p) for p in trace]
    direct = [evaluate(cp, p).action for p in trace]
    s = state.stats
    return (cached == direct
            and len(state.flow_table) == len(set(trace)) == s.installs
            and s.installs <= s.packet_ins
            and s.table_hits + s.packet_ins == s.packets_total == len(trace))


@given(policies(), st.lists(packets, min_size=1, max_size=20).flatmap(
    lambda pool: st.lists(st.sampled_from(pool), max_size=60)))
def test_cache_transparency(policy, trace):
    assert cache_transparent(compile_policy(policy), trace)
