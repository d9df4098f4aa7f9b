import random
from dataclasses import replace

import pytest

from oracles import naive_effective_scope, scope_to_plain_dict
from ztpm.delegation import (
    ChainViolation,
    ClockRegressionError,
    DelegationChain,
    DelegationLink,
    InvalidChainError,
    SUCCESS,
    TrustConfig,
    TrustState,
    anomaly,
    effective_scope,
    entry_contains,
    initial_trust,
    scope_contains,
    scope_intersection,
    update_trust,
    validate_chain,
)
from ztpm.model import ScopeEntry, ScopeSet
from ztpm.primitives import AID_2, AID_3, AID_4, AID_5, CATP_1
from ztpm.sim import topology

TRUST_CFG = TrustConfig()


def _scope(speed_hi, max_pit=3, tools=("move_arm",)):
    entries = {}
    for tool in tools:
        entries[tool] = ScopeEntry(bounds={"speed": (0.0, speed_hi)}, max_pit=max_pit)
    return ScopeSet(entries=entries)


def _chain(*scopes, root="operator", attested=True):
    hops = ["orchestrator", "robotic", "vision", "config"]
    links = []
    from_id = root
    for i, scope in enumerate(scopes):
        links.append(DelegationLink(from_id, hops[i], scope, attested=attested))
        from_id = hops[i]
    return DelegationChain(id="c", root=root, links=tuple(links))


# -- validation ------------------------------------------------------------------


def test_valid_narrowing_chain(descriptor):
    chain = topology.chain_for(topology.ROBOTIC)
    assert validate_chain(chain, descriptor) == []


def test_widening_scope_reports_escalation(descriptor):
    chain = _chain(_scope(0.3), _scope(0.5))
    violations = validate_chain(chain, descriptor)
    assert any(v.primitive == AID_4 and "escalation at link 2" in v.message for v in violations)


def test_root_must_be_human(descriptor):
    chain = DelegationChain(
        id="c",
        root="orchestrator",
        links=(DelegationLink("orchestrator", "robotic", _scope(0.3)),),
    )
    violations = validate_chain(chain, descriptor)
    assert any(v.primitive == AID_2 and "not in H" in v.message for v in violations)


def test_revoked_link_flagged(descriptor):
    chain = _chain(_scope(0.5), _scope(0.3))
    revoked = replace(chain, links=(chain.links[0], replace(chain.links[1], revoked=True)))
    assert any(v.primitive == AID_3 for v in validate_chain(revoked, descriptor))


def test_unattested_link_flagged(descriptor):
    chain = _chain(_scope(0.5), _scope(0.3))
    stale = replace(chain, links=(chain.links[0], replace(chain.links[1], attested=False)))
    assert any(v.primitive == CATP_1 for v in validate_chain(stale, descriptor))


def test_depth_limit(descriptor):
    link = DelegationLink("operator", "orchestrator", _scope(0.5))
    hop = DelegationLink("orchestrator", "orchestrator", _scope(0.5))
    chain = DelegationChain(id="c", root="operator", links=(link,) + (hop,) * 6)
    assert any(v.primitive == AID_5 for v in validate_chain(chain, descriptor))


def test_broken_contiguity_flagged(descriptor):
    links = (
        DelegationLink("operator", "orchestrator", _scope(0.5)),
        DelegationLink("vision", "robotic", _scope(0.3)),  # wrong issuer
    )
    chain = DelegationChain(id="c", root="operator", links=links)
    assert any("expected" in v.message for v in validate_chain(chain, descriptor))


def test_non_transitivity(descriptor):
    # Holding operator->orchestrator and a separate orchestrator->robotic
    # grant does not let anyone synthesize a direct operator->robotic link:
    # the fabricated link is unattested, and a chain rooted at an agent is
    # invalid outright.
    fabricated = DelegationChain(
        id="composite",
        root="operator",
        links=(DelegationLink("operator", "robotic", _scope(0.3), attested=False),),
    )
    assert any(v.primitive == CATP_1 for v in validate_chain(fabricated, descriptor))

    agent_rooted = DelegationChain(
        id="tail",
        root="orchestrator",
        links=(DelegationLink("orchestrator", "robotic", _scope(0.3)),),
    )
    assert any(v.primitive == AID_2 for v in validate_chain(agent_rooted, descriptor))


# -- effective scope -----------------------------------------------------------------


def test_single_link_scope_is_identity():
    scope = _scope(0.5)
    chain = _chain(scope)
    assert effective_scope(chain) == scope


def test_two_link_bounds_intersect():
    chain = _chain(_scope(0.5), _scope(0.3))
    eff = effective_scope(chain)
    assert eff.entries["move_arm"].bounds["speed"] == (0.0, 0.3)


def test_effective_scope_requires_validation_flag():
    chain = _chain(_scope(0.5))
    with pytest.raises(InvalidChainError):
        effective_scope(chain, validated=False)


def test_effective_scope_subset_of_every_link():
    chain = _chain(_scope(0.5, max_pit=3), _scope(0.3, max_pit=2))
    eff = effective_scope(chain)
    for link in chain.links:
        assert scope_contains(link.scope, eff)


def _random_entry(rng):
    lo = round(rng.uniform(0.0, 0.3), 3)
    hi = round(rng.uniform(lo + 0.05, 1.0), 3)
    allowed = {}
    if rng.random() < 0.5:
        allowed["action"] = tuple(sorted(rng.sample(["open", "close", "hold"], k=rng.randint(1, 3))))
    return ScopeEntry(bounds={"speed": (lo, hi)}, allowed=allowed, max_pit=rng.randint(1, 4))


def _narrow(entry, rng):
    lo, hi = entry.bounds["speed"]
    nlo = round(rng.uniform(lo, (lo + hi) / 2), 3)
    nhi = round(rng.uniform(nlo + 0.01, hi), 3)
    allowed = {k: tuple(sorted(rng.sample(list(v), k=rng.randint(1, len(v))))) for k, v in entry.allowed.items()}
    return ScopeEntry(
        bounds={"speed": (nlo, nhi)},
        allowed=allowed,
        max_pit=rng.randint(1, entry.max_pit),
    )


def test_effective_scope_matches_naive_fold_on_100_random_chains(descriptor):
    rng = random.Random(5150)
    for _ in range(100):
        tools = rng.sample(["move_arm", "gripper", "configure", "read_sensor"], k=rng.randint(1, 3))
        top_entries = {t: _random_entry(rng) for t in tools}
        depth = rng.randint(1, 3)
        scopes = [ScopeSet(entries=dict(top_entries))]
        for _ in range(depth - 1):
            parent = scopes[-1]
            child_entries = {}
            for tool, entry in parent.entries.items():
                if rng.random() < 0.85:  # occasionally drop a tool entirely
                    child_entries[tool] = _narrow(entry, rng)
            scopes.append(ScopeSet(entries=child_entries))
        chain = _chain(*scopes)
        expected = naive_effective_scope(chain)
        got = scope_to_plain_dict(effective_scope(chain))
        assert got == expected


def test_narrowing_chain_effective_scope_equals_last_link():
    chain = _chain(_scope(0.5, max_pit=3), _scope(0.3, max_pit=2))
    assert effective_scope(chain) == chain.links[-1].scope


def test_scope_intersection_algebra():
    rng = random.Random(2718)
    for _ in range(50):
        tools = rng.sample(["move_arm", "gripper", "configure"], k=rng.randint(1, 3))
        a = ScopeSet(entries={t: _random_entry(rng) for t in tools})
        b = ScopeSet(
            entries={t: _random_entry(rng) for t in rng.sample(tools, k=rng.randint(1, len(tools)))}
        )
        ab = scope_intersection(a, b)
        ba = scope_intersection(b, a)
        # commutative up to bound arithmetic, idempotent, and contained in
        # both operands wherever bounds stay well formed
        assert {t: e.max_pit for t, e in ab.entries.items()} == {
            t: e.max_pit for t, e in ba.entries.items()
        }
        for tool_id, entry in ab.entries.items():
            assert ba.entries[tool_id].bounds == entry.bounds
        assert scope_intersection(a, a) == a
        well_formed = all(
            lo <= hi for e in ab.entries.values() for lo, hi in e.bounds.values()
        )
        if well_formed:
            assert scope_contains(a, ab)
            assert scope_contains(b, ab)
        assert scope_intersection(ab, ab) == ab


def test_entry_containment_rules():
    outer = ScopeEntry(bounds={"speed": (0.0, 0.5)}, allowed={"action": ("open", "close")}, max_pit=3)
    inner = ScopeEntry(bounds={"speed": (0.1, 0.3)}, allowed={"action": ("close",)}, max_pit=2)
    assert entry_contains(outer, inner)
    assert not entry_contains(inner, outer)
    unbounded = ScopeEntry(bounds={}, allowed={}, max_pit=2)
    assert not entry_contains(outer, unbounded)  # missing bound means wider


# -- trust ---------------------------------------------------------------------------


def test_success_from_neutral():
    state = TrustState(score=0.5, last_update_tick=0)
    assert update_trust(state, SUCCESS, 0, TRUST_CFG).score == pytest.approx(0.525)


def test_anomaly_halves():
    state = TrustState(score=0.8, last_update_tick=0)
    assert update_trust(state, anomaly(0.5), 0, TRUST_CFG).score == pytest.approx(0.4)


def test_decay_one_half_life():
    state = TrustState(score=0.9, last_update_tick=0)
    got = update_trust(state, None, TRUST_CFG.half_life_ticks, TRUST_CFG)
    assert got.score == pytest.approx(0.7)


def test_clock_regression_rejected():
    state = TrustState(score=0.5, last_update_tick=10)
    with pytest.raises(ClockRegressionError):
        update_trust(state, SUCCESS, 9, TRUST_CFG)


def test_trust_stays_in_unit_interval():
    rng = random.Random(8)
    state = initial_trust(TRUST_CFG)
    tick = 0
    for _ in range(500):
        tick += rng.randint(0, 20)
        event = rng.choice([SUCCESS, anomaly(rng.random()), None])
        state = update_trust(state, event, tick, TRUST_CFG)
        assert 0.0 <= state.score <= 1.0


def test_decay_contracts_toward_baseline():
    cfg = TRUST_CFG
    for start in (0.05, 0.3, 0.7, 0.95):
        state = TrustState(score=start, last_update_tick=0)
        later = update_trust(state, None, 50, cfg)
        assert abs(later.score - cfg.baseline) <= abs(start - cfg.baseline)


def test_history_ring_capped():
    state = initial_trust(TRUST_CFG)
    for tick in range(40):
        state = update_trust(state, SUCCESS, tick, TRUST_CFG)
    assert len(state.history) == TRUST_CFG.history_cap
