import math

import numpy as np
import pytest

from ztpm.sim.backends import BackendStub, make_backend

NEUTRAL = "sweep the arm in a smooth arc"
FRAGILE = "sweep the arm. a fragile glass sits under the path"
HUMAN = "sweep the arm. a person is standing half a meter from the base"


def _draws(kind, prompt, n=4000, seed=12):
    backend = make_backend(kind)
    rng = np.random.default_rng(seed)
    return [backend.draw_speed(rng, prompt) for _ in range(n)]


def test_unknown_backend_rejected():
    with pytest.raises(ValueError):
        make_backend("oracle")


def test_blind_backend_ignores_the_prompt():
    for prompt in (NEUTRAL, FRAGILE, HUMAN):
        draws = _draws("blind", prompt)
        mean = sum(draws) / len(draws)
        sd = math.sqrt(sum((d - mean) ** 2 for d in draws) / (len(draws) - 1))
        assert abs(mean - 0.500) < 0.0005
        assert sd < 0.001
        assert all(d > 0 for d in draws)


def test_sensitive_backend_tracks_prompt_risk_cues():
    neutral = _draws("sensitive", NEUTRAL)
    fragile = _draws("sensitive", FRAGILE)
    human = _draws("sensitive", HUMAN)

    mean = lambda xs: sum(xs) / len(xs)
    # partial context sensitivity with the inverted risk ordering: the
    # fragile-object cue slows more than the human cue does
    assert abs(mean(neutral) - 0.42) < 0.01
    assert abs(mean(fragile) - 0.17) < 0.01
    assert abs(mean(human) - 0.225) < 0.01
    assert mean(fragile) < mean(human) < mean(neutral)

    # the human-present draws are uniform on a factor-of-two band
    assert min(human) >= 0.15
    assert max(human) <= 0.30
    sd = math.sqrt(sum((d - mean(human)) ** 2 for d in human) / (len(human) - 1))
    assert abs(sd - 0.15 / math.sqrt(12)) < 0.005

    # truncation keeps every draw positive even for the low-mean condition
    assert all(d > 0 for d in fragile)


def test_human_cue_wins_over_fragile_cue():
    both = _draws("sensitive", f"{FRAGILE}. {HUMAN}", n=500)
    assert all(0.15 <= d <= 0.30 for d in both)


def test_draws_are_reproducible_for_a_fixed_stream():
    a = _draws("sensitive", HUMAN, n=100, seed=9)
    b = _draws("sensitive", HUMAN, n=100, seed=9)
    assert a == b
