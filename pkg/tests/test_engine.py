import dataclasses
import json
import math
import random
from collections import Counter

import pytest

from fersml.engine import (
    AWAY,
    HOME,
    PitchConfig,
    attempt_shot,
    events_jsonl,
    keep_probability,
    mirror,
    place_formation,
    resolve_duel,
    simulate_match,
    trace_csv,
)
from fersml.errors import InvalidDocument, UnresolvedPlayer, WrongPlayerCount
from fersml.model import ProbTable
from fersml.tournament import apply_setting

SHORT = PitchConfig(regulation_ticks=6000, extra_time_ticks=2000)


@pytest.fixture(scope="module")
def formation(sample_doc):
    return sample_doc.simulation.tactics[0]


class TestPlaceFormation:
    def test_home_keeper(self, formation):
        assert place_formation(formation, HOME)[0] == (10, 320)

    def test_away_keeper(self, formation):
        assert place_formation(formation, AWAY)[0] == (1014, 320)

    def test_nine_positions(self, formation):
        short = dataclasses.replace(formation, positions=formation.positions[:9])
        with pytest.raises(WrongPlayerCount):
            place_formation(short, HOME)

    def test_mirror_twice_is_identity(self, formation):
        for x, y in place_formation(formation, AWAY):
            assert mirror(*mirror(x, y)) == (x, y)
        assert [mirror(*c) for c in place_formation(formation, AWAY)] == place_formation(formation, HOME)


class TestDuel:
    def test_keep_probability(self):
        assert keep_probability(90, 90) == 0.5
        assert keep_probability(100, 0) == 1.0
        assert keep_probability(0, 0) == 0.5
        assert keep_probability(90, 45) == pytest.approx(2 / 3)

    def test_equal_scores(self, sample_doc):
        rng = random.Random(5)
        doc = apply_setting(sample_doc, {"skills": {"football_sense": 90, "ball_technique": 90, "quickness": 90}})
        wins = sum(resolve_duel(doc, doc, "dribbling", 10, 10, rng) == "attacker_keeps" for _ in range(20000))
        assert wins / 20000 == pytest.approx(0.5, abs=0.015)

    def test_two_thirds_monte_carlo(self, sample_doc):
        att = apply_setting(sample_doc, {"skills": {"football_sense": 90, "ball_technique": 90, "quickness": 90}})
        dfn = apply_setting(sample_doc, {"skills": {"football_sense": 45, "ball_technique": 45, "quickness": 45}})
        rng = random.Random(11)
        n = 100_000
        keeps = sum(resolve_duel(att, dfn, "shielding", 10, 10, rng) == "attacker_keeps" for _ in range(n))
        assert keeps / n == pytest.approx(2 / 3, abs=0.01)


class TestShot:
    def test_close_range(self, sample_doc):
        avatar = sample_doc.avatars[0]
        rng = random.Random(1)
        n = 100_000
        goals = sum(attempt_shot(avatar, 5, rng) == "goal" for _ in range(n))
        assert goals / n == pytest.approx(0.89, abs=0.01)

    def test_single_anchor_clamp(self, sample_doc):
        avatar = sample_doc.avatars[0]
        est = dataclasses.replace(avatar.estimations, shutting_goal=ProbTable(((5.0, 0.89),)))
        avatar = dataclasses.replace(avatar, estimations=est)
        rng = random.Random(2)
        goals = sum(attempt_shot(avatar, 0, rng) == "goal" for _ in range(50_000))
        assert goals / 50_000 == pytest.approx(0.89, abs=0.01)

    def test_sixteen_meters(self, sample_doc):
        rng = random.Random(3)
        n = 100_000
        goals = sum(attempt_shot(sample_doc.avatars[0], 16, rng) == "goal" for _ in range(n))
        assert goals / n == pytest.approx(0.84, abs=0.01)

    def test_default_table(self):
        rng = random.Random(4)
        goals = sum(attempt_shot(None, 30, rng) == "goal" for _ in range(20_000))
        assert goals / 20_000 == pytest.approx(0.47, abs=0.015)


class TestSimulateMatch:
    def test_deterministic(self, sample_doc):
        a = simulate_match(sample_doc, sample_doc, seed=42)
        b = simulate_match(sample_doc, sample_doc, seed=42)
        assert a == b
        assert a.digest() == b.digest()

    def test_seed_matters(self, sample_doc):
        a = simulate_match(sample_doc, sample_doc, SHORT, seed=1)
        b = simulate_match(sample_doc, sample_doc, SHORT, seed=2)
        assert a != b

    def test_zero_ticks(self, sample_doc):
        r = simulate_match(sample_doc, sample_doc, PitchConfig(regulation_ticks=0), seed=9)
        assert r.score == (0, 0)
        assert len(r.ball_trace) == 0

    def test_trace_length_and_bounds(self, sample_doc):
        r = simulate_match(sample_doc, sample_doc, SHORT, seed=7)
        assert r.ball_trace.shape == (6000, 5)
        t = r.ball_trace
        assert t[:, [0, 2]].min() >= 0 and t[:, [0, 2]].max() <= 1024
        assert t[:, [1, 3]].min() >= 0 and t[:, [1, 3]].max() <= 640
        assert set(t[:, 4].tolist()) <= {0, 1}

    def test_goal_accounting_and_order(self, sample_doc):
        for seed in range(5):
            r = simulate_match(sample_doc, sample_doc, SHORT, seed=seed, knockout=True)
            goals = Counter(e.team for e in r.events if e.kind == "goal")
            assert (goals[HOME], goals[AWAY]) == r.score
            ticks = [e.tick for e in r.events]
            assert ticks == sorted(ticks)

    def test_knockout_has_winner(self, sample_doc):
        pitch = PitchConfig(regulation_ticks=300, extra_time_ticks=100)
        for seed in range(20):
            r = simulate_match(sample_doc, sample_doc, pitch, seed=seed, knockout=True)
            assert r.winner in (HOME, AWAY)
            if r.score[0] == r.score[1]:
                assert r.shootout is not None
                assert len(r.ball_trace) == 400

    def test_level_knockout_plays_extra_time(self, sample_doc):
        r = simulate_match(sample_doc, sample_doc, PitchConfig(regulation_ticks=0, extra_time_ticks=0),
                           seed=3, knockout=True)
        assert r.score == (0, 0)
        assert r.shootout is not None and r.shootout[0] != r.shootout[1]

    def test_strict_lineup_propagates(self, sample_doc):
        with pytest.raises(UnresolvedPlayer):
            simulate_match(sample_doc, sample_doc, SHORT, seed=1, strict_lineup=True)

    def test_invalid_document(self, sample_doc):
        person = dataclasses.replace(sample_doc.avatars[0].person, age=0)
        bad = dataclasses.replace(sample_doc, avatars=(dataclasses.replace(sample_doc.avatars[0], person=person),))
        with pytest.raises(InvalidDocument):
            simulate_match(bad, sample_doc, SHORT)

    def test_home_away_symmetry(self, sample_doc):
        # Identical sides: home and away goal means agree within two standard errors.
        pitch = PitchConfig(regulation_ticks=18000)
        diffs = []
        for seed in range(200):
            r = simulate_match(sample_doc, sample_doc, pitch, seed=seed)
            diffs.append(r.score[0] - r.score[1])
        mean = sum(diffs) / len(diffs)
        sd = math.sqrt(sum((d - mean) ** 2 for d in diffs) / (len(diffs) - 1))
        assert abs(mean) <= 2 * sd / math.sqrt(len(diffs))


class TestExports:
    def test_jsonl(self, sample_doc):
        r = simulate_match(sample_doc, sample_doc, SHORT, seed=5)
        lines = events_jsonl(r.events).splitlines()
        assert len(lines) == len(r.events)
        first = json.loads(lines[0])
        assert set(first) == {"tick", "kind", "team", "player_id", "detail"}
        assert first["kind"] == "kickoff"

    def test_trace_csv(self, sample_doc):
        r = simulate_match(sample_doc, sample_doc, PitchConfig(regulation_ticks=50), seed=5)
        lines = trace_csv(r.ball_trace).splitlines()
        assert lines[0] == "tick,lx,ly,lcx,lcy,possession"
        assert len(lines) == 51
        assert lines[1].split(",")[-1] in ("home", "away")
