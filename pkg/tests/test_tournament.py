import json

import pytest

from fersml.engine import HOME, PitchConfig
from fersml.model import Factor
from fersml.tournament import (
    BRACKET_LABELS,
    Team,
    apply_setting,
    default_teams,
    match_seed,
    repeat_world_cups,
    simulate_world_cup,
)

SHORT = PitchConfig(regulation_ticks=3000, extra_time_ticks=1000)


@pytest.fixture(scope="module")
def teams(sample_doc):
    return default_teams(sample_doc)


@pytest.fixture(scope="module")
def cup(teams):
    return simulate_world_cup(teams, SHORT, seed=77)


def test_bracket_length(cup):
    assert len(cup.bracket) == 8
    assert len(BRACKET_LABELS) == 8


def test_every_match_decided(cup):
    assert all(m.winner is not None for m in cup.bracket)


def test_pairings_follow_bracket(cup):
    def winner(i):
        h, a = cup.pairings[i]
        return h if cup.bracket[i].winner == HOME else a

    def loser(i):
        h, a = cup.pairings[i]
        return a if cup.bracket[i].winner == HOME else h

    assert cup.pairings[:4] == [(0, 1), (2, 3), (4, 5), (6, 7)]
    assert set(cup.pairings[4]) == {winner(0), winner(1)}
    assert set(cup.pairings[5]) == {winner(2), winner(3)}
    assert set(cup.pairings[6]) == {loser(4), loser(5)}
    assert set(cup.pairings[7]) == {winner(4), winner(5)}
    assert cup.champion == winner(7)


def test_deterministic(teams, cup):
    assert simulate_world_cup(teams, SHORT, seed=77) == cup


def test_total_from_event_logs(cup):
    goals = sum(1 for m in cup.bracket for e in m.events if e.kind == "goal")
    assert cup.total_goals == goals == sum(sum(m.score) for m in cup.bracket)


def test_match_seeds_distinct():
    seeds = {match_seed(s, i) for s in range(20) for i in range(8)}
    assert len(seeds) == 160


def test_repeat_count(teams):
    totals = repeat_world_cups(teams, SHORT, base_seed=5, count=3)
    assert len(totals) == 3
    assert all(isinstance(t, int) and t >= 0 for t in totals)
    assert totals[1] == simulate_world_cup(teams, SHORT, seed=6).total_goals


def test_repeat_single(teams):
    assert repeat_world_cups(teams, SHORT, 9, 1) == [simulate_world_cup(teams, SHORT, seed=9).total_goals]


def test_repeat_rejects_zero(teams):
    with pytest.raises(ValueError):
        repeat_world_cups(teams, SHORT, 0, 0)


def test_needs_eight(teams):
    with pytest.raises(ValueError):
        simulate_world_cup(teams[:7], SHORT)


def test_summary_json(cup):
    data = json.loads(cup.to_json())
    assert data["total_goals"] == cup.total_goals
    assert [m["match"] for m in data["bracket"]] == list(BRACKET_LABELS)
    assert data["champion"].startswith("team ")


def test_apply_setting(sample_doc):
    doc = apply_setting(sample_doc, {"skills": {"quickness": 11},
                                     "impact_of_skills": {"tackling": [["quickness", 100]]}})
    assert doc.avatars[0].estimations.skills.quickness == 11
    assert doc.avatars[0].estimations.skills.football_sense == 97
    assert doc.simulation.impact_of_skills.tackling == (Factor("quickness", 100),)
    assert doc.simulation.impact_of_skills.dribbling == sample_doc.simulation.impact_of_skills.dribbling


def test_default_teams_named(sample_doc):
    names = [t.name for t in default_teams(sample_doc)]
    assert len(set(names)) == 8
    assert isinstance(default_teams(sample_doc)[0], Team)
