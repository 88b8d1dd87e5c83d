"""Final-eight knockout tournaments: quarter-finals, semi-finals, third place, final."""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Mapping, Optional, Sequence

from fersml import rng as rngs
from fersml.engine import HOME, MatchResult, PitchConfig, simulate_match
from fersml.model import Factor, FersmlDocument, ImpactOfSkills

BRACKET_LABELS = ("QF1", "QF2", "QF3", "QF4", "SF1", "SF2", "third place", "final")


@dataclass(frozen=True)
class Team:
    name: str
    doc: FersmlDocument


@dataclass(eq=False)
class WorldCupResult:
    bracket: list[MatchResult]
    pairings: list[tuple[int, int]]
    champion: int
    seed: int
    team_names: tuple[str, ...] = ()

    @property
    def total_goals(self) -> int:
        return sum(m.total_goals for m in self.bracket)

    def __eq__(self, other):
        if not isinstance(other, WorldCupResult):
            return NotImplemented
        return (self.pairings == other.pairings and self.champion == other.champion
                and self.seed == other.seed and self.bracket == other.bracket)

    def summary(self) -> dict:
        matches = []
        for label, (h, a), m in zip(BRACKET_LABELS, self.pairings, self.bracket):
            entry = {"match": label, "home": self._name(h), "away": self._name(a),
                     "score": list(m.score), "seed": m.seed}
            if m.shootout is not None:
                entry["shootout"] = list(m.shootout)
            matches.append(entry)
        return {"seed": self.seed, "total_goals": self.total_goals,
                "champion": self._name(self.champion), "bracket": matches}

    def to_json(self) -> str:
        return json.dumps(self.summary(), indent=2)

    def _name(self, i: int) -> str:
        return self.team_names[i] if self.team_names else str(i)


def match_seed(seed: int, index: int) -> int:
    """Seed of the ``index``-th bracket match of a tournament."""
    return rngs.splitmix64((rngs.splitmix64(seed & rngs.MASK64) + index) & rngs.MASK64)


def simulate_world_cup(teams: Sequence, pitch: Optional[PitchConfig] = None,
                       seed: int = 0) -> WorldCupResult:
    """Play the eight knockout matches between eight teams.

    ``teams`` holds FersmlDocuments or :class:`Team` objects in draw order:
    QF1 is teams 0 v 1, QF2 2 v 3 and so on; SF1 pairs the QF1 and QF2
    winners, SF2 the QF3 and QF4 winners.
    """
    if len(teams) != 8:
        raise ValueError(f"a final-eight tournament needs 8 teams, got {len(teams)}")
    docs = [t.doc if isinstance(t, Team) else t for t in teams]
    names = tuple(t.name if isinstance(t, Team) else f"team {i + 1}" for i, t in enumerate(teams))
    pitch = pitch or PitchConfig()
    bracket: list[MatchResult] = []
    pairings: list[tuple[int, int]] = []

    def play(h: int, a: int) -> tuple[int, int]:
        result = simulate_match(docs[h], docs[a], pitch, match_seed(seed, len(bracket)), knockout=True)
        bracket.append(result)
        pairings.append((h, a))
        return (h, a) if result.winner == HOME else (a, h)

    qf = [play(2 * i, 2 * i + 1) for i in range(4)]
    sf1 = play(qf[0][0], qf[1][0])
    sf2 = play(qf[2][0], qf[3][0])
    play(sf1[1], sf2[1])
    champion, _ = play(sf1[0], sf2[0])
    return WorldCupResult(bracket, pairings, champion, seed, names)


def _total(args) -> int:
    teams, pitch, seed = args
    return simulate_world_cup(teams, pitch, seed).total_goals


def repeat_world_cups(teams: Sequence, pitch: Optional[PitchConfig] = None,
                      base_seed: int = 0, count: int = 10, workers: int = 1) -> list[int]:
    """Total goals of ``count`` tournaments, run ``i`` seeded with ``base_seed + i``."""
    if count < 1:
        raise ValueError("count must be at least 1")
    jobs = [(teams, pitch, base_seed + i) for i in range(count)]
    if workers <= 1:
        return [_total(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_total, jobs))


# -- parameter settings -------------------------------------------------------

def apply_setting(doc: FersmlDocument, setting: Mapping) -> FersmlDocument:
    """Override skills and/or impact factors across a document.

    ``setting`` may hold ``skills`` (skill name -> value, applied to every
    avatar) and ``impact_of_skills`` (duel -> list of ``[name, percent]``).
    """
    out = doc
    skills = setting.get("skills")
    if skills:
        avatars = []
        for avatar in doc.avatars:
            new_skills = replace(avatar.estimations.skills, **skills)
            avatars.append(replace(avatar, estimations=replace(avatar.estimations, skills=new_skills)))
        out = replace(out, avatars=tuple(avatars))
    impact = setting.get("impact_of_skills")
    if impact:
        current = out.simulation.impact_of_skills
        lists = {duel: tuple(Factor(n, int(p)) for n, p in impact[duel]) if duel in impact else current[duel]
                 for duel in ("dribbling", "shielding", "tackling")}
        out = replace(out, simulation=replace(out.simulation, impact_of_skills=ImpactOfSkills(**lists)))
    return out


def default_teams(doc: FersmlDocument, setting: Optional[Mapping] = None) -> list[Team]:
    """Eight copies of one document, optionally with a parameter setting applied."""
    if setting:
        doc = apply_setting(doc, setting)
    return [Team(f"team {i + 1}", doc) for i in range(8)]
