"""In-memory FerSML documents and the rules of the 0.0.2 grammar.

The grammar is fixed, so its rules are written out by hand here rather than
interpreted from an RNC file.  Model objects are plain frozen dataclasses and
may hold out-of-range values; :func:`validate_document` reports them.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

from fersml.errors import AmbiguousEntry, EmptyTable, UnknownFactorName, UnresolvedPlayer

# Token spellings are part of the wire format ("full fback" included).
POSITIONS = frozenset({
    "keeper",
    "midfielder",
    "defensive midfielder",
    "attacking midfielder",
    "winger",
    "left winger",
    "right winger",
    "forward",
    "deep-lying forward",
    "centre forward",
    "striker",
    "inside forward",
    "playmaker",
    "sweeper",
    "defender",
    "central defender",
    "centre back",
    "wing back",
    "full fback",
    "half back",
})

DOMINANT_FEET = ("both", "left", "right")

SKILL_NAMES = ("football_sense", "ball_technique", "quickness")
DUELS = ("dribbling", "shielding", "tackling")

# (min, max) per numeric facet; None means unbounded.
PLAYER_ID = (1, 11)
SQUAD_NUMBER = (0, 99)
POSITIVE = (1, None)
SKILL = (1, 100)
DIST = (0.0, 1024.0)
PROB = (0.0, 1.0)
PERCENT = (1, 100)
COORD_X = (0, 1024)
COORD_Y = (0, 640)


def normalize_token(text: str) -> str:
    """Trim and collapse internal whitespace, the matching rule for enum tokens."""
    return " ".join(text.split())


@dataclass(frozen=True)
class LineupEntry:
    player_id: int
    squad_number: int
    formation_name: Optional[str] = None


@dataclass(frozen=True)
class Coach:
    starting_team: tuple[LineupEntry, ...] = ()


@dataclass(frozen=True)
class Person:
    squad_number: int
    firstname: str
    lastname: str
    age: int
    height: int
    weight: int
    dominant_foot: str
    usual_position: str
    actual_position: str


@dataclass(frozen=True)
class Skills:
    football_sense: int
    ball_technique: int
    quickness: int

    def __getitem__(self, name: str) -> int:
        if name not in SKILL_NAMES:
            raise KeyError(name)
        return getattr(self, name)


@dataclass(frozen=True)
class ProbTable:
    """Distance-indexed probabilities; ``entries`` are ``(dist, prob)`` pairs."""

    entries: tuple[tuple[float, float], ...] = ()

    def sorted(self) -> "ProbTable":
        return ProbTable(tuple(sorted(self.entries, key=lambda e: e[0])))


@dataclass(frozen=True)
class Estimations:
    skills: Skills
    shutting_goal: Optional[ProbTable] = None
    gaining_ball: Optional[ProbTable] = None


@dataclass(frozen=True)
class Avatar:
    person: Person
    estimations: Estimations


@dataclass(frozen=True)
class Factor:
    name: str
    percent: int


@dataclass(frozen=True)
class ImpactOfSkills:
    dribbling: tuple[Factor, ...] = ()
    shielding: tuple[Factor, ...] = ()
    tackling: tuple[Factor, ...] = ()

    def __getitem__(self, duel: str) -> tuple[Factor, ...]:
        if duel not in DUELS:
            raise KeyError(duel)
        return getattr(self, duel)


@dataclass(frozen=True)
class PlayerPosition:
    player_id: int
    coord_x: int
    coord_y: int
    desc: Optional[str] = None


@dataclass(frozen=True)
class Formation:
    name: str
    positions: tuple[PlayerPosition, ...] = ()


@dataclass(frozen=True)
class SimulationSpec:
    impact_of_skills: ImpactOfSkills
    tactics: tuple[Formation, ...]

    def formation(self, name: Optional[str] = None) -> Formation:
        """Look up a formation by name; the first one when ``name`` is None."""
        if name is None:
            return self.tactics[0]
        for formation in self.tactics:
            if formation.name == name:
                return formation
        raise KeyError(name)


@dataclass(frozen=True)
class FersmlDocument:
    coach: Coach
    avatars: tuple[Avatar, ...]
    simulation: SimulationSpec

    def avatar_for(self, squad_number: Optional[int]) -> Optional[Avatar]:
        if squad_number is None:
            return None
        for avatar in self.avatars:
            if avatar.person.squad_number == squad_number:
                return avatar
        return None


# -- validation --------------------------------------------------------------

@dataclass(frozen=True)
class Finding:
    """One violated rule: ``path`` is an XPath-like location, ``rule`` the facet."""

    path: str
    rule: str
    message: str

    def __str__(self):
        return f"{self.path}: {self.message} [{self.rule}]"


@dataclass
class ValidationReport:
    findings: list[Finding] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.findings

    def __bool__(self):
        return self.ok

    def __iter__(self):
        return iter(self.findings)

    def __len__(self):
        return len(self.findings)


def _fmt(bound) -> str:
    if isinstance(bound, float):
        return f"{bound:.2f}"
    return str(bound)


class _Checker:
    def __init__(self):
        self.findings: list[Finding] = []

    def add(self, path, rule, message):
        self.findings.append(Finding(path, rule, message))

    def range(self, path, value, bounds) -> bool:
        lo, hi = bounds
        if isinstance(value, float) and math.isnan(value):
            self.add(path, "numeric", f"{value!r} is not a number")
            return False
        if lo is not None and value < lo:
            rule = "positiveInteger" if bounds == POSITIVE else f"minInclusive={_fmt(lo)}"
            self.add(path, rule, f"{value!r} is below the minimum {_fmt(lo)}")
            return False
        if hi is not None and value > hi:
            self.add(path, f"maxInclusive={_fmt(hi)}", f"{value!r} exceeds the maximum {_fmt(hi)}")
            return False
        return True

    def token(self, path, value, allowed, rule):
        if normalize_token(value) not in allowed:
            self.add(path, rule, f"{value!r} is not one of the allowed tokens")


def _check_coach(chk: _Checker, coach: Coach):
    base = "/fersml/coach/starting_team"
    by_id: dict[int, list[LineupEntry]] = {}
    for i, entry in enumerate(coach.starting_team, 1):
        path = f"{base}/player[{i}]"
        chk.range(f"{path}/@player_id", entry.player_id, PLAYER_ID)
        chk.range(f"{path}/@squad_number", entry.squad_number, SQUAD_NUMBER)
        by_id.setdefault(entry.player_id, []).append(entry)
    for pid, entries in by_id.items():
        if len(entries) < 2:
            continue
        defaults = sum(1 for e in entries if e.formation_name is None)
        names = [e.formation_name for e in entries if e.formation_name is not None]
        if defaults > 1 or len(names) != len(set(names)):
            chk.add(base, "lineup override",
                    f"player_id {pid} has conflicting entries for the same formation")


def _check_table(chk: _Checker, path: str, table: ProbTable):
    ok = True
    for i, (dist, prob) in enumerate(table.entries, 1):
        ok &= chk.range(f"{path}/prob[{i}]/@dist", dist, DIST)
        ok &= chk.range(f"{path}/prob[{i}]", prob, PROB)
    dists = [d for d, _ in table.entries]
    if ok and len(set(dists)) != len(dists):
        chk.add(path, "unique dist", "duplicate dist values")


def _check_avatar(chk: _Checker, path: str, avatar: Avatar):
    p = avatar.person
    chk.range(f"{path}/person/@squad_number", p.squad_number, SQUAD_NUMBER)
    chk.range(f"{path}/person/age", p.age, POSITIVE)
    chk.range(f"{path}/person/height", p.height, POSITIVE)
    chk.range(f"{path}/person/weight", p.weight, POSITIVE)
    chk.token(f"{path}/person/dominant_foot", p.dominant_foot, DOMINANT_FEET, "enum dominant_foot")
    chk.token(f"{path}/person/usual_position", p.usual_position, POSITIONS, "enum Positions")
    chk.token(f"{path}/person/actual_position", p.actual_position, POSITIONS, "enum Positions")
    est = avatar.estimations
    for name in SKILL_NAMES:
        chk.range(f"{path}/estimations/skills/{name}", est.skills[name], SKILL)
    for name in ("shutting_goal", "gaining_ball"):
        table = getattr(est, name)
        if table is not None:
            _check_table(chk, f"{path}/estimations/actions/{name}", table)


def _check_simulation(chk: _Checker, sim: SimulationSpec):
    base = "/fersml/simulation/control/impact_of_skills"
    for duel in DUELS:
        ok = True
        factors = sim.impact_of_skills[duel]
        for i, factor in enumerate(factors, 1):
            ok &= chk.range(f"{base}/{duel}/factor[{i}]/@percent", factor.percent, PERCENT)
        if ok and sum(f.percent for f in factors) > 100:
            chk.add(f"{base}/{duel}", "sum(percent)<=100",
                    f"{duel} factor percents add up to more than 100")
    tactics = "/fersml/simulation/knowledge_base/tactics/play_system"
    if not sim.tactics:
        chk.add(tactics, "formation+", "at least one formation is required")
    for i, formation in enumerate(sim.tactics, 1):
        fpath = f"{tactics}/formation[{i}]"
        seen = set()
        for j, pos in enumerate(formation.positions, 1):
            ppath = f"{fpath}/player_position[{j}]"
            if chk.range(f"{ppath}/@player_id", pos.player_id, PLAYER_ID):
                if pos.player_id in seen:
                    chk.add(f"{ppath}/@player_id", "unique player_id",
                            f"player_id {pos.player_id} appears twice in formation {formation.name!r}")
                seen.add(pos.player_id)
            if pos.desc is not None:
                chk.token(f"{ppath}/@desc", pos.desc, POSITIONS, "enum Positions")
            chk.range(f"{ppath}/coord_x", pos.coord_x, COORD_X)
            chk.range(f"{ppath}/coord_y", pos.coord_y, COORD_Y)


def validate_document(doc: FersmlDocument) -> ValidationReport:
    """Check every facet and cross-field rule; findings are returned, never raised."""
    chk = _Checker()
    _check_coach(chk, doc.coach)
    for i, avatar in enumerate(doc.avatars, 1):
        _check_avatar(chk, f"/fersml/avatar[{i}]", avatar)
    _check_simulation(chk, doc.simulation)
    return ValidationReport(chk.findings)


# -- operations over validated data ------------------------------------------

def resolve_lineup(coach: Coach, formation_name: str,
                   player_ids: Optional[Iterable[int]] = None,
                   strict: bool = True) -> dict[int, int]:
    """Map player_id to squad_number for one formation.

    An entry whose ``formation_name`` matches wins over the entry without one.
    ``player_ids`` restricts the ids to cover (default: every id the coach
    mentions).  With ``strict=False`` ids that have no applicable entry are
    left out instead of raising :class:`UnresolvedPlayer`; ambiguity always
    raises.
    """
    by_id: dict[int, list[LineupEntry]] = {}
    for entry in coach.starting_team:
        by_id.setdefault(entry.player_id, []).append(entry)
    wanted = sorted(by_id) if player_ids is None else list(player_ids)

    lineup = {}
    for pid in wanted:
        entries = by_id.get(pid, [])
        named = [e for e in entries if e.formation_name == formation_name]
        if not named:
            named = [e for e in entries if e.formation_name is None]
        if len(named) > 1:
            raise AmbiguousEntry(pid, formation_name)
        if not named:
            if strict:
                raise UnresolvedPlayer(pid, formation_name)
            continue
        lineup[pid] = named[0].squad_number
    return lineup


def interpolate_prob(table: ProbTable, dist: float) -> float:
    """Piecewise-linear lookup, clamped to the first/last anchor outside the range."""
    entries = table.entries
    if not entries:
        raise EmptyTable("probability table has no entries")
    dists = [d for d, _ in entries]
    if dist <= dists[0]:
        return entries[0][1]
    if dist >= dists[-1]:
        return entries[-1][1]
    i = bisect.bisect_left(dists, dist)
    d1, p1 = entries[i]
    if d1 == dist:
        return p1
    d0, p0 = entries[i - 1]
    return p0 + (p1 - p0) * (dist - d0) / (d1 - d0)


def factor_skill(name: str) -> str:
    key = normalize_token(name).lower().replace(" ", "_")
    if key not in SKILL_NAMES:
        raise UnknownFactorName(name)
    return key


def skill_weighted_score(skills: Skills, factors: Iterable[Factor]) -> float:
    """Weighted mean of the skills the factors name, normalized by their percents.

    An empty factor list weighs the three skills equally.
    """
    factors = list(factors)
    if not factors:
        return sum(skills[name] for name in SKILL_NAMES) / len(SKILL_NAMES)
    total = 0
    weighted = 0.0
    for factor in factors:
        weighted += factor.percent * skills[factor_skill(factor.name)]
        total += factor.percent
    return weighted / total
