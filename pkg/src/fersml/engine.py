"""Discrete-time two-team match simulation.

The pitch is the 1024 x 640 coordinate plane of the formation facets and the
clock advances in 100 ms ticks.  Every tick appends one ball-trace record
``(lx, ly, lcx, lcy, possession)``: the ball position, the point it is moving
to, and the side in possession (0 home, 1 away).

Play is a possession automaton.  The player on the ball holds it for a few
ticks, then shoots, passes or dribbles; passes can be intercepted, receptions
under pressure and dribbles end in duels.  Every probability involved comes
from the FerSML documents (skills, impact factors, shutting_goal and
gaining_ball tables); the constants below only shape geometry and tempo.

Home defends the x=0 goal and uses formation coordinates as written; away
defends x=1024 with its formation mirrored through the centre spot.
"""

from __future__ import annotations

import hashlib
import io
import json
import math
import random
from dataclasses import asdict, dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from fersml import rng as rngs
from fersml.errors import FormationError, InvalidDocument, WrongPlayerCount
from fersml.model import (
    Avatar,
    FersmlDocument,
    Formation,
    ProbTable,
    Skills,
    interpolate_prob,
    resolve_lineup,
    skill_weighted_score,
    validate_document,
)

HOME, AWAY = "home", "away"
SIDES = (HOME, AWAY)
TEAM_SIZE = 10

WIDTH, HEIGHT = 1024, 640
CENTRE = (WIDTH // 2, HEIGHT // 2)

TRACE_COLUMNS = ("lx", "ly", "lcx", "lcy", "possession")

DEFAULT_SKILLS = Skills(50, 50, 50)
DEFAULT_SHUTTING_GOAL = ProbTable(((5.0, 0.89), (16.0, 0.84), (30.0, 0.47)))
DEFAULT_GAINING_BALL = ProbTable(((0.5, 0.89), (1.0, 0.64), (2.0, 0.06)))
PENALTY_DISTANCE_M = 11.0

# Tempo, in coordinate units per tick and ticks.
PASS_SPEED = 11
DRIBBLE_SPEED = 5
SHOT_SPEED = 24
HOLD_TICKS = (4, 12)
DRIBBLE_RUN = (40, 110)
DRIBBLE_SWERVE = 50
GOAL_MOUTH = 30

# Decision shaping.
SHOT_RANGE_M = 25.0
SHOT_CHANCE = 0.0075
PASS_SHARE = 0.70
FORWARD_BIAS = 0.60
PRESSURE_M = 5.0
CHALLENGE_M = 8.0
# Percent of the way each player moves from its formation spot toward the ball.
PULL_OUTFIELD = 35
PULL_KEEPER = 5

SHOOTOUT_ROUNDS = 5
SHOOTOUT_MAX_ROUNDS = 1000


@dataclass(frozen=True)
class PitchConfig:
    width: int = WIDTH
    height: int = HEIGHT
    meters_per_unit: float = 105 / 1024
    tick_ms: int = 100
    regulation_ticks: int = 54000
    extra_time_ticks: int = 18000

    def __post_init__(self):
        if (self.width, self.height) != (WIDTH, HEIGHT):
            raise ValueError("the pitch is fixed at 1024 x 640 coordinate units")
        if self.tick_ms != 100:
            raise ValueError("the tick is fixed at 100 ms")
        if self.regulation_ticks < 0 or self.extra_time_ticks < 0:
            raise ValueError("period lengths must be non-negative")
        if not self.meters_per_unit > 0:
            raise ValueError("meters_per_unit must be positive")


@dataclass(frozen=True)
class Event:
    tick: int
    kind: str
    team: Optional[str]
    player_id: Optional[int]
    detail: str = ""


@dataclass
class MatchState:
    """Mutable state of one running match."""

    tick_index: int = 0
    ball_pos: tuple[int, int] = CENTRE
    ball_target: tuple[int, int] = CENTRE
    possession: str = HOME
    holder: int = 0
    score: list = field(default_factory=lambda: [0, 0])


@dataclass(eq=False)
class MatchResult:
    score: tuple[int, int]
    events: list[Event]
    ball_trace: np.ndarray
    seed: int
    shootout: Optional[tuple[int, int]] = None

    @property
    def winner(self) -> Optional[str]:
        home, away = self.shootout if self.shootout is not None else self.score
        if home == away:
            return None
        return HOME if home > away else AWAY

    @property
    def total_goals(self) -> int:
        return self.score[0] + self.score[1]

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(json.dumps([self.score, self.shootout, self.seed]).encode())
        h.update(events_jsonl(self.events).encode())
        h.update(np.ascontiguousarray(self.ball_trace, dtype="<i4").tobytes())
        return h.hexdigest()

    def __eq__(self, other):
        if not isinstance(other, MatchResult):
            return NotImplemented
        return (self.score == other.score and self.seed == other.seed
                and self.shootout == other.shootout and self.events == other.events
                and np.array_equal(self.ball_trace, other.ball_trace))


def mirror(x: int, y: int) -> tuple[int, int]:
    return WIDTH - x, HEIGHT - y


def place_formation(formation: Formation, side: str) -> list[tuple[int, int]]:
    """Starting coordinates of the ten players, mirrored for the away side."""
    if len(formation.positions) != TEAM_SIZE:
        raise WrongPlayerCount(formation.name, len(formation.positions))
    coords = [(p.coord_x, p.coord_y) for p in formation.positions]
    if side == AWAY:
        return [mirror(x, y) for x, y in coords]
    if side != HOME:
        raise ValueError(f"side must be 'home' or 'away', not {side!r}")
    return coords


def keep_probability(attacker: float, defender: float) -> float:
    if attacker == 0 and defender == 0:
        return 0.5
    return attacker / (attacker + defender)


@dataclass(frozen=True)
class _Player:
    player_id: int
    squad_number: Optional[int]
    skills: Skills
    shutting_goal: ProbTable
    gaining_ball: ProbTable


def _player(doc: FersmlDocument, player_id: int, squad_number: Optional[int]) -> _Player:
    avatar = doc.avatar_for(squad_number)
    if avatar is None:
        return _Player(player_id, squad_number, DEFAULT_SKILLS,
                       DEFAULT_SHUTTING_GOAL, DEFAULT_GAINING_BALL)
    est = avatar.estimations
    return _Player(
        player_id, squad_number, est.skills,
        est.shutting_goal if est.shutting_goal and est.shutting_goal.entries else DEFAULT_SHUTTING_GOAL,
        est.gaining_ball if est.gaining_ball and est.gaining_ball.entries else DEFAULT_GAINING_BALL,
    )


class _Team:
    def __init__(self, doc: FersmlDocument, side: str, formation_name: Optional[str] = None,
                 strict_lineup: bool = False):
        report = validate_document(doc)
        if not report.ok:
            raise InvalidDocument(report.findings)
        try:
            formation = doc.simulation.formation(formation_name)
        except KeyError:
            raise FormationError(f"no formation named {formation_name!r}") from None
        self.side = side
        self.index = SIDES.index(side)
        self.formation = formation
        self.anchors = place_formation(formation, side)
        ids = [p.player_id for p in formation.positions]
        lineup = resolve_lineup(doc.coach, formation.name, ids, strict=strict_lineup)
        self.players = [_player(doc, pid, lineup.get(pid)) for pid in ids]
        self.impact = doc.simulation.impact_of_skills
        self.keeper = ids.index(1) if 1 in ids else 0
        self.pulls = [PULL_KEEPER if i == self.keeper else PULL_OUTFIELD for i in range(TEAM_SIZE)]
        self.goal_x = WIDTH if side == HOME else 0
        self.direction = 1 if side == HOME else -1
        self._scores = {}

    def score(self, player: int, duel: str) -> float:
        key = (player, duel)
        if key not in self._scores:
            self._scores[key] = skill_weighted_score(self.players[player].skills, self.impact[duel])
        return self._scores[key]

    def shape(self, bx: int, by: int, holder: Optional[int] = None) -> list[tuple[int, int]]:
        out = [(ax + (bx - ax) * pull // 100, ay + (by - ay) * pull // 100)
               for (ax, ay), pull in zip(self.anchors, self.pulls)]
        if holder is not None:
            out[holder] = (bx, by)
        return out


def resolve_duel(att_doc: FersmlDocument, def_doc: FersmlDocument, duel: str,
                 att_id: int, def_id: int, rng: random.Random,
                 att_formation: Optional[str] = None,
                 def_formation: Optional[str] = None) -> str:
    """One duel between two players named by player_id.

    The attacker's score uses its document's factors for ``duel``, the
    defender's its tackling factors; the attacker keeps the ball with
    probability a / (a + d).  Returns ``"attacker_keeps"`` or ``"defender_wins"``.
    """
    att = _Team(att_doc, HOME, att_formation)
    dfn = _Team(def_doc, AWAY, def_formation)
    a = att.score(_index_of(att, att_id), duel)
    d = dfn.score(_index_of(dfn, def_id), "tackling")
    return "attacker_keeps" if rng.random() < keep_probability(a, d) else "defender_wins"


def _index_of(team: _Team, player_id: int) -> int:
    for i, p in enumerate(team.players):
        if p.player_id == player_id:
            return i
    raise FormationError(f"player_id {player_id} is not in formation {team.formation.name!r}")


def attempt_shot(shooter: Optional[Avatar], dist_m: float, rng: random.Random) -> str:
    """``"goal"`` with the shooter's shutting_goal probability at ``dist_m`` meters."""
    table = DEFAULT_SHUTTING_GOAL
    if shooter is not None:
        own = shooter.estimations.shutting_goal
        if own is not None and own.entries:
            table = own
    return "goal" if rng.random() < interpolate_prob(table, dist_m) else "miss"


def _travel(x0: int, y0: int, x1: int, y1: int, speed: int) -> tuple[list[int], list[int]]:
    """Ball x and y for each tick of a straight run, excluding the endpoint."""
    dx, dy = x1 - x0, y1 - y0
    n = max(1, math.ceil(math.hypot(dx, dy) / speed))
    n2 = 2 * n
    return ([x0 + (2 * dx * k + n) // n2 for k in range(n)],
            [y0 + (2 * dy * k + n) // n2 for k in range(n)])


class _Match:
    def __init__(self, home: _Team, away: _Team, pitch: PitchConfig, seed: int):
        self.teams = {HOME: home, AWAY: away}
        self.pitch = pitch
        self.seed = seed & rngs.MASK64
        self.rng = rngs.stream(self.seed, rngs.MATCH_STREAM)
        self.rngs = {HOME: rngs.stream(self.seed, rngs.HOME_STREAM),
                     AWAY: rngs.stream(self.seed, rngs.AWAY_STREAM)}
        self.state = MatchState()
        self.events: list[Event] = []
        self.trace: tuple[list[int], ...] = tuple([] for _ in TRACE_COLUMNS)
        self.period_end = 0

    # -- bookkeeping --

    def event(self, kind, side=None, player=None, detail=""):
        pid = None if player is None else self.teams[side].players[player].player_id
        self.events.append(Event(self.state.tick_index, kind, side, pid, detail))

    def emit(self, path: tuple[list[int], list[int]], target: tuple[int, int]) -> bool:
        """Append trace records for a run of the ball; False when the period ran out first."""
        st = self.state
        xs, ys = path
        room = self.period_end - st.tick_index
        n = min(room, len(xs))
        poss = SIDES.index(st.possession)
        lx, ly, lcx, lcy, pc = self.trace
        lx.extend(xs[:n])
        ly.extend(ys[:n])
        lcx.extend([target[0]] * n)
        lcy.extend([target[1]] * n)
        pc.extend([poss] * n)
        st.tick_index += n
        st.ball_target = target
        if len(xs) > room:
            if n:
                st.ball_pos = (xs[n - 1], ys[n - 1])
            return False
        st.ball_pos = target
        return True

    def hold(self, ticks: int) -> bool:
        """The ball rests at the holder's feet for ``ticks`` ticks."""
        st = self.state
        n = min(ticks, self.period_end - st.tick_index)
        bx, by = st.ball_pos
        record = (bx, by, bx, by, SIDES.index(st.possession))
        for column, value in zip(self.trace, record):
            column.extend([value] * n)
        st.tick_index += n
        st.ball_target = st.ball_pos
        return n == ticks

    def give(self, side: str, player: int, pos: Optional[tuple[int, int]] = None):
        st = self.state
        st.possession = side
        st.holder = player
        if pos is not None:
            st.ball_pos = pos
            st.ball_target = pos

    def other(self, side: str) -> str:
        return AWAY if side == HOME else HOME

    def player_positions(self) -> dict[str, list[tuple[int, int]]]:
        """Where all twenty players stand for the current ball position."""
        st = self.state
        return {side: self.teams[side].shape(*st.ball_pos, st.holder if side == st.possession else None)
                for side in SIDES}

    def nearest(self, side: str, x: int, y: int) -> tuple[int, float]:
        """Closest player of ``side`` to (x, y), with the team pulled toward the ball."""
        team = self.teams[side]
        sq = [((ax + (x - ax) * pull // 100 - x) ** 2 + (ay + (y - ay) * pull // 100 - y) ** 2)
              for (ax, ay), pull in zip(team.anchors, team.pulls)]
        best = sq.index(min(sq))
        return best, math.sqrt(sq[best]) * self.pitch.meters_per_unit

    # -- play --

    def kickoff(self, side: str):
        team = self.teams[side]
        shape = team.shape(*CENTRE)
        taker = min(range(TEAM_SIZE), key=lambda i: (abs(shape[i][0] - CENTRE[0]) + abs(shape[i][1] - CENTRE[1]), i))
        self.give(side, taker, CENTRE)
        self.event("kickoff", side, taker)

    def step(self) -> bool:
        st = self.state
        side = st.possession
        team = self.teams[side]
        r = self.rngs[side]
        if not self.hold(r.randint(*HOLD_TICKS)):
            return False
        bx, by = st.ball_pos
        dist_m = math.hypot(team.goal_x - bx, CENTRE[1] - by) * self.pitch.meters_per_unit
        if dist_m <= SHOT_RANGE_M and r.random() < SHOT_CHANCE:
            return self.shoot(dist_m)
        if r.random() < PASS_SHARE:
            return self.pass_ball()
        return self.dribble()

    def shoot(self, dist_m: float) -> bool:
        st = self.state
        side, shooter = st.possession, st.holder
        team = self.teams[side]
        r = self.rngs[side]
        bx, by = st.ball_pos
        target = (team.goal_x, CENTRE[1] + r.randint(-GOAL_MOUTH, GOAL_MOUTH))
        if not self.emit(_travel(bx, by, *target, SHOT_SPEED), target):
            return False
        p_goal = interpolate_prob(team.players[shooter].shutting_goal, dist_m)
        self.event("shot", side, shooter, f"{dist_m:.1f} m")
        opp = self.other(side)
        if r.random() < p_goal:
            st.score[team.index] += 1
            self.event("goal", side, shooter, f"{st.score[0]}:{st.score[1]}")
            self.kickoff(opp)
        else:
            keeper = self.teams[opp].keeper
            self.give(opp, keeper, self.teams[opp].anchors[keeper])
            self.event("turnover", opp, keeper, "goal kick")
        return True

    def pass_ball(self) -> bool:
        st = self.state
        side, passer = st.possession, st.holder
        team = self.teams[side]
        r = self.rngs[side]
        bx, by = st.ball_pos
        shape = team.shape(bx, by, passer)
        others = [i for i in range(TEAM_SIZE) if i != passer]
        ahead = [i for i in others if (shape[i][0] - bx) * team.direction > 0]
        receiver = r.choice(ahead if ahead and r.random() < FORWARD_BIAS else others)
        target = shape[receiver]
        if not self.emit(_travel(bx, by, *target, PASS_SPEED), target):
            return False
        opp = self.other(side)
        j, d_m = self.nearest(opp, *target)
        opponents = self.teams[opp]
        if r.random() < interpolate_prob(opponents.players[j].gaining_ball, d_m):
            self.give(opp, j, target)
            self.event("turnover", opp, j, "interception")
            return True
        self.give(side, receiver, target)
        self.event("pass", side, passer, f"to {team.players[receiver].player_id}")
        if d_m <= PRESSURE_M:
            self.duel("shielding", j)
        return True

    def dribble(self) -> bool:
        st = self.state
        side, carrier = st.possession, st.holder
        team = self.teams[side]
        r = self.rngs[side]
        bx, by = st.ball_pos
        tx = min(max(bx + team.direction * r.randint(*DRIBBLE_RUN), 0), WIDTH)
        ty = min(max(by + r.randint(-DRIBBLE_SWERVE, DRIBBLE_SWERVE), 0), HEIGHT)
        target = (tx, ty)
        if not self.emit(_travel(bx, by, tx, ty, DRIBBLE_SPEED), target):
            return False
        opp = self.other(side)
        j, d_m = self.nearest(opp, tx, ty)
        if d_m <= CHALLENGE_M:
            if not self.duel("dribbling", j):
                return True
        self.event("dribble", side, carrier)
        return True

    def duel(self, kind: str, defender: int) -> bool:
        st = self.state
        side, attacker = st.possession, st.holder
        opp = self.other(side)
        a = self.teams[side].score(attacker, kind)
        d = self.teams[opp].score(defender, "tackling")
        if self.rngs[side].random() < keep_probability(a, d):
            return True
        self.give(opp, defender, st.ball_pos)
        self.event("tackle", opp, defender, kind)
        return False

    def period(self, length: int, kickoff_side: str, label: str):
        self.period_end = self.state.tick_index + length
        if length == 0:
            return
        self.kickoff(kickoff_side)
        while self.state.tick_index < self.period_end:
            if not self.step():
                break
        self.event("period_end", None, None, label)

    def shootout(self) -> tuple[int, int]:
        goals = [0, 0]
        takers = {side: self._penalty_order(side) for side in SIDES}
        taken = [0, 0]
        for rnd in range(SHOOTOUT_MAX_ROUNDS):
            for k, side in enumerate(SIDES):
                team = self.teams[side]
                order = takers[side]
                player = order[taken[k] % len(order)]
                taken[k] += 1
                p = interpolate_prob(team.players[player].shutting_goal, PENALTY_DISTANCE_M)
                scored = self.rngs[side].random() < p
                goals[k] += scored
                self.event("shot", side, player, "penalty scored" if scored else "penalty missed")
                if rnd < SHOOTOUT_ROUNDS and _decided(goals, taken):
                    return tuple(goals)
            if rnd >= SHOOTOUT_ROUNDS - 1 and goals[0] != goals[1]:
                return tuple(goals)
        # Both sides cannot score: settle by lot.
        k = self.rng.randrange(2)
        goals[k] += 1
        return tuple(goals)

    def _penalty_order(self, side: str) -> list[int]:
        keeper = self.teams[side].keeper
        return [i for i in range(TEAM_SIZE) if i != keeper] + [keeper]

    def run(self, knockout: bool) -> MatchResult:
        pitch = self.pitch
        first = pitch.regulation_ticks // 2
        self.period(first, HOME, "first half")
        self.period(pitch.regulation_ticks - first, AWAY, "second half")
        shootout = None
        st = self.state
        if knockout and st.score[0] == st.score[1]:
            et = pitch.extra_time_ticks // 2
            self.period(et, HOME, "extra time first half")
            self.period(pitch.extra_time_ticks - et, AWAY, "extra time second half")
            if st.score[0] == st.score[1]:
                shootout = self.shootout()
                self.event("period_end", None, None, f"shootout {shootout[0]}:{shootout[1]}")
        trace = np.array(self.trace, dtype=np.int32).T.reshape(-1, len(TRACE_COLUMNS))
        return MatchResult(tuple(st.score), self.events, trace, self.seed, shootout)


def _decided(goals: list[int], taken: list[int]) -> bool:
    """Best-of-five shootout is over once one side cannot be caught."""
    left = [SHOOTOUT_ROUNDS - t for t in taken]
    return goals[0] + max(left[0], 0) < goals[1] or goals[1] + max(left[1], 0) < goals[0]


def simulate_match(home: FersmlDocument, away: FersmlDocument,
                   pitch: Optional[PitchConfig] = None, seed: int = 0,
                   knockout: bool = False, home_formation: Optional[str] = None,
                   away_formation: Optional[str] = None,
                   strict_lineup: bool = False) -> MatchResult:
    """Play one match; the result is a pure function of the arguments.

    Each side plays its named formation (default: its first one).  Players the
    coach's starting team does not cover for that formation play with default
    estimations unless ``strict_lineup`` is set, in which case the lineup error
    propagates.  Knockout matches level after regulation get extra time and
    then a penalty shootout, whose kicks are not added to ``score``.
    """
    pitch = pitch or PitchConfig()
    match = _Match(_Team(home, HOME, home_formation, strict_lineup),
                   _Team(away, AWAY, away_formation, strict_lineup), pitch, seed)
    return match.run(knockout)


# -- exports ------------------------------------------------------------------

def events_jsonl(events: Iterable[Event]) -> str:
    return "".join(json.dumps(asdict(e), sort_keys=True) + "\n" for e in events)


def trace_csv(trace: np.ndarray) -> str:
    out = io.StringIO()
    out.write("tick,lx,ly,lcx,lcy,possession\n")
    for tick, (lx, ly, lcx, lcy, poss) in enumerate(trace.tolist()):
        out.write(f"{tick},{lx},{ly},{lcx},{lcy},{SIDES[poss]}\n")
    return out.getvalue()
