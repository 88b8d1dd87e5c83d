"""Reading and writing FerSML XML.

Parsing is done in two passes: expat builds a small positioned element tree,
then a hand-written walker mirrors the grammar's content models, converts leaf
text to typed values and assembles the model.  Facet checks are delegated to
:func:`fersml.model.validate_document` and mapped back to line/column.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional, Union
from xml.parsers import expat
from xml.sax.saxutils import escape, quoteattr

from fersml.errors import FersmlError
from fersml.model import (
    Avatar,
    Coach,
    DUELS,
    Estimations,
    Factor,
    FersmlDocument,
    Formation,
    ImpactOfSkills,
    LineupEntry,
    Person,
    PlayerPosition,
    ProbTable,
    SKILL_NAMES,
    SimulationSpec,
    Skills,
    normalize_token,
    validate_document,
)

MALFORMED = "malformed_xml"
UNKNOWN = "unknown_element"
FACET = "facet_violation"
MISSING = "missing_element"

_INT_RE = re.compile(r"[+-]?\d+")
_FLOAT_RE = re.compile(r"[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?|[+-]?INF|NaN")


@dataclass(frozen=True)
class ParseDiagnostic:
    line: int
    column: int
    message: str
    kind: str

    def __str__(self):
        return f"{self.line}:{self.column}: {self.kind}: {self.message}"


class FersmlSyntaxError(FersmlError, ValueError):
    """Raised by :func:`parse_fersml`; ``diagnostics`` is never empty."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))


@dataclass
class _Node:
    tag: str
    attrs: dict
    line: int
    column: int
    children: list = field(default_factory=list)
    text: list = field(default_factory=list)

    @property
    def content(self) -> str:
        return "".join(self.text)


class _Forbidden(Exception):
    pass


def _read_tree(data: bytes) -> _Node:
    parser = expat.ParserCreate()
    stack: list[_Node] = []
    root: list[_Node] = []

    def start(tag, attrs):
        node = _Node(tag, attrs, parser.CurrentLineNumber, parser.CurrentColumnNumber + 1)
        if stack:
            stack[-1].children.append(node)
        else:
            root.append(node)
        stack.append(node)

    def end(tag):
        stack.pop()

    def chars(text):
        if stack:
            stack[-1].text.append(text)

    def forbid(*args):
        raise _Forbidden()

    parser.StartElementHandler = start
    parser.EndElementHandler = end
    parser.CharacterDataHandler = chars
    parser.StartDoctypeDeclHandler = forbid
    parser.EntityDeclHandler = forbid
    parser.Parse(data, True)
    return root[0]


class _Builder:
    def __init__(self):
        self.diagnostics: list[ParseDiagnostic] = []
        self.positions: dict[str, tuple[int, int]] = {}
        self.bad_paths: set[str] = set()

    def report(self, node: _Node, kind: str, message: str):
        self.diagnostics.append(ParseDiagnostic(node.line, node.column, message, kind))

    def mark(self, path: str, node: _Node):
        self.positions[path] = (node.line, node.column)

    # -- structure --

    def attributes(self, node, path, required=(), optional=()):
        known = set(required) | set(optional)
        for name in node.attrs:
            if name not in known:
                self.report(node, UNKNOWN, f"unknown attribute {name!r} on <{node.tag}>")
        ok = True
        for name in required:
            if name not in node.attrs:
                self.report(node, MISSING, f"<{node.tag}> lacks required attribute {name!r}")
                ok = False
        for name in node.attrs:
            self.mark(f"{path}/@{name}", node)
        return ok

    def content(self, node, model):
        """Match child elements against a sequence of (name, occurrence) items.

        Returns name -> list of nodes, or None after the first structural
        error in this element (later siblings are not inspected).
        """
        if node.content.strip():
            self.report(node, UNKNOWN, f"unexpected text inside <{node.tag}>")
        found = {name: [] for name, _ in model}
        names = {name for name, _ in model}
        i = 0
        for child in node.children:
            while i < len(model) and model[i][0] != child.tag:
                name, occ = model[i]
                if occ in "1+" and not found[name]:
                    if child.tag in names:
                        msg = f"expected <{name}> before <{child.tag}> in <{node.tag}>"
                        self.report(child, MISSING, msg)
                    else:
                        self.report(child, UNKNOWN, f"unknown element <{child.tag}> in <{node.tag}>")
                    return None
                i += 1
            if i == len(model):
                if child.tag in names:
                    self.report(child, MISSING, f"<{child.tag}> is out of order in <{node.tag}>")
                else:
                    self.report(child, UNKNOWN, f"unknown element <{child.tag}> in <{node.tag}>")
                return None
            name, occ = model[i]
            if occ in "1?" and found[name]:
                self.report(child, UNKNOWN, f"<{child.tag}> may appear only once in <{node.tag}>")
                return None
            found[name].append(child)
        for name, occ in model:
            if occ in "1+" and not found[name]:
                self.report(node, MISSING, f"<{node.tag}> lacks required element <{name}>")
                return None
        return found

    def leaf(self, node, path) -> str:
        self.mark(path, node)
        for child in node.children:
            self.report(child, UNKNOWN, f"unknown element <{child.tag}> in <{node.tag}>")
        return node.content

    # -- typed values --

    def integer(self, text, node, path) -> int:
        text = text.strip()
        if _INT_RE.fullmatch(text):
            return int(text)
        self.report(node, FACET, f"{text!r} at {path} is not an integer")
        self.bad_paths.add(path)
        return 0

    def number(self, text, node, path) -> float:
        text = text.strip()
        if _FLOAT_RE.fullmatch(text):
            return float(text)
        self.report(node, FACET, f"{text!r} at {path} is not a float")
        self.bad_paths.add(path)
        return 0.0

    def int_leaf(self, node, path) -> int:
        return self.integer(self.leaf(node, path), node, path)

    # -- grammar --

    def document(self, root: _Node) -> Optional[FersmlDocument]:
        path = "/fersml"
        if root.tag != "fersml":
            self.report(root, UNKNOWN, f"root element must be <fersml>, not <{root.tag}>")
            return None
        self.mark(path, root)
        self.attributes(root, path)
        parts = self.content(root, [("coach", "1"), ("avatar", "*"), ("simulation", "1")])
        if parts is None:
            return None
        coach = self.coach(parts["coach"][0], f"{path}/coach")
        avatars = [self.avatar(n, f"{path}/avatar[{i}]") for i, n in enumerate(parts["avatar"], 1)]
        simulation = self.simulation(parts["simulation"][0], f"{path}/simulation")
        if coach is None or simulation is None or None in avatars:
            return None
        return FersmlDocument(coach, tuple(avatars), simulation)

    def coach(self, node, path):
        self.mark(path, node)
        self.attributes(node, path)
        parts = self.content(node, [("starting_team", "1")])
        if parts is None:
            return None
        team = parts["starting_team"][0]
        tpath = f"{path}/starting_team"
        self.mark(tpath, team)
        self.attributes(team, tpath)
        players = self.content(team, [("player", "*")])
        if players is None:
            return None
        entries = []
        for i, p in enumerate(players["player"], 1):
            ppath = f"{tpath}/player[{i}]"
            self.mark(ppath, p)
            self.content(p, [])
            if not self.attributes(p, ppath, ("player_id", "squad_number"), ("formation_name",)):
                return None
            entries.append(LineupEntry(
                self.integer(p.attrs["player_id"], p, f"{ppath}/@player_id"),
                self.integer(p.attrs["squad_number"], p, f"{ppath}/@squad_number"),
                p.attrs.get("formation_name"),
            ))
        return Coach(tuple(entries))

    def avatar(self, node, path):
        self.mark(path, node)
        self.attributes(node, path)
        parts = self.content(node, [("person", "1"), ("estimations", "1")])
        if parts is None:
            return None
        person = self.person(parts["person"][0], f"{path}/person")
        estimations = self.estimations(parts["estimations"][0], f"{path}/estimations")
        if person is None or estimations is None:
            return None
        return Avatar(person, estimations)

    def person(self, node, path):
        self.mark(path, node)
        fields = ["firstname", "lastname", "age", "height", "weight",
                  "dominant_foot", "usual_position", "actual_position"]
        attrs_ok = self.attributes(node, path, ("squad_number",))
        parts = self.content(node, [(name, "1") for name in fields])
        if parts is None or not attrs_ok:
            return None
        value = {name: parts[name][0] for name in fields}
        return Person(
            squad_number=self.integer(node.attrs["squad_number"], node, f"{path}/@squad_number"),
            firstname=self.leaf(value["firstname"], f"{path}/firstname").strip(),
            lastname=self.leaf(value["lastname"], f"{path}/lastname").strip(),
            age=self.int_leaf(value["age"], f"{path}/age"),
            height=self.int_leaf(value["height"], f"{path}/height"),
            weight=self.int_leaf(value["weight"], f"{path}/weight"),
            dominant_foot=normalize_token(self.leaf(value["dominant_foot"], f"{path}/dominant_foot")),
            usual_position=normalize_token(self.leaf(value["usual_position"], f"{path}/usual_position")),
            actual_position=normalize_token(self.leaf(value["actual_position"], f"{path}/actual_position")),
        )

    def estimations(self, node, path):
        self.mark(path, node)
        self.attributes(node, path)
        parts = self.content(node, [("skills", "1"), ("actions", "1")])
        if parts is None:
            return None
        skills_node = parts["skills"][0]
        spath = f"{path}/skills"
        self.mark(spath, skills_node)
        self.attributes(skills_node, spath)
        skill_parts = self.content(skills_node, [(name, "1") for name in SKILL_NAMES])
        actions_node = parts["actions"][0]
        apath = f"{path}/actions"
        self.mark(apath, actions_node)
        self.attributes(actions_node, apath)
        action_parts = self.content(actions_node, [("shutting_goal", "?"), ("gaining_ball", "?")])
        if skill_parts is None or action_parts is None:
            return None
        skills = Skills(*(self.int_leaf(skill_parts[name][0], f"{spath}/{name}")
                          for name in SKILL_NAMES))
        tables = {}
        for name in ("shutting_goal", "gaining_ball"):
            if action_parts[name]:
                tables[name] = self.prob_table(action_parts[name][0], f"{apath}/{name}")
                if tables[name] is None:
                    return None
        return Estimations(skills, tables.get("shutting_goal"), tables.get("gaining_ball"))

    def prob_table(self, node, path):
        self.mark(path, node)
        self.attributes(node, path)
        parts = self.content(node, [("prob", "*")])
        if parts is None:
            return None
        raw = []
        for i, p in enumerate(parts["prob"]):
            if not self.attributes(p, f"{path}/prob", ("dist",)):
                return None
            dist = self.number(p.attrs["dist"], p, f"{path}/prob/@dist")
            prob = self.number(self.leaf(p, f"{path}/prob"), p, f"{path}/prob")
            raw.append((dist, prob, p))
        raw.sort(key=lambda item: item[0])
        for i, (_, _, p) in enumerate(raw, 1):
            self.mark(f"{path}/prob[{i}]", p)
            self.mark(f"{path}/prob[{i}]/@dist", p)
        return ProbTable(tuple((d, pr) for d, pr, _ in raw))

    def simulation(self, node, path):
        self.mark(path, node)
        self.attributes(node, path)
        parts = self.content(node, [("control", "1"), ("knowledge_base", "1")])
        if parts is None:
            return None
        impact = self.control(parts["control"][0], f"{path}/control")
        tactics = self.knowledge_base(parts["knowledge_base"][0], f"{path}/knowledge_base")
        if impact is None or tactics is None:
            return None
        return SimulationSpec(impact, tactics)

    def control(self, node, path):
        self.mark(path, node)
        self.attributes(node, path)
        parts = self.content(node, [("impact_of_skills", "1")])
        if parts is None:
            return None
        impact = parts["impact_of_skills"][0]
        ipath = f"{path}/impact_of_skills"
        self.mark(ipath, impact)
        self.attributes(impact, ipath)
        duels = self.content(impact, [(name, "1") for name in DUELS])
        if duels is None:
            return None
        lists = {}
        for duel in DUELS:
            dnode = duels[duel][0]
            dpath = f"{ipath}/{duel}"
            self.mark(dpath, dnode)
            self.attributes(dnode, dpath)
            factors = self.content(dnode, [("factor", "*")])
            if factors is None:
                return None
            items = []
            for i, f in enumerate(factors["factor"], 1):
                fpath = f"{dpath}/factor[{i}]"
                self.mark(fpath, f)
                self.content(f, [])
                if not self.attributes(f, fpath, ("name", "percent")):
                    return None
                items.append(Factor(f.attrs["name"],
                                    self.integer(f.attrs["percent"], f, f"{fpath}/@percent")))
            lists[duel] = tuple(items)
        return ImpactOfSkills(**lists)

    def knowledge_base(self, node, path):
        self.mark(path, node)
        self.attributes(node, path)
        chain = [("tactics", f"{path}/tactics"), ("play_system", f"{path}/tactics/play_system")]
        for tag, cpath in chain:
            parts = self.content(node, [(tag, "1")])
            if parts is None:
                return None
            node = parts[tag][0]
            self.mark(cpath, node)
            self.attributes(node, cpath)
        ppath = chain[-1][1]
        parts = self.content(node, [("formation", "+")])
        if parts is None:
            return None
        formations = []
        for i, f in enumerate(parts["formation"], 1):
            formation = self.formation(f, f"{ppath}/formation[{i}]")
            if formation is None:
                return None
            formations.append(formation)
        return tuple(formations)

    def formation(self, node, path):
        self.mark(path, node)
        if not self.attributes(node, path, ("name",)):
            return None
        parts = self.content(node, [("player_position", "*")])
        if parts is None:
            return None
        positions = []
        for i, p in enumerate(parts["player_position"], 1):
            ppath = f"{path}/player_position[{i}]"
            self.mark(ppath, p)
            attrs_ok = self.attributes(p, ppath, ("player_id",), ("desc",))
            coords = self.content(p, [("coord_x", "1"), ("coord_y", "1")])
            if coords is None or not attrs_ok:
                return None
            desc = p.attrs.get("desc")
            positions.append(PlayerPosition(
                player_id=self.integer(p.attrs["player_id"], p, f"{ppath}/@player_id"),
                coord_x=self.int_leaf(coords["coord_x"][0], f"{ppath}/coord_x"),
                coord_y=self.int_leaf(coords["coord_y"][0], f"{ppath}/coord_y"),
                desc=None if desc is None else normalize_token(desc),
            ))
        return Formation(node.attrs["name"], tuple(positions))

    def locate(self, path: str) -> tuple[int, int]:
        while path:
            if path in self.positions:
                return self.positions[path]
            path = path.rsplit("/", 1)[0]
        return (1, 1)


def check_fersml(data: bytes) -> tuple[Optional[FersmlDocument], list[ParseDiagnostic]]:
    """Parse and validate, returning the document (or None) and all diagnostics."""
    try:
        root = _read_tree(data)
    except _Forbidden:
        return None, [ParseDiagnostic(1, 1, "DTDs and entity declarations are not allowed", MALFORMED)]
    except expat.ExpatError as exc:
        return None, [ParseDiagnostic(max(exc.lineno, 1), exc.offset + 1,
                                      expat.ErrorString(exc.code), MALFORMED)]
    builder = _Builder()
    doc = builder.document(root)
    diagnostics = list(builder.diagnostics)
    if doc is not None:
        for finding in validate_document(doc):
            if finding.path in builder.bad_paths:
                continue
            line, column = builder.locate(finding.path)
            diagnostics.append(ParseDiagnostic(line, column, str(finding), FACET))
    diagnostics.sort(key=lambda d: (d.line, d.column))
    if diagnostics:
        return None, diagnostics
    return doc, []


def parse_fersml(data: Union[bytes, str]) -> FersmlDocument:
    """Parse a FerSML byte stream into a validated document.

    Raises :class:`FersmlSyntaxError` listing every diagnostic otherwise.
    """
    if isinstance(data, str):
        data = data.encode("utf-8")
    doc, diagnostics = check_fersml(data)
    if diagnostics:
        raise FersmlSyntaxError(diagnostics)
    return doc


def load_fersml(path: Union[str, Path]) -> FersmlDocument:
    return parse_fersml(Path(path).read_bytes())


def sample_bytes() -> bytes:
    """The bundled sample avatar file (schema version 0.0.2)."""
    return resources.files("fersml.data").joinpath("sample.fersml.xml").read_bytes()


def sample_document() -> FersmlDocument:
    return parse_fersml(sample_bytes())


# -- serialization ------------------------------------------------------------

class _Writer:
    def __init__(self):
        self.lines = ['<?xml version="1.0" encoding="UTF-8"?>']
        self.depth = 0

    def _attrs(self, attrs):
        return "".join(f" {k}={quoteattr(str(v))}" for k, v in attrs if v is not None)

    def open(self, tag, *attrs):
        self.lines.append(f"{'  ' * self.depth}<{tag}{self._attrs(attrs)}>")
        self.depth += 1

    def close(self, tag):
        self.depth -= 1
        self.lines.append(f"{'  ' * self.depth}</{tag}>")

    def empty(self, tag, *attrs):
        self.lines.append(f"{'  ' * self.depth}<{tag}{self._attrs(attrs)}/>")

    def leaf(self, tag, value, *attrs):
        self.lines.append(f"{'  ' * self.depth}<{tag}{self._attrs(attrs)}>{escape(str(value))}</{tag}>")

    def block(self, tag, items, emit, *attrs):
        if not items:
            self.empty(tag, *attrs)
            return
        self.open(tag, *attrs)
        for item in items:
            emit(item)
        self.close(tag)


def _num(value: float) -> str:
    return repr(float(value))


def serialize_fersml(doc: FersmlDocument) -> bytes:
    """Render ``doc`` as UTF-8 XML with two-space indentation."""
    w = _Writer()
    w.open("fersml")

    w.open("coach")
    w.block("starting_team", doc.coach.starting_team, lambda e: w.empty(
        "player", ("player_id", e.player_id), ("squad_number", e.squad_number),
        ("formation_name", e.formation_name)))
    w.close("coach")

    for avatar in doc.avatars:
        p = avatar.person
        w.open("avatar")
        w.open("person", ("squad_number", p.squad_number))
        for name in ("firstname", "lastname", "age", "height", "weight",
                     "dominant_foot", "usual_position", "actual_position"):
            w.leaf(name, getattr(p, name))
        w.close("person")
        est = avatar.estimations
        w.open("estimations")
        w.open("skills")
        for name in SKILL_NAMES:
            w.leaf(name, est.skills[name])
        w.close("skills")
        tables = [(n, getattr(est, n)) for n in ("shutting_goal", "gaining_ball")
                  if getattr(est, n) is not None]
        w.block("actions", tables, lambda item: w.block(
            item[0], item[1].entries, lambda e: w.leaf("prob", _num(e[1]), ("dist", _num(e[0])))))
        w.close("estimations")
        w.close("avatar")

    sim = doc.simulation
    w.open("simulation")
    w.open("control")
    w.open("impact_of_skills")
    for duel in DUELS:
        w.block(duel, sim.impact_of_skills[duel], lambda f: w.empty(
            "factor", ("name", f.name), ("percent", f.percent)))
    w.close("impact_of_skills")
    w.close("control")
    w.open("knowledge_base")
    w.open("tactics")
    w.open("play_system")
    for formation in sim.tactics:
        w.open("formation", ("name", formation.name))
        for pos in formation.positions:
            w.open("player_position", ("player_id", pos.player_id), ("desc", pos.desc))
            w.leaf("coord_x", pos.coord_x)
            w.leaf("coord_y", pos.coord_y)
            w.close("player_position")
        w.close("formation")
    w.close("play_system")
    w.close("tactics")
    w.close("knowledge_base")
    w.close("simulation")

    w.close("fersml")
    return ("\n".join(w.lines) + "\n").encode("utf-8")
