"""Command line entry point.

Exit codes: 0 success (or distributions not rejected), 1 validation failure,
2 usage or I/O error, 3 statistical rejection.

Paths starting with ``@`` name bundled data: ``@sample`` is the sample
avatar file, ``@table1`` the real tournament goal totals and ``@table2:N``
row N of the published simulated totals.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from fersml import __version__
from fersml.engine import PitchConfig, events_jsonl, simulate_match, trace_csv
from fersml.forcefield import AWAY, HOME, ForceField, accumulate, render, sum_fields
from fersml.rng import MASK64
from fersml.stats import SIMULATED_ROWS, compare_distributions, describe, real_wc_goals
from fersml.tournament import Team, apply_setting, repeat_world_cups, simulate_world_cup
from fersml.xmlio import FersmlSyntaxError, check_fersml, parse_fersml, sample_bytes

EXIT_OK, EXIT_INVALID, EXIT_USAGE, EXIT_REJECTED = 0, 1, 2, 3


class _Failure(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _read_bytes(token: str) -> bytes:
    if token == "@sample":
        return sample_bytes()
    try:
        return Path(token).read_bytes()
    except OSError as exc:
        raise _Failure(EXIT_USAGE, f"{token}: {exc.strerror or exc}") from None


def _load_doc(token: str):
    data = _read_bytes(token)
    try:
        return parse_fersml(data)
    except FersmlSyntaxError as exc:
        lines = [f"{token}:{d.line}:{d.column}: {d.kind}: {d.message}" for d in exc.diagnostics]
        raise _Failure(EXIT_INVALID, "\n".join(lines)) from None


def _read_sample(token: str) -> list[float]:
    if token == "@table1":
        return [float(v) for v in real_wc_goals()]
    if token.startswith("@table2:"):
        try:
            return [float(v) for v in SIMULATED_ROWS[int(token.split(":", 1)[1]) - 1]]
        except (ValueError, IndexError):
            raise _Failure(EXIT_USAGE, f"{token}: rows are numbered 1 to {len(SIMULATED_ROWS)}") from None
    try:
        text = _read_bytes(token).decode("utf-8")
    except UnicodeDecodeError:
        raise _Failure(EXIT_USAGE, f"{token}: not UTF-8 text") from None
    values = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            values.append(float(line))
        except ValueError:
            raise _Failure(EXIT_USAGE, f"{token}:{lineno}: not a number: {line.strip()!r}") from None
    if len(values) < 2:
        raise _Failure(EXIT_USAGE, f"{token}: need at least two values, found {len(values)}")
    return values


def _derived_seed(*parts: bytes) -> int:
    h = hashlib.sha256()
    for part in parts:
        h.update(hashlib.sha256(part).digest())
    return int.from_bytes(h.digest()[:8], "little")


def _pitch(args) -> PitchConfig:
    kwargs = {}
    if args.ticks is not None:
        kwargs["regulation_ticks"] = args.ticks
    if getattr(args, "meters_per_unit", None) is not None:
        kwargs["meters_per_unit"] = args.meters_per_unit
    try:
        return PitchConfig(**kwargs)
    except ValueError as exc:
        raise _Failure(EXIT_USAGE, str(exc)) from None


def _out_dir(args) -> Path:
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise _Failure(EXIT_USAGE, f"{out}: {exc.strerror or exc}") from None
    return out


def _write_renders(field: ForceField, mode: str, out: Path) -> list[Path]:
    ext, kind = {"heatmap": ("ppm", "heatmap_ppm"), "vectors": ("csv", "vectors_csv")}[mode]
    written = []
    for name, grid in (("home", field.team(HOME)), ("away", field.team(AWAY)), ("sum", sum_fields(field))):
        path = out / f"{name}.{ext}"
        path.write_bytes(render(grid, kind))
        written.append(path)
    return written


# -- commands -----------------------------------------------------------------

def cmd_validate(args) -> int:
    code = EXIT_OK
    for token in args.paths:
        try:
            data = _read_bytes(token)
        except _Failure as exc:
            print(exc, file=sys.stderr)
            code = EXIT_USAGE
            continue
        _, diagnostics = check_fersml(data)
        if not diagnostics:
            print(f"{token}: OK")
            continue
        for d in diagnostics:
            print(f"{token}:{d.line}:{d.column}: {d.kind}: {d.message}")
        if code == EXIT_OK:
            code = EXIT_INVALID
    return code


def cmd_match(args) -> int:
    home = _load_doc(args.home)
    away = _load_doc(args.away)
    pitch = _pitch(args)
    seed = args.seed if args.seed is not None else _derived_seed(
        _read_bytes(args.home), _read_bytes(args.away), str(pitch.regulation_ticks).encode())
    seed &= MASK64
    print(f"seed: {seed}")
    result = simulate_match(home, away, pitch, seed, knockout=args.knockout,
                            home_formation=args.home_formation, away_formation=args.away_formation)
    out = _out_dir(args)
    (out / "events.jsonl").write_text(events_jsonl(result.events), encoding="utf-8")
    (out / "trace.csv").write_text(trace_csv(result.ball_trace), encoding="utf-8")
    if args.render:
        field = accumulate(ForceField(), result.ball_trace)
        for path in _write_renders(field, args.render, out):
            print(f"wrote {path}")
    line = f"{result.score[0]}:{result.score[1]}"
    if result.shootout is not None:
        line += f" ({result.shootout[0]}:{result.shootout[1]} on penalties)"
    print(line)
    return EXIT_OK


def cmd_worldcup(args) -> int:
    if len(args.teams) != 8:
        print(f"worldcup: exactly 8 team files are needed, got {len(args.teams)}", file=sys.stderr)
        return EXIT_USAGE
    if args.count < 1:
        print("worldcup: --count must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    setting = None
    if args.setting:
        try:
            setting = json.loads(_read_bytes(args.setting).decode("utf-8"))
        except (ValueError, UnicodeDecodeError) as exc:
            raise _Failure(EXIT_USAGE, f"{args.setting}: {exc}") from None
    teams = []
    for i, token in enumerate(args.teams, 1):
        doc = _load_doc(token)
        if setting:
            doc = apply_setting(doc, setting)
        teams.append(Team(f"team {i}", doc))
    pitch = _pitch(args)
    seed = args.seed if args.seed is not None else _derived_seed(
        *(_read_bytes(t) for t in args.teams), str(args.count).encode())
    seed &= MASK64
    print(f"seed: {seed}")
    totals = repeat_world_cups(teams, pitch, seed, args.count, workers=args.workers)
    first = simulate_world_cup(teams, pitch, seed)
    summary = {
        "base_seed": seed,
        "count": args.count,
        "totals": totals,
        "first_world_cup": first.summary(),
    }
    if len(totals) >= 2:
        stats = describe(totals)
        summary["sample_stats"] = {"n": stats.n, "mean": stats.mean, "std_corrected": stats.std_corrected}
    out = _out_dir(args)
    (out / "totals.txt").write_text("".join(f"{t}\n" for t in totals), encoding="utf-8")
    (out / "worldcup.json").write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    for t in totals:
        print(t)
    return EXIT_OK


def cmd_compare(args) -> int:
    if not 0 < args.alpha < 1:
        print("compare: --alpha must lie in (0, 1)", file=sys.stderr)
        return EXIT_USAGE
    x = _read_sample(args.sample_a)
    y = _read_sample(args.sample_b)
    result = compare_distributions(x, y, args.alpha)
    print(result.mann_whitney.summary())
    print(result.runs.summary())
    if result.overall_identical_not_rejected:
        print("identical distributions: not rejected")
        return EXIT_OK
    print("identical distributions: rejected")
    return EXIT_REJECTED


def cmd_render_field(args) -> int:
    text = _read_bytes(args.trace).decode("utf-8")
    rows = text.splitlines()
    if not rows or rows[0].strip() != "tick,lx,ly,lcx,lcy,possession":
        raise _Failure(EXIT_USAGE, f"{args.trace}: expected a trace CSV header")
    records = []
    for lineno, row in enumerate(rows[1:], 2):
        if not row.strip():
            continue
        parts = row.split(",")
        try:
            records.append([int(v) for v in parts[1:5]] + [{"home": 0, "away": 1}[parts[5].strip()]])
        except (ValueError, KeyError, IndexError):
            raise _Failure(EXIT_USAGE, f"{args.trace}:{lineno}: malformed trace record") from None
    field = accumulate(ForceField(), np.array(records, dtype=np.int64).reshape(-1, 5))
    out = _out_dir(args)
    for path in _write_renders(field, args.render, out):
        print(f"wrote {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fersml", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check FerSML files against the grammar")
    p.add_argument("paths", nargs="+")
    p.set_defaults(func=cmd_validate)

    def sim_flags(p):
        p.add_argument("--seed", type=int, help="64-bit seed (derived from the inputs when omitted)")
        p.add_argument("--ticks", type=int, help="regulation length in 100 ms ticks (default 54000)")
        p.add_argument("--meters-per-unit", type=float, help="pitch scale (default 105/1024)")
        p.add_argument("--out", default=".", help="output directory")

    p = sub.add_parser("match", help="simulate one match")
    p.add_argument("home")
    p.add_argument("away")
    sim_flags(p)
    p.add_argument("--knockout", action="store_true", help="extra time and penalties when level")
    p.add_argument("--home-formation")
    p.add_argument("--away-formation")
    p.add_argument("--render", choices=("heatmap", "vectors"))
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("worldcup", help="simulate final-eight tournaments")
    p.add_argument("teams", nargs="+", help="eight FerSML files in draw order")
    sim_flags(p)
    p.add_argument("--count", type=int, default=10, help="number of tournaments")
    p.add_argument("--setting", help="JSON file overriding skills / impact_of_skills")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_worldcup)

    p = sub.add_parser("compare", help="Mann-Whitney and runs tests on two samples")
    p.add_argument("sample_a")
    p.add_argument("sample_b")
    p.add_argument("--alpha", type=float, default=0.05)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("render-field", help="render socceral force fields from a trace CSV")
    p.add_argument("trace")
    p.add_argument("--render", choices=("heatmap", "vectors"), default="heatmap")
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_render_field)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _Failure as exc:
        print(exc, file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
