# core/cli.py
"""
Command-line front end: tally, classify, check, orbit, enumerate.

Every command builds one report dictionary; text and JSON output are
both rendered from it. Exit status: 0 success / no counterexample,
1 counterexample found, 2 error.
"""
import argparse
import json
import sys
from math import comb
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from core.ballots import BallotSpace, format_ranking, parse_profile
from core.config import load_settings
from core.errors import SFBCError
from core.geometry import classify_vector, format_vector, orbit, parse_vector, resolve_reading
from core.helpers import parse_workers
from core.logger import get_logger
from core.methods import build, load_method
from core.oracle import Criterion, SearchScope, check
from core.stages import classify_stage, evaluate, minimal_generators

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_COUNTEREXAMPLE = 1
EXIT_ERROR = 2

COMMANDS = ("tally", "classify", "check", "orbit", "enumerate")


class RunConfig(BaseModel):
    """Validated options for one CLI run."""
    model_config = ConfigDict(extra="forbid")

    command: Literal["tally", "classify", "check", "orbit", "enumerate"]
    method: Optional[str] = None
    method_file: Optional[Path] = None
    profile: Optional[Path] = None
    vector: Optional[Path] = None
    candidates: Optional[int] = Field(default=None, ge=2)
    ties: Optional[bool] = None
    truncation: Optional[bool] = None
    levels: Optional[int] = Field(default=None, ge=2)
    criterion: Criterion = Criterion.SFBC
    min_voters: int = Field(default=1, ge=1)
    max_voters: int = Field(default=6, ge=1)
    skip_on_tie: bool = True
    limit: Optional[int] = Field(default=None, ge=1)
    workers: int = Field(default=1, ge=1)
    chunk_size: int = Field(default=256, ge=1)
    voters: Optional[int] = Field(default=None, ge=1)
    reading: Literal["auto", "sfbc", "fbc"] = "auto"
    output_format: Literal["text", "json"] = "text"

    @model_validator(mode="after")
    def _check_sources(self) -> "RunConfig":
        if self.method and self.method_file:
            raise ValueError("give either --method or --method-file, not both")
        if self.max_voters < self.min_voters:
            raise ValueError("--max-voters must be at least --min-voters")
        if self.command in ("tally", "check") and not (self.method or self.method_file):
            raise ValueError(f"{self.command} needs --method or --method-file")
        if self.command == "tally" and self.profile is None:
            raise ValueError("tally needs --profile")
        if self.command == "orbit" and self.vector is None:
            raise ValueError("orbit needs --vector")
        if self.command == "classify" and not (self.vector or self.method or self.method_file):
            raise ValueError("classify needs --vector, --method or --method-file")
        return self


# ---------------------------------------------------------------------------
# Sources
# ---------------------------------------------------------------------------

def _load_method(config: RunConfig):
    if config.method_file:
        return load_method(config.method_file)
    return build(config.method, n_c=config.candidates, allow_ties=config.ties,
                 allow_truncation=config.truncation, levels=config.levels)


def _space(config: RunConfig) -> BallotSpace:
    return BallotSpace(config.candidates or 3, allow_ties=bool(config.ties),
                       allow_truncation=bool(config.truncation), levels=config.levels)


def _load_vector(config: RunConfig):
    text = Path(config.vector).read_text(encoding="utf-8")
    explicit = any(v is not None for v in (config.candidates, config.ties, config.truncation, config.levels))
    return parse_vector(text, _space(config) if explicit else None)


def _fractions(values) -> List[str]:
    return [str(v) for v in values]


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_tally(config: RunConfig) -> Tuple[Dict[str, Any], int]:
    """Winner or tie-set of a profile file, with the per-stage trace."""
    method = _load_method(config)
    profile = parse_profile(Path(config.profile).read_text(encoding="utf-8"), method.space)
    outcome = evaluate(method, profile, trace=True)
    report = {
        "command": "tally",
        "method": method.name,
        "ballots": method.space.describe(),
        "voters": str(profile.n_voters),
        "outcome": outcome.to_dict(method.space),
        "result": outcome.describe(method.space),
        "trace": list(outcome.trace),
    }
    return report, EXIT_OK


def _classify_method(method, reading: str) -> Dict[str, Any]:
    stages = []
    for number, stage in enumerate(method.stages, start=1):
        generators = minimal_generators(stage)
        stages.append({
            "stage": number,
            "label": stage.label,
            "type": classify_stage(stage, reading).value,
            "conditions": len(stage.conditions),
            "generator_count": len(generators),
            "generators": [{
                "components": _fractions(g.components),
                "category": classify_vector(g, reading).describe(method.space),
                "orbit_size": len(orbit(g)),
            } for g in generators],
        })
    return {
        "method": method.name,
        "ballots": method.space.describe(),
        "reading": resolve_reading(method.space, reading),
        "stages": stages,
        "direct_tally": not method.stages,
    }


def cmd_classify(config: RunConfig) -> Tuple[Dict[str, Any], int]:
    """Vector category, or stage types and generators of a method."""
    report: Dict[str, Any] = {"command": "classify"}
    if config.vector:
        v = _load_vector(config)
        category = classify_vector(v, config.reading)
        report["vector"] = {
            "ballots": v.space.describe(),
            "reading": resolve_reading(v.space, config.reading),
            "components": _fractions(v.components),
            "category": category.describe(v.space),
            "passing_pairs": sorted([v.space.label_of(i), v.space.label_of(j)] for i, j in category.passing),
            "orbit_size": len(orbit(v)),
        }
    else:
        report.update(_classify_method(_load_method(config), config.reading))
    return report, EXIT_OK


def cmd_check(config: RunConfig) -> Tuple[Dict[str, Any], int]:
    """Run the oracle; exit 1 when a counterexample is found."""
    method = _load_method(config)
    scope = SearchScope(method.space, config.max_voters, config.criterion, config.skip_on_tie,
                        config.min_voters, config.limit, config.workers, config.chunk_size)
    verdict = check(method, scope)
    report = {"command": "check"}
    report.update(verdict.to_dict())
    return report, EXIT_OK if verdict.passed else EXIT_COUNTEREXAMPLE


def cmd_orbit(config: RunConfig) -> Tuple[Dict[str, Any], int]:
    """Swap orbit of a vector."""
    v = _load_vector(config)
    images = orbit(v)
    report = {
        "command": "orbit",
        "ballots": v.space.describe(),
        "orbit_size": len(images),
        "vectors": [_fractions(w.components) for w in images],
        "literals": [format_vector(w) for w in images],
    }
    return report, EXIT_OK


def cmd_enumerate(config: RunConfig) -> Tuple[Dict[str, Any], int]:
    """Ballot types of a space, and optionally the number of profiles."""
    if config.method or config.method_file:
        space = _load_method(config).space
    else:
        space = _space(config)
    report: Dict[str, Any] = {
        "command": "enumerate",
        "ballots": space.describe(),
        "ballot_count": space.dimension,
        "rankings": [format_ranking(r, space) for r in space.ballots],
    }
    if config.voters:
        report["voters"] = config.voters
        report["profile_count"] = comb(config.voters + space.dimension - 1, space.dimension - 1)
    return report, EXIT_OK


HANDLERS = {
    "tally": cmd_tally,
    "classify": cmd_classify,
    "check": cmd_check,
    "orbit": cmd_orbit,
    "enumerate": cmd_enumerate,
}


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------

def _render_outcome(outcome: Dict[str, Any]) -> str:
    names = ", ".join(outcome["candidates"])
    text = f"{outcome['kind']} {names}".rstrip()
    if outcome["tiebroken"]:
        text += " (tiebreak)"
    return text


def render_text(report: Dict[str, Any]) -> str:
    """Human-readable rendering of a report."""
    lines: List[str] = []
    command = report["command"]

    if command == "tally":
        lines.append(f"Method:  {report['method']}")
        lines.append(f"Ballots: {report['ballots']}")
        lines.append(f"Voters:  {report['voters']}")
        lines.append(f"Result:  {report['result']}")
        if report["outcome"]["diagnostic"]:
            lines.append(f"Note:    {report['outcome']['diagnostic']}")
        for entry in report["trace"]:
            lines.append(f"Stage {entry['stage']}: {entry['label']}")
            for row in entry["conditions"]:
                lines.append(f"  {row['winner']}: {row['status']:<8} [{', '.join(row['products'])}]")

    elif command == "classify" and "vector" in report:
        v = report["vector"]
        lines.append(f"Ballots:  {v['ballots']} (reading {v['reading']})")
        lines.append(f"Category: {v['category']}")
        lines.append(f"Orbit:    {v['orbit_size']} vectors")

    elif command == "classify":
        lines.append(f"Method:  {report['method']}")
        lines.append(f"Ballots: {report['ballots']} (reading {report['reading']})")
        if report["direct_tally"]:
            lines.append("Direct tally: no stage form")
        for stage in report["stages"]:
            lines.append(f"Stage {stage['stage']}: {stage['type']}, {stage['generator_count']} generator(s), "
                         f"{stage['conditions']} conditions  [{stage['label']}]")
            for g in stage["generators"]:
                lines.append(f"  {g['category']}, orbit {g['orbit_size']}: ({', '.join(g['components'])})")

    elif command == "check":
        scope = report["scope"]
        lines.append(f"Method:    {report['method']}")
        lines.append(f"Criterion: {scope['criterion']}  ballots [{scope['ballots']}]  "
                     f"voters {scope['min_voters']}..{scope['max_voters']}  skip_on_tie={scope['skip_on_tie']}")
        lines.append(f"Profiles examined:  {report['profiles_examined']}")
        lines.append(f"Instances examined: {report['instances_examined']}")
        lines.append(f"Instances skipped:  {report['instances_skipped']}")
        lines.append(f"Result: {report['result']}")
        for note in report["notes"]:
            lines.append(f"Note: {note}")
        for number, ce in enumerate(report["counterexamples"], start=1):
            lines.append("")
            lines.append(f"Counterexample {number}: sincere {ce['sincere']}, cast {ce['cast']}, "
                         f"switch {ce['voters_changed']} to {ce['manipulation']}")
            lines.append(f"  sincere outcome:     {_render_outcome(ce['sincere_outcome'])}")
            lines.append(f"  manipulated outcome: {_render_outcome(ce['manipulated_outcome'])}")
            if ce["protected_ballot"]:
                lines.append(f"  best protected:      {ce['protected_ballot']} -> "
                             f"{_render_outcome(ce['protected_outcome'])}")
            lines.append("  profile:")
            lines.extend(f"    {row}" for row in ce["profile"].splitlines())
            lines.append("  manipulated profile:")
            lines.extend(f"    {row}" for row in ce["manipulated_profile"].splitlines())

    elif command == "orbit":
        lines.append(f"Ballots: {report['ballots']}")
        lines.append(f"Orbit size: {report['orbit_size']}")
        for vector in report["vectors"]:
            lines.append(f"  ({', '.join(vector)})")

    elif command == "enumerate":
        lines.append(f"Ballots: {report['ballots']}")
        lines.append(f"Ballot types: {report['ballot_count']}")
        for k, ranking in enumerate(report["rankings"]):
            lines.append(f"  {k:>3}  {ranking}")
        if "profile_count" in report:
            lines.append(f"Profiles with {report['voters']} voters: {report['profile_count']}")

    return "\n".join(lines) + "\n"


def render(report: Dict[str, Any], output_format: str) -> str:
    if output_format == "json":
        return json.dumps(report, indent=2, sort_keys=True) + "\n"
    return render_text(report)


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sfbc",
        description="Stage geometry and exhaustive favorite-betrayal checks for ranked-ballot methods"
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    def common(sub: argparse.ArgumentParser):
        sub.add_argument("--method", help="Builtin method, e.g. 'quota-points q=3/4'")
        sub.add_argument("--method-file", type=Path, help="Method definition file")
        sub.add_argument("--candidates", type=int, help="Number of candidates")
        sub.add_argument("--ties", action="store_true", default=None, help="Allow tied ranks")
        sub.add_argument("--truncation", action="store_true", default=None, help="Allow truncated ballots")
        sub.add_argument("--levels", type=int, help="Graded ballots with this many grades")
        sub.add_argument("--reading", choices=["auto", "sfbc", "fbc"], help="First-place reading")
        sub.add_argument("--format", dest="output_format", choices=["text", "json"], help="Output format")

    tally = subparsers.add_parser("tally", help="Evaluate a method on a profile file")
    common(tally)
    tally.add_argument("--profile", type=Path, required=True, help="Profile file (COUNT: RANKING lines)")

    classify = subparsers.add_parser("classify", help="Classify a vector or a method's stages")
    common(classify)
    classify.add_argument("--vector", type=Path, help="Vector literal file")

    check_cmd = subparsers.add_parser("check", help="Exhaustive criterion check")
    common(check_cmd)
    check_cmd.add_argument("--criterion", choices=[c.value for c in Criterion], default="sfbc")
    check_cmd.add_argument("--min-voters", type=int)
    check_cmd.add_argument("--max-voters", type=int)
    check_cmd.add_argument("--no-skip-on-tie", dest="skip_on_tie", action="store_false", default=None,
                           help="Resolve ties with the method's tiebreak")
    check_cmd.add_argument("--limit", type=int, help="Stop after this many counterexamples")
    check_cmd.add_argument("--workers", type=parse_workers,
                           help="Worker processes (default: settings, 'auto' = all cores)")

    orbit_cmd = subparsers.add_parser("orbit", help="Swap orbit of a vector")
    common(orbit_cmd)
    orbit_cmd.add_argument("--vector", type=Path, required=True)

    enumerate_cmd = subparsers.add_parser("enumerate", help="List ballot types")
    common(enumerate_cmd)
    enumerate_cmd.add_argument("--voters", type=int, help="Also count profiles of this size")

    return parser


def _settings_defaults(settings: Dict[str, Any]) -> Dict[str, Any]:
    oracle = settings.get("oracle", {})
    workers = parse_workers(oracle.get("workers", 1))
    return {
        "max_voters": oracle.get("max_voters", 6),
        "skip_on_tie": oracle.get("skip_on_tie", True),
        "workers": workers,
        "chunk_size": oracle.get("chunk_size", 256),
        "reading": settings.get("classification", {}).get("reading", "auto"),
        "output_format": settings.get("reports", {}).get("format", "text"),
    }


def make_config(args: argparse.Namespace, settings: Optional[Dict[str, Any]] = None) -> RunConfig:
    """Merge settings defaults with explicit CLI flags."""
    values = _settings_defaults(settings if settings is not None else load_settings())
    values.update({k: v for k, v in vars(args).items() if v is not None})
    return RunConfig(**values)


def main(argv: Optional[List[str]] = None) -> int:
    """Run one command and return its exit status."""
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        # argparse has already printed usage or the error
        return e.code if isinstance(e.code, int) else EXIT_ERROR
    try:
        config = make_config(args)
        report, status = HANDLERS[config.command](config)
    except ValidationError as e:
        print(f"error: invalid options: {e}", file=sys.stderr)
        return EXIT_ERROR
    except (SFBCError, OSError) as e:
        logger.debug(f"{args.command} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR

    sys.stdout.write(render(report, config.output_format))
    return status
