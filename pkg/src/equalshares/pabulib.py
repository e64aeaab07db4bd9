"""Reading and writing Pabulib ``.pb`` election files.

The format is line-based UTF-8 with three sections, each introduced by its
name on its own line (META, PROJECTS, VOTES), followed by a
semicolon-separated header row and data rows.  META rows are key;value
pairs; the vote column holds a comma-separated list of approved project
ids.  Costs are parsed as exact decimals into rationals, never floats.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .model import Election, Rational

logger = logging.getLogger(__name__)

_SECTIONS = ("META", "PROJECTS", "VOTES")


class PabulibError(ValueError):
    """Raised for files that cannot be interpreted as an approval election."""


@dataclass(frozen=True)
class PabulibProject:
    project_id: str
    cost: Rational
    extras: tuple[tuple[str, str], ...] = ()


@dataclass(frozen=True)
class PabulibVote:
    voter_id: str
    approvals: tuple[str, ...]
    extras: tuple[tuple[str, str], ...] = ()


@dataclass
class PabulibInstance:
    """Structured contents of a ``.pb`` file.  ``warnings`` collects
    recoverable oddities (count mismatches, dropped references) and is not
    part of equality."""

    meta: dict[str, str]
    projects: list[PabulibProject]
    votes: list[PabulibVote]
    warnings: list[str] = field(default_factory=list, compare=False)

    @property
    def budget(self) -> Rational:
        return _parse_amount(self.meta["budget"], context="META budget")


def _parse_amount(text: str, context: str) -> Rational:
    try:
        return Fraction(text.strip().replace(",", "."))
    except (ValueError, ZeroDivisionError) as exc:
        raise PabulibError(f"malformed amount in {context}: {text!r}") from exc


def _split_sections(text: str) -> dict[str, list[str]]:
    sections: dict[str, list[str]] = {}
    current: Optional[str] = None
    for raw in text.splitlines():
        line = raw.strip("﻿").rstrip("\n\r")
        if line.strip() in _SECTIONS:
            current = line.strip()
            if current in sections:
                raise PabulibError(f"duplicate section {current}")
            sections[current] = []
            continue
        if current is not None and line.strip():
            sections[current].append(line)
    for name in _SECTIONS:
        if name not in sections:
            raise PabulibError(f"missing section {name}")
    return sections


def _rows(lines: list[str]) -> list[list[str]]:
    return list(csv.reader(lines, delimiter=";"))


def parse_pb(text: str) -> PabulibInstance:
    """Parse a ``.pb`` file into a structured instance.

    Hard errors: missing sections, missing budget, a vote type other than
    approval, malformed costs, duplicate project or voter ids.  Soft
    problems (count mismatches, votes for unknown projects) are logged and
    recorded as warnings; the data rows win.
    """
    sections = _split_sections(text)
    warnings: list[str] = []

    meta: dict[str, str] = {}
    meta_rows = _rows(sections["META"])
    for row in meta_rows[1:] if meta_rows and meta_rows[0][:1] == ["key"] else meta_rows:
        if len(row) < 2:
            warnings.append(f"ignoring malformed META row: {';'.join(row)!r}")
            continue
        meta[row[0].strip()] = row[1].strip()

    if "budget" not in meta:
        raise PabulibError("missing budget in META")
    _parse_amount(meta["budget"], context="META budget")
    vote_type = meta.get("vote_type")
    if vote_type is None:
        raise PabulibError("missing vote_type in META")
    if vote_type.strip().lower() != "approval":
        raise PabulibError(f"unsupported vote_type {vote_type!r}: only approval ballots are modelled")

    project_rows = _rows(sections["PROJECTS"])
    if not project_rows:
        raise PabulibError("PROJECTS section has no header")
    header = [h.strip() for h in project_rows[0]]
    if "project_id" not in header or "cost" not in header:
        raise PabulibError("PROJECTS header must contain project_id and cost")
    id_col, cost_col = header.index("project_id"), header.index("cost")
    projects: list[PabulibProject] = []
    seen_projects: set[str] = set()
    for row in project_rows[1:]:
        if max(id_col, cost_col) >= len(row):
            raise PabulibError(f"malformed PROJECTS row: {';'.join(row)!r}")
        pid = row[id_col].strip()
        if pid in seen_projects:
            raise PabulibError(f"duplicate project id {pid!r}")
        seen_projects.add(pid)
        cost = _parse_amount(row[cost_col], context=f"cost of project {pid}")
        extras = tuple(
            (header[k], row[k].strip())
            for k in range(len(header))
            if k not in (id_col, cost_col) and k < len(row)
        )
        projects.append(PabulibProject(pid, cost, extras))

    vote_rows = _rows(sections["VOTES"])
    if not vote_rows:
        raise PabulibError("VOTES section has no header")
    vheader = [h.strip() for h in vote_rows[0]]
    if "voter_id" not in vheader or "vote" not in vheader:
        raise PabulibError("VOTES header must contain voter_id and vote")
    vid_col, vote_col = vheader.index("voter_id"), vheader.index("vote")
    votes: list[PabulibVote] = []
    seen_voters: set[str] = set()
    for row in vote_rows[1:]:
        if vid_col >= len(row):
            raise PabulibError(f"malformed VOTES row: {';'.join(row)!r}")
        vid = row[vid_col].strip()
        if vid in seen_voters:
            raise PabulibError(f"duplicate voter id {vid!r}")
        seen_voters.add(vid)
        raw_vote = row[vote_col].strip() if vote_col < len(row) else ""
        approvals: list[str] = []
        for token in filter(None, (t.strip() for t in raw_vote.split(","))):
            if token in seen_projects:
                approvals.append(token)
            else:
                warnings.append(f"voter {vid} approves unknown project {token}; reference dropped")
        extras = tuple(
            (vheader[k], row[k].strip())
            for k in range(len(vheader))
            if k not in (vid_col, vote_col) and k < len(row)
        )
        votes.append(PabulibVote(vid, tuple(approvals), extras))

    for key, count in (("num_projects", len(projects)), ("num_votes", len(votes))):
        declared = meta.get(key)
        if declared is None:
            warnings.append(f"META lacks {key}")
        elif declared.strip() != str(count):
            warnings.append(f"META declares {key}={declared.strip()}, file has {count}; records win")

    for message in warnings:
        logger.warning("%s", message)
    return PabulibInstance(meta=meta, projects=projects, votes=votes, warnings=warnings)


def read_pb(path) -> PabulibInstance:
    with open(path, encoding="utf-8") as handle:
        return parse_pb(handle.read())


def serialize_pb(instance: PabulibInstance) -> str:
    """Render an instance back to ``.pb`` text; parsing the result yields an
    equal instance."""
    buf = io.StringIO()
    writer = csv.writer(buf, delimiter=";", lineterminator="\n")
    buf.write("META\n")
    writer.writerow(["key", "value"])
    for key, value in instance.meta.items():
        writer.writerow([key, value])

    extra_project_cols = sorted({k for p in instance.projects for k, _ in p.extras})
    buf.write("PROJECTS\n")
    writer.writerow(["project_id", "cost"] + extra_project_cols)
    for p in instance.projects:
        extras = dict(p.extras)
        cost = p.cost.numerator if p.cost.denominator == 1 else p.cost
        writer.writerow([p.project_id, str(cost)] + [extras.get(c, "") for c in extra_project_cols])

    extra_vote_cols = sorted({k for v in instance.votes for k, _ in v.extras})
    buf.write("VOTES\n")
    writer.writerow(["voter_id", "vote"] + extra_vote_cols)
    for v in instance.votes:
        extras = dict(v.extras)
        writer.writerow([v.voter_id, ",".join(v.approvals)] + [extras.get(c, "") for c in extra_vote_cols])
    return buf.getvalue()


def write_pb(instance: PabulibInstance, path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(serialize_pb(instance))


def to_election(instance: PabulibInstance) -> Election:
    """Convert a parsed instance to the election model: the project
    tie-break order is file order, voters keep file order, and projects
    nobody approves are dropped with a warning (the rules assume every
    project has at least one supporter)."""
    approved: set[str] = set()
    for vote in instance.votes:
        approved.update(vote.approvals)
    kept: list[tuple[str, Rational]] = []
    for project in instance.projects:
        if project.project_id in approved:
            kept.append((project.project_id, project.cost))
        else:
            message = f"dropping project {project.project_id}: approved by no voter"
            logger.warning("%s", message)
            instance.warnings.append(message)
    return Election.create(
        projects=kept,
        ballots={v.voter_id: v.approvals for v in instance.votes},
        budget=instance.budget,
        voters=[v.voter_id for v in instance.votes],
    )


def election_to_instance(
    election: Election,
    extra_meta: Optional[dict[str, str]] = None,
) -> PabulibInstance:
    """Wrap an election as a Pabulib instance (for writing synthetic files)."""
    meta = {
        "description": "synthetic instance",
        "budget": str(election.budget.numerator if election.budget.denominator == 1 else election.budget),
        "vote_type": "approval",
        "num_projects": str(election.m),
        "num_votes": str(election.n),
    }
    if extra_meta:
        meta.update(extra_meta)
    projects = [PabulibProject(p, election.cost(p)) for p in election.project_ids]
    votes = [
        PabulibVote(v, tuple(p for p in election.project_ids if p in election.ballot(v)))
        for v in election.voters
    ]
    return PabulibInstance(meta=meta, projects=projects, votes=votes)


#: Column order of the benchmark results CSV.  ``executions`` counts base
#: rule invocations; certificate probes are reported separately.
RESULTS_COLUMNS = (
    "instance",
    "rule",
    "strategy",
    "executions",
    "gpc_probes",
    "efficiency",
    "wall_time_s",
    "best_virtual_budget",
)


def write_results_csv(rows: Iterable[dict], path) -> None:
    """Write benchmark rows (plain dicts) with a fixed, stable column set."""
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=list(RESULTS_COLUMNS), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({c: row.get(c, "") for c in RESULTS_COLUMNS})
