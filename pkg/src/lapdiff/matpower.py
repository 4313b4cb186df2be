"""Parsing of MATPOWER-style case files and DC Laplacian extraction.

Only the numeric ``mpc.bus``/``mpc.branch`` blocks (plus scalar fields such
as ``mpc.baseMVA``) of the ``.m`` case format are understood; generator and
cost tables are carried along untouched when present.  The DC reduction
weighs each in-service branch by the reciprocal of its reactance and merges
parallel branches by adding those weights.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from .graph import Network, laplacian

__all__ = ["CaseData", "CaseParseError", "parse_case", "dc_laplacian"]

# branch table column positions (0-based), MATPOWER layout
F_BUS, T_BUS, BR_R, BR_X, BR_B, BR_STATUS = 0, 1, 2, 3, 4, 10


class CaseParseError(ValueError):
    """Malformed case text; the message carries the offending line number."""


@dataclass
class CaseData:
    """Numeric contents of a case file."""

    baseMVA: float
    bus: np.ndarray  # one row per bus, original column count preserved
    branch: np.ndarray
    arrays: dict[str, np.ndarray] = field(default_factory=dict)  # other mpc.<name> blocks
    name: str = ""

    @property
    def n_bus(self) -> int:
        return self.bus.shape[0]

    @property
    def n_branch(self) -> int:
        return self.branch.shape[0]

    def bus_ids(self) -> np.ndarray:
        return self.bus[:, 0].astype(int)


_BLOCK_START = re.compile(r"mpc\.(\w+)\s*=\s*\[(.*)$")
_SCALAR = re.compile(r"mpc\.(\w+)\s*=\s*([^\[;]+);")
_FUNCTION = re.compile(r"function\s+\w+\s*=\s*(\w+)")


def _parse_row(tokens: list[str], lineno: int) -> list[float]:
    row = []
    for tok in tokens:
        try:
            row.append(float(tok))
        except ValueError:
            raise CaseParseError(f"line {lineno}: non-numeric token {tok!r}") from None
    return row


def parse_case(text: str) -> CaseData:
    """Parse case text into numeric matrices.

    Requires ``mpc.bus`` and ``mpc.branch`` blocks.  ``%`` comments are
    stripped, rows end at ``;`` or end of line, and every row of a block
    must have the same number of columns.
    """
    blocks: dict[str, list[list[float]]] = {}
    block_lines: dict[str, int] = {}
    scalars: dict[str, str] = {}
    name = ""
    current: str | None = None
    rows: list[list[float]] = []
    pending: list[str] = []

    def flush_pending(lineno: int) -> None:
        # a row may be split across physical lines until a ';' shows up
        if pending:
            rows.append(_parse_row(pending, lineno))
            pending.clear()

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("%", 1)[0].strip()
        if not line:
            continue
        if current is None:
            fn = _FUNCTION.match(line)
            if fn:
                name = fn.group(1)
                continue
            start = _BLOCK_START.match(line)
            if start:
                current = start.group(1)
                block_lines[current] = lineno
                rows = []
                line = start.group(2).strip()
                if not line:
                    continue
                # fall through: data may begin on the opening line
            else:
                scalar = _SCALAR.match(line)
                if scalar:
                    scalars[scalar.group(1)] = scalar.group(2).strip()
                continue
        # inside a block
        closed = False
        if "]" in line:
            line, _, _ = line.partition("]")
            closed = True
        chunks = line.split(";")
        for ci, chunk in enumerate(chunks):
            tokens = chunk.split()
            if tokens:
                pending.extend(tokens)
            if ci < len(chunks) - 1:  # a ';' followed this chunk
                flush_pending(lineno)
        if closed:
            flush_pending(lineno)
            if not rows:
                raise CaseParseError(f"line {lineno}: block mpc.{current} is empty")
            widths = {len(r) for r in rows}
            if len(widths) != 1:
                raise CaseParseError(
                    f"line {lineno}: ragged rows in mpc.{current} (widths {sorted(widths)})"
                )
            blocks[current] = rows
            current = None

    if current is not None:
        raise CaseParseError(f"line {block_lines[current]}: block mpc.{current} never closed")
    for required in ("bus", "branch"):
        if required not in blocks:
            raise CaseParseError(f"missing mpc.{required} block")

    base = 100.0
    if "baseMVA" in scalars:
        try:
            base = float(scalars["baseMVA"])
        except ValueError:
            raise CaseParseError(f"mpc.baseMVA is not numeric: {scalars['baseMVA']!r}") from None

    bus = np.array(blocks.pop("bus"))
    branch = np.array(blocks.pop("branch"))
    case = CaseData(
        baseMVA=base,
        bus=bus,
        branch=branch,
        arrays={k: np.array(v) for k, v in blocks.items()},
        name=name,
    )

    ids = case.bus_ids()
    if len(set(ids.tolist())) != len(ids):
        raise CaseParseError("duplicate bus ids in mpc.bus")
    known = set(ids.tolist())
    for r, row in enumerate(branch):
        for end in (int(row[F_BUS]), int(row[T_BUS])):
            if end not in known:
                raise CaseParseError(f"branch row {r + 1} references unknown bus {end}")
    return case


def serialize_case(case: CaseData) -> str:
    """Write a CaseData back out as case text (used for round-trip checks)."""
    out = [f"function mpc = {case.name or 'case'}", "mpc.version = '2';", f"mpc.baseMVA = {case.baseMVA:g};"]

    def block(label: str, M: np.ndarray) -> None:
        out.append(f"mpc.{label} = [")
        for row in M:
            out.append("\t" + "\t".join(f"{v:.10g}" for v in row) + ";")
        out.append("];")

    block("bus", case.bus)
    block("branch", case.branch)
    for label, M in case.arrays.items():
        block(label, M)
    return "\n".join(out) + "\n"


def dc_laplacian(case: CaseData) -> tuple[Network, np.ndarray, dict[int, int]]:
    """DC-approximation network and Laplacian of a parsed case.

    Buses are renumbered densely to 1..n in ascending id order; the mapping
    from original ids is returned so change reports can use them.  Branch
    weight is 1/x, out-of-service branches are dropped, and parallel
    branches merge by adding weights.

    Raises
    ------
    ValueError
        On a zero reactance for an in-service branch (naming it), or if
        merged weights come out non-positive.
    """
    ids = sorted(case.bus_ids().tolist())
    renumber = {orig: k + 1 for k, orig in enumerate(ids)}
    n = len(ids)

    ncol = case.branch.shape[1]
    weights: dict[tuple[int, int], float] = {}
    for r, row in enumerate(case.branch):
        status = row[BR_STATUS] if ncol > BR_STATUS else 1.0
        if status == 0:
            continue
        f, t = int(row[F_BUS]), int(row[T_BUS])
        x = float(row[BR_X])
        if x == 0.0:
            raise ValueError(f"branch row {r + 1} ({f}-{t}) is in service with zero reactance")
        if f == t:
            raise ValueError(f"branch row {r + 1} is a self-loop at bus {f}")
        a, b = renumber[f], renumber[t]
        pair = (a, b) if a < b else (b, a)
        weights[pair] = weights.get(pair, 0.0) + 1.0 / x

    for pair, w in weights.items():
        if w <= 0:
            raise ValueError(f"merged weight for node pair {pair} is non-positive ({w})")

    edges = tuple((i, j, w) for (i, j), w in sorted(weights.items()))
    net = Network(n, edges)
    return net, laplacian(net), renumber
