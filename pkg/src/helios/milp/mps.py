"""Fixed-format MPS export.

Field layout (1-based columns)::

    1-2   section keyword starts in column 1; data lines leave column 1 blank
    2-3   field 1  row type (N/L/G/E) or bound type (UP/LO/FX/BV/MI)
    5-12  field 2  column name (COLUMNS, BOUNDS) or row name (ROWS)
    15-22 field 3  row name, or set name in RHS/BOUNDS
    25-36 field 4  numeric value
    40-47 field 5  second row name
    50-61 field 6  second numeric value

Names longer than 8 characters (or containing blanks) cannot be written in
fixed format; in that case every column becomes ``C0000000``-style and every
row ``R0000000``-style, and a ``*`` comment block maps the generic names back.
The objective row is ``COST``; a constant objective offset is written as the
negated RHS of ``COST``, the usual convention.  Binary columns sit between
``INTORG``/``INTEND`` markers and carry ``BV`` bounds.
"""

from __future__ import annotations

import math
from pathlib import Path

from ..errors import HeliosError, StateError
from .model import MilpModel, Sense, VarKind


class MpsWriteError(HeliosError, OSError):
    """Raised when the MPS file cannot be written."""


def _num(v: float) -> str:
    if v == 0:
        return "0"
    for digits in range(12, 0, -1):
        text = f"{v:.{digits}g}"
        if len(text) <= 12:
            return text
    raise ValueError(f"cannot fit {v!r} into 12 characters")


def _line(f1: str = "", f2: str = "", f3: str = "", f4: str = "", f5: str = "", f6: str = "") -> str:
    out = " " + f1.ljust(2) + " " + f2.ljust(8) + "  " + f3.ljust(8) + "  " + f4.rjust(12)
    if f5:
        out += "   " + f5.ljust(8) + "  " + f6.rjust(12)
    return out.rstrip()


def _fits(name: str) -> bool:
    return 0 < len(name) <= 8 and " " not in name and not name.startswith("*")


def mps_lines(model: MilpModel) -> list[str]:
    if not model.sealed:
        raise StateError("only sealed models can be exported")
    col_names = [v.name for v in model.variables]
    row_names = [r.name for r in model.constraints]
    lines = []
    generic = not all(map(_fits, col_names + row_names)) or "COST" in row_names \
        or len(set(col_names)) != len(col_names) or len(set(row_names)) != len(row_names)
    if generic:
        lines.append("* generic names; original names follow")
        for i, n in enumerate(col_names):
            lines.append(f"* C{i:07d} {n}")
        for i, n in enumerate(row_names):
            lines.append(f"* R{i:07d} {n}")
        col_names = [f"C{i:07d}" for i in range(len(col_names))]
        row_names = [f"R{i:07d}" for i in range(len(row_names))]

    lines.append(f"NAME          {model.name[:8] if _fits(model.name[:8]) else 'HELIOS'}")
    lines.append("ROWS")
    lines.append(_line("N", "COST"))
    kind = {Sense.LE: "L", Sense.GE: "G", Sense.EQ: "E"}
    for name, row in zip(row_names, model.constraints):
        lines.append(_line(kind[row.sense], name))

    entries: list[list[tuple[str, float]]] = [[] for _ in model.variables]
    for vid, coef in model.objective.items():
        if coef != 0:
            entries[vid].append(("COST", coef))
    for name, row in zip(row_names, model.constraints):
        for vid, coef in row.terms:
            if coef != 0:
                entries[vid].append((name, coef))

    lines.append("COLUMNS")
    in_int = False
    marker = 0
    for var, col, ents in zip(model.variables, col_names, entries):
        is_bin = var.kind is VarKind.BINARY
        if is_bin != in_int:
            tag = "'INTORG'" if is_bin else "'INTEND'"
            lines.append(_line("", f"M{marker:07d}", "'MARKER'", "", tag))
            marker += 1
            in_int = is_bin
        if not ents:
            ents = [("COST", 0.0)]
        for k in range(0, len(ents), 2):
            pair = ents[k:k + 2]
            if len(pair) == 2:
                lines.append(_line("", col, pair[0][0], _num(pair[0][1]), pair[1][0], _num(pair[1][1])))
            else:
                lines.append(_line("", col, pair[0][0], _num(pair[0][1])))
    if in_int:
        lines.append(_line("", f"M{marker:07d}", "'MARKER'", "", "'INTEND'"))

    lines.append("RHS")
    rhs = [(name, row.rhs) for name, row in zip(row_names, model.constraints) if row.rhs != 0]
    if model.objective_offset != 0:
        rhs.insert(0, ("COST", -model.objective_offset))
    for k in range(0, len(rhs), 2):
        pair = rhs[k:k + 2]
        if len(pair) == 2:
            lines.append(_line("", "RHS", pair[0][0], _num(pair[0][1]), pair[1][0], _num(pair[1][1])))
        else:
            lines.append(_line("", "RHS", pair[0][0], _num(pair[0][1])))

    lines.append("BOUNDS")
    for var, col in zip(model.variables, col_names):
        lo, hi = var.lower, var.upper
        if var.kind is VarKind.BINARY and lo == 0 and hi == 1:
            lines.append(_line("BV", "BND", col, "1"))
            continue
        if lo == hi:
            lines.append(_line("FX", "BND", col, _num(lo)))
            continue
        if lo == -math.inf:
            lines.append(_line("MI", "BND", col))
        elif lo != 0:
            lines.append(_line("LO", "BND", col, _num(lo)))
        if hi != math.inf:
            lines.append(_line("UP", "BND", col, _num(hi)))
    lines.append("ENDATA")
    return lines


def export_mps(model: MilpModel, path: str | Path) -> None:
    """Write ``model`` to ``path`` in fixed-format MPS."""
    text = "\n".join(mps_lines(model)) + "\n"
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise MpsWriteError(f"cannot write {path}: {exc}") from exc
