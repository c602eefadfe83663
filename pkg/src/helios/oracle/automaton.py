"""Admissible unit state sequences, checked two independent ways.

:func:`rule_ok` reads the quasi-dynamic rules off directly: from a virtual
"off" step before the first sample, consecutive states differ by at most
one half, and a half state at ``t`` forces ``u[t+1] = 1 - u[t-1]``.
:class:`Automaton` is a hand-written four-state machine (off, half-up, on,
half-down) that must accept exactly the same sequences.
"""

from __future__ import annotations

import itertools
from collections.abc import Iterator, Sequence

LEVELS_STATIC = (0.0, 1.0)
LEVELS_QUASI = (0.0, 0.5, 1.0)


def rule_ok(row: Sequence[float]) -> bool:
    """Quasi-dynamic transition rules, evaluated directly on the levels."""
    prev = 0.0
    for t, u in enumerate(row):
        if abs(u - prev) > 0.5:
            return False
        if u == 0.5 and t + 1 < len(row) and row[t + 1] != 1.0 - prev:
            return False
        prev = u
    return True


class Automaton:
    """off -> {off, half-up}; half-up -> on; on -> {on, half-down}; half-down -> off."""

    OFF, HALF_UP, ON, HALF_DOWN = "off", "half-up", "on", "half-down"
    EDGES = {
        OFF: {0.0: OFF, 0.5: HALF_UP},
        HALF_UP: {1.0: ON},
        ON: {1.0: ON, 0.5: HALF_DOWN},
        HALF_DOWN: {0.0: OFF},
    }

    def states(self, row: Sequence[float]) -> list[str] | None:
        """Visited states, or None if some step has no outgoing edge."""
        cur, seen = self.OFF, []
        for u in row:
            cur = self.EDGES[cur].get(float(u))
            if cur is None:
                return None
            seen.append(cur)
        return seen

    def accepts(self, row: Sequence[float]) -> bool:
        return self.states(row) is not None


def runs(on: Sequence[bool]) -> list[tuple[bool, int, int]]:
    """Maximal runs as (value, first index, length)."""
    out: list[tuple[bool, int, int]] = []
    for t, v in enumerate(on):
        if out and out[-1][0] == v:
            val, start, k = out[-1]
            out[-1] = (val, start, k + 1)
        else:
            out.append((bool(v), t, 1))
    return out


def short_runs(row: Sequence[float], min_up: int, min_down: int) -> list[tuple[int, int]]:
    """Runs violating minimum up/down times as (first index, missing steps).

    A unit counts as committed whenever its state is positive.  The run that
    starts at the first step began without a switch and is exempt, as is any
    run still going at the horizon end.
    """
    on = [u > 0.25 for u in row]
    bad = []
    rs = runs(on)
    for k, (val, start, length) in enumerate(rs):
        if start == 0 or k == len(rs) - 1:
            continue
        need = min_up if val else min_down
        if length < need:
            bad.append((start, need - length))
    return bad


def admissible_rows(T: int, min_up: int, min_down: int, quasi: bool) -> Iterator[tuple[float, ...]]:
    """Every level sequence of length ``T`` meeting the dynamics and run-length rules."""
    levels = LEVELS_QUASI if quasi else LEVELS_STATIC
    for row in itertools.product(levels, repeat=T):
        if quasi and not rule_ok(row):
            continue
        if short_runs(row, min_up, min_down):
            continue
        yield row
