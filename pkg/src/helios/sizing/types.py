"""Domain types for the load sizing and scheduling problem."""

from __future__ import annotations

import json
from collections.abc import Sequence
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path

import numpy as np

from ..errors import DomainError, ParseError
from ..profile import SolarProfile

SOLUTION_SCHEMA = "helios-solution/1"


class Strategy(str, Enum):
    STATIC = "static"
    QUASI_DYNAMIC = "quasi_dynamic"


class Storage(str, Enum):
    NONE = "none"
    SIZED = "sized"


def _per_unit(value: int | Sequence[int], n: int, what: str) -> tuple[int, ...]:
    if isinstance(value, (int, np.integer)):
        vals = (int(value),) * n
    else:
        vals = tuple(int(v) for v in value)
    if len(vals) != n:
        raise DomainError(f"{what} needs {n} entries, got {len(vals)}")
    if any(v < 1 for v in vals):
        raise DomainError(f"{what} entries must be >= 1")
    return vals


@dataclass(frozen=True)
class ProblemSpec:
    """Everything about the problem except the solar profile.

    ``battery_max`` caps the battery rating; by default it is chosen large
    enough that running every unit permanently at the mean solar power is
    feasible, so it never restricts full utilization.
    """

    n_units: int
    min_up: tuple[int, ...] | int = 1
    min_down: tuple[int, ...] | int = 1
    strategy: Strategy = Strategy.STATIC
    storage: Storage = Storage.NONE
    x_max: float = 1.0
    big_m: float | None = None
    battery_hours_ratio: float = 1.0
    symmetry_breaking: bool = True
    battery_max: float | None = None

    def __post_init__(self):
        if int(self.n_units) != self.n_units or self.n_units < 1:
            raise DomainError("n_units must be a positive integer")
        object.__setattr__(self, "n_units", int(self.n_units))
        object.__setattr__(self, "min_up", _per_unit(self.min_up, self.n_units, "min_up"))
        object.__setattr__(self, "min_down", _per_unit(self.min_down, self.n_units, "min_down"))
        object.__setattr__(self, "strategy", Strategy(self.strategy))
        object.__setattr__(self, "storage", Storage(self.storage))
        if self.x_max <= 0:
            raise DomainError("x_max must be positive")
        big_m = self.x_max if self.big_m is None else float(self.big_m)
        if big_m < self.x_max:
            raise DomainError(f"big_m={big_m} must be >= x_max={self.x_max}")
        object.__setattr__(self, "big_m", big_m)
        if self.battery_hours_ratio <= 0:
            raise DomainError("battery_hours_ratio must be positive")
        if self.battery_max is not None and self.battery_max < 0:
            raise DomainError("battery_max must be nonnegative")

    @property
    def quasi(self) -> bool:
        return self.strategy is Strategy.QUASI_DYNAMIC

    @property
    def has_storage(self) -> bool:
        return self.storage is Storage.SIZED

    def battery_cap(self, profile: SolarProfile) -> float:
        if self.battery_max is not None:
            return float(self.battery_max)
        energy = profile.total * profile.dt_hours
        return max(self.n_units * self.x_max, max(profile.values),
                   2.0 * energy / self.battery_hours_ratio)

    def with_units(self, n: int) -> "ProblemSpec":
        """Same spec for ``n`` units, extending per-unit times with the last entry."""
        up = tuple(self.min_up[:n]) + (self.min_up[-1],) * max(0, n - self.n_units)
        down = tuple(self.min_down[:n]) + (self.min_down[-1],) * max(0, n - self.n_units)
        return replace(self, n_units=n, min_up=up, min_down=down)

    def to_dict(self) -> dict:
        return {
            "n_units": self.n_units,
            "min_up": list(self.min_up),
            "min_down": list(self.min_down),
            "strategy": self.strategy.value,
            "storage": self.storage.value,
            "x_max": self.x_max,
            "big_m": self.big_m,
            "battery_hours_ratio": self.battery_hours_ratio,
            "symmetry_breaking": self.symmetry_breaking,
            "battery_max": self.battery_max,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ProblemSpec":
        return cls(**d)


@dataclass(frozen=True)
class Schedule:
    """Unit states per step; ``U = (R + Q) / 2`` with R >= Q.

    :meth:`from_states` keeps ``U`` exactly as given and derives the binaries by
    thresholding, so a corrupted state stays visible to the validator.
    """

    U: np.ndarray
    R: np.ndarray
    Q: np.ndarray
    V: np.ndarray
    W: np.ndarray

    @classmethod
    def from_states(cls, U: np.ndarray) -> "Schedule":
        U = np.asarray(U, dtype=float)
        if U.ndim != 2:
            raise DomainError("U must be an n x T matrix")
        R = (U > 0.25).astype(float)
        Q = (U > 0.75).astype(float)
        dr = np.diff(R, axis=1)
        V = np.zeros_like(R)
        W = np.zeros_like(R)
        V[:, 1:] = (dr > 0)
        W[:, 1:] = (dr < 0)
        return cls(U.copy(), R, Q, V, W)


@dataclass(frozen=True)
class Solution:
    X: np.ndarray
    schedule: Schedule
    Y: np.ndarray
    Ps: np.ndarray
    battery_size: float
    spill: float
    efficiency: float
    objective: float
    gap: float = 0.0
    status: str = "optimal"
    node_count: int = 0
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def U(self) -> np.ndarray:
        return self.schedule.U

    @property
    def n_units(self) -> int:
        return len(self.X)

    @property
    def steps(self) -> int:
        return self.Y.shape[1]

    def soc(self, spec: ProblemSpec, profile: SolarProfile) -> np.ndarray:
        """Stored energy after each step (pu·h); empty without storage."""
        if not spec.has_storage:
            return np.zeros(self.steps)
        e0 = spec.battery_hours_ratio * self.battery_size / 2
        return e0 - profile.dt_hours * np.cumsum(self.Ps)


def efficiency_of(Y: np.ndarray, profile: SolarProfile) -> float:
    total = profile.total
    # a day without sun wastes nothing
    return float(Y.sum() / total) if total > 0 else 1.0


def build_solution(X, U, Y, Ps, battery_size, profile: SolarProfile, **kw) -> Solution:
    """Assemble a Solution, deriving spill and efficiency from the arrays."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    Ps = np.zeros(Y.shape[1]) if Ps is None else np.asarray(Ps, dtype=float)
    spill = float(profile.total + Ps.sum() - Y.sum())
    kw.setdefault("objective", spill)
    return Solution(X=X, schedule=Schedule.from_states(U), Y=Y, Ps=Ps,
                    battery_size=float(battery_size), spill=spill,
                    efficiency=efficiency_of(Y, profile), **kw)


def pad_units(sol: Solution, n: int, profile: SolarProfile) -> Solution:
    """Append zero-size, always-off units so an n-unit problem can reuse ``sol``."""
    extra = n - sol.n_units
    if extra < 0:
        raise DomainError("cannot pad to fewer units")
    T = sol.steps
    X = np.concatenate([sol.X, np.zeros(extra)])
    U = np.vstack([sol.U, np.zeros((extra, T))])
    Y = np.vstack([sol.Y, np.zeros((extra, T))])
    return build_solution(X, U, Y, sol.Ps, sol.battery_size, profile,
                          gap=sol.gap, status=sol.status)


# -- JSON -------------------------------------------------------------------

def _clean(a) -> list:
    return [[float(v) for v in row] for row in np.asarray(a)] if np.ndim(a) == 2 \
        else [float(v) for v in np.asarray(a)]


def solution_to_dict(sol: Solution, spec: ProblemSpec | None = None,
                     profile: SolarProfile | None = None) -> dict:
    d = {
        "schema": SOLUTION_SCHEMA,
        "x": _clean(sol.X),
        "u": _clean(sol.U),
        "y": _clean(sol.Y),
        "ps": _clean(sol.Ps),
        "battery_size": float(sol.battery_size),
        "efficiency": float(sol.efficiency),
        "spill": float(sol.spill),
        "objective": float(sol.objective),
        "gap": float(sol.gap) if np.isfinite(sol.gap) else None,
        "status": sol.status,
        "node_count": int(sol.node_count),
    }
    if spec is not None:
        d["spec"] = spec.to_dict()
    if profile is not None:
        d["profile"] = {"values": list(profile.values), "dt_minutes": profile.dt_minutes,
                        "start_label": profile.start_label}
    return d


def dumps_solution(sol: Solution, spec: ProblemSpec | None = None,
                   profile: SolarProfile | None = None) -> str:
    return json.dumps(solution_to_dict(sol, spec, profile), indent=1, sort_keys=True) + "\n"


def write_solution(path: str | Path, sol: Solution, spec: ProblemSpec | None = None,
                   profile: SolarProfile | None = None) -> None:
    Path(path).write_text(dumps_solution(sol, spec, profile))


_REQUIRED = {"schema": str, "x": list, "u": list, "y": list, "ps": list,
             "battery_size": (int, float), "efficiency": (int, float), "spill": (int, float),
             "status": str}


def solution_from_dict(d: dict) -> tuple[Solution, ProblemSpec | None, SolarProfile | None]:
    """Parse a solution document; embedded ``spec``/``profile`` are returned when present."""
    if not isinstance(d, dict):
        raise ParseError("solution document must be a JSON object")
    for key, typ in _REQUIRED.items():
        if key not in d or not isinstance(d[key], typ):
            raise ParseError(f"solution document: missing or mistyped field {key!r}")
    if d["schema"] != SOLUTION_SCHEMA:
        raise ParseError(f"unsupported schema {d['schema']!r}")
    try:
        X = np.array(d["x"], dtype=float)
        U = np.array(d["u"], dtype=float).reshape(len(X), -1)
        Y = np.array(d["y"], dtype=float).reshape(U.shape)
        Ps = np.array(d["ps"], dtype=float).reshape(U.shape[1])
        spec = ProblemSpec.from_dict(d["spec"]) if d.get("spec") else None
        prof = None
        if d.get("profile"):
            p = d["profile"]
            prof = SolarProfile(tuple(p["values"]), p["dt_minutes"], p.get("start_label"))
    except (ValueError, TypeError, KeyError) as exc:
        raise ParseError(f"malformed solution document: {exc}") from exc
    gap = d.get("gap")
    sol = Solution(X=X, schedule=Schedule.from_states(U), Y=Y, Ps=Ps,
                   battery_size=float(d["battery_size"]), spill=float(d["spill"]),
                   efficiency=float(d["efficiency"]), objective=float(d.get("objective", d["spill"])),
                   gap=np.inf if gap is None else float(gap), status=d["status"],
                   node_count=int(d.get("node_count", 0)))
    return sol, spec, prof


def read_solution(path: str | Path) -> tuple[Solution, ProblemSpec | None, SolarProfile | None]:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from exc
    return solution_from_dict(doc)
