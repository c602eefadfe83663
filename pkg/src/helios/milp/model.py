"""Solver-agnostic mixed-integer linear program with sparse rows."""

from __future__ import annotations

import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.sparse as sp

from ..errors import DomainError, StateError, VarReferenceError

VarId = int


class VarKind(str, Enum):
    CONTINUOUS = "continuous"
    BINARY = "binary"


class Sense(str, Enum):
    LE = "<="
    EQ = "="
    GE = ">="


@dataclass(frozen=True)
class Variable:
    id: VarId
    kind: VarKind
    lower: float
    upper: float
    name: str


@dataclass(frozen=True)
class LinearConstraint:
    terms: tuple[tuple[VarId, float], ...]
    sense: Sense
    rhs: float
    name: str


@dataclass(frozen=True)
class Evaluation:
    """Objective value and signed residuals ``lhs - rhs`` of every row."""

    objective: float
    residuals: np.ndarray

    def violations(self, model: "MilpModel", tol: float = 1e-7) -> list[str]:
        """Names of rows whose residual has the wrong sign by more than ``tol``."""
        bad = []
        for row, r in zip(model.constraints, self.residuals):
            if (row.sense is Sense.LE and r > tol) or (row.sense is Sense.GE and r < -tol) \
                    or (row.sense is Sense.EQ and abs(r) > tol):
                bad.append(row.name)
        return bad


@dataclass(frozen=True)
class ModelStats:
    n_vars: int
    n_binaries: int
    n_rows: int


class MilpModel:
    """A minimization MILP built incrementally and then sealed.

    Variables get contiguous ids from 0.  Once :meth:`seal` is called the model
    rejects further changes and exposes cached sparse arrays for the solver.
    """

    def __init__(self, name: str = "model"):
        self.name = name
        self.variables: list[Variable] = []
        self.constraints: list[LinearConstraint] = []
        self.objective: dict[VarId, float] = {}
        self.objective_offset = 0.0
        self._sealed = False
        self._stats: ModelStats | None = None
        self._arrays: "ModelArrays | None" = None
        self._by_name: dict[str, VarId] = {}

    # -- construction -----------------------------------------------------
    @property
    def sealed(self) -> bool:
        return self._sealed

    def _check_open(self) -> None:
        if self._sealed:
            raise StateError(f"model {self.name!r} is sealed")

    def add_variable(self, kind: VarKind | str, lower: float, upper: float, name: str) -> VarId:
        self._check_open()
        kind = VarKind(kind)
        lower, upper = float(lower), float(upper)
        if math.isnan(lower) or math.isnan(upper) or lower > upper:
            raise DomainError(f"variable {name!r}: bounds [{lower}, {upper}] are inverted")
        if kind is VarKind.BINARY and (lower < 0 or upper > 1):
            raise DomainError(f"binary {name!r}: bounds must lie within [0, 1]")
        vid = len(self.variables)
        self.variables.append(Variable(vid, kind, lower, upper, name))
        self._by_name[name] = vid
        return vid

    def _check_id(self, vid: VarId) -> None:
        if not (isinstance(vid, (int, np.integer)) and 0 <= vid < len(self.variables)):
            raise VarReferenceError(f"unknown variable id {vid!r}")

    def add_constraint(self, terms: Iterable[tuple[VarId, float]], sense: Sense | str,
                       rhs: float, name: str) -> int:
        self._check_open()
        merged: dict[VarId, float] = {}
        for vid, coef in terms:
            self._check_id(vid)
            coef = float(coef)
            if not math.isfinite(coef):
                raise DomainError(f"row {name!r}: coefficient {coef} is not finite")
            merged[int(vid)] = merged.get(int(vid), 0.0) + coef
        row = LinearConstraint(tuple(merged.items()), Sense(sense), float(rhs), name)
        self.constraints.append(row)
        return len(self.constraints) - 1

    def set_objective(self, terms: Iterable[tuple[VarId, float]], offset: float = 0.0) -> None:
        self._check_open()
        obj: dict[VarId, float] = {}
        for vid, coef in terms:
            self._check_id(vid)
            obj[int(vid)] = obj.get(int(vid), 0.0) + float(coef)
        self.objective = obj
        self.objective_offset = float(offset)

    def seal(self) -> "MilpModel":
        if not self._sealed:
            self._sealed = True
            self._stats = ModelStats(
                n_vars=len(self.variables),
                n_binaries=sum(v.kind is VarKind.BINARY for v in self.variables),
                n_rows=len(self.constraints),
            )
        return self

    # -- queries ----------------------------------------------------------
    @property
    def stats(self) -> ModelStats:
        if self._stats is None:
            raise StateError("statistics are computed at seal time")
        return self._stats

    def var_id(self, name: str) -> VarId:
        try:
            return self._by_name[name]
        except KeyError:
            raise VarReferenceError(f"no variable named {name!r}") from None

    def row_index(self, name: str) -> int:
        for i, row in enumerate(self.constraints):
            if row.name == name:
                return i
        raise KeyError(name)

    @property
    def binaries(self) -> list[VarId]:
        return [v.id for v in self.variables if v.kind is VarKind.BINARY]

    def arrays(self) -> "ModelArrays":
        """Cached CSR/array form of the sealed model."""
        if not self._sealed:
            raise StateError("arrays are only available for sealed models")
        if self._arrays is None:
            self._arrays = ModelArrays.from_model(self)
        return self._arrays


@dataclass(frozen=True)
class ModelArrays:
    A: sp.csr_matrix
    rhs: np.ndarray
    sense: np.ndarray  # -1 for <=, 0 for =, +1 for >=
    c: np.ndarray
    offset: float
    lower: np.ndarray
    upper: np.ndarray
    is_binary: np.ndarray

    @classmethod
    def from_model(cls, model: MilpModel) -> "ModelArrays":
        rows, cols, vals = [], [], []
        for i, row in enumerate(model.constraints):
            for vid, coef in row.terms:
                rows.append(i)
                cols.append(vid)
                vals.append(coef)
        shape = (len(model.constraints), len(model.variables))
        A = sp.csr_matrix((vals, (rows, cols)), shape=shape, dtype=float)
        code = {Sense.LE: -1, Sense.EQ: 0, Sense.GE: 1}
        c = np.zeros(shape[1])
        for vid, coef in model.objective.items():
            c[vid] = coef
        return cls(
            A=A,
            rhs=np.array([r.rhs for r in model.constraints], dtype=float),
            sense=np.array([code[r.sense] for r in model.constraints], dtype=np.int8),
            c=c,
            offset=model.objective_offset,
            lower=np.array([v.lower for v in model.variables], dtype=float),
            upper=np.array([v.upper for v in model.variables], dtype=float),
            is_binary=np.array([v.kind is VarKind.BINARY for v in model.variables], dtype=bool),
        )


def as_vector(model: MilpModel, assignment: Mapping[VarId, float] | Sequence[float] | np.ndarray
              ) -> np.ndarray:
    """Turn a full assignment (mapping or dense sequence) into a dense vector."""
    n = len(model.variables)
    if isinstance(assignment, Mapping):
        missing = [v.name for v in model.variables if v.id not in assignment]
        if missing:
            raise VarReferenceError(f"assignment misses {len(missing)} variable(s), e.g. {missing[0]}")
        return np.array([float(assignment[i]) for i in range(n)])
    vec = np.asarray(assignment, dtype=float)
    if vec.shape != (n,):
        raise VarReferenceError(f"assignment has length {vec.shape}, model has {n} variables")
    return vec


def evaluate(model: MilpModel, assignment: Mapping[VarId, float] | Sequence[float] | np.ndarray
             ) -> Evaluation:
    """Objective and per-row residuals at ``assignment``; rows are evaluated exactly as stored."""
    x = as_vector(model, assignment)
    obj = model.objective_offset + sum(coef * x[vid] for vid, coef in model.objective.items())
    res = np.fromiter(
        (sum(coef * x[vid] for vid, coef in row.terms) - row.rhs for row in model.constraints),
        dtype=float, count=len(model.constraints))
    return Evaluation(float(obj), res)
