"""Daily solar power profiles: loading, normalization, resampling and synthesis.

Synthetic days draw their noise from numpy's PCG64 generator
(``numpy.random.default_rng(seed)``), so a given ``(T, dt, seed)`` triple
always yields the same values on every platform numpy supports.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path

import numpy as np

from .errors import DegenerateError, DomainError, SizeError, SpacingError

DEFAULT_DT_MINUTES = 15


@dataclass(frozen=True)
class SolarProfile:
    """Per-unit PV power available at each of ``len(values)`` uniform steps."""

    values: tuple[float, ...]
    dt_minutes: int = DEFAULT_DT_MINUTES
    start_label: str | None = None
    _array: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if len(vals) < 2:
            raise SizeError(f"a profile needs at least 2 samples, got {len(vals)}")
        if any(not math.isfinite(v) or v < 0 for v in vals):
            raise DomainError("profile values must be finite and nonnegative")
        if int(self.dt_minutes) != self.dt_minutes or self.dt_minutes <= 0:
            raise SpacingError(f"dt_minutes must be a positive integer, got {self.dt_minutes}")
        arr = np.array(vals, dtype=float)
        arr.flags.writeable = False
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "dt_minutes", int(self.dt_minutes))
        object.__setattr__(self, "_array", arr)

    @property
    def array(self) -> np.ndarray:
        """Read-only numpy view of the values."""
        return self._array

    @property
    def steps(self) -> int:
        return len(self.values)

    @property
    def dt_hours(self) -> float:
        return self.dt_minutes / 60.0

    @property
    def total(self) -> float:
        """Sum of the samples (pu·steps), the denominator of the efficiency."""
        return float(self._array.sum())

    def __len__(self) -> int:
        return len(self.values)


def _parse_time(text: str) -> float:
    """Return minutes since an arbitrary epoch for ``HH:MM`` or ISO-8601 stamps."""
    text = text.strip()
    if len(text) <= 5 and ":" in text:
        hh, mm = text.split(":")
        return int(hh) * 60 + int(mm)
    try:
        stamp = datetime.fromisoformat(text)
    except ValueError as exc:
        raise DomainError(f"unparseable time stamp {text!r}") from exc
    return stamp.timestamp() / 60.0 if stamp.tzinfo else (
        stamp - datetime(1970, 1, 1)).total_seconds() / 60.0


def load_csv(path: str | Path) -> SolarProfile:
    """Read a ``time,power`` CSV with uniform spacing into a profile."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header[:2]] != ["time", "power"]:
            raise DomainError(f"{path}: expected header 'time,power', got {header}")
        rows = [r for r in reader if r and any(c.strip() for c in r)]
    if len(rows) < 2:
        raise SizeError(f"{path}: need at least 2 data rows, got {len(rows)}")
    times = [_parse_time(r[0]) for r in rows]
    power = [float(r[1]) for r in rows]
    if any(p < 0 for p in power):
        raise DomainError(f"{path}: negative power value")
    steps = np.diff(times)
    dt = steps[0]
    if dt <= 0 or not np.allclose(steps, dt, atol=1e-6):
        raise SpacingError(f"{path}: timestamps are not uniformly spaced")
    if abs(dt - round(dt)) > 1e-6:
        raise SpacingError(f"{path}: step of {dt} minutes is not an integer")
    return SolarProfile(tuple(power), int(round(dt)), rows[0][0].strip())


def write_csv(profile: SolarProfile, path: str | Path) -> None:
    """Write ``profile`` in the same ``time,power`` layout that :func:`load_csv` reads."""
    start = 0
    if profile.start_label and len(profile.start_label) <= 5 and ":" in profile.start_label:
        start = int(_parse_time(profile.start_label))
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["time", "power"])
        for k, v in enumerate(profile.values):
            minutes = (start + k * profile.dt_minutes) % (24 * 60)
            writer.writerow([f"{minutes // 60:02d}:{minutes % 60:02d}", repr(v)])


def normalize(p: SolarProfile, reference_peak: float | None = None) -> SolarProfile:
    """Scale by ``reference_peak`` (or by the profile's own maximum)."""
    if reference_peak is None:
        peak = max(p.values)
        if peak <= 0:
            raise DegenerateError("cannot normalize an all-zero profile without a reference peak")
    else:
        if reference_peak <= 0:
            raise DomainError("reference_peak must be positive")
        peak = float(reference_peak)
    vals = [v / peak for v in p.values]
    if reference_peak is None:
        # exact 1.0 at the argmax even if v/v rounds otherwise
        vals[p.values.index(peak)] = 1.0
    return SolarProfile(tuple(vals), p.dt_minutes, p.start_label)


def resample(p: SolarProfile, new_dt_minutes: int) -> SolarProfile:
    """Block-average down to a coarser step that is an integer multiple of the current one."""
    if new_dt_minutes <= 0 or new_dt_minutes % p.dt_minutes:
        raise SpacingError(f"{new_dt_minutes} min is not a multiple of {p.dt_minutes} min")
    k = new_dt_minutes // p.dt_minutes
    if len(p) % k:
        raise SpacingError(f"{len(p)} samples do not divide into blocks of {k}")
    blocks = p.array.reshape(-1, k).mean(axis=1)
    if len(blocks) < 2:
        raise SizeError("resampled profile would have fewer than 2 samples")
    return SolarProfile(tuple(blocks.tolist()), new_dt_minutes, p.start_label)


def _arch(steps: int) -> np.ndarray:
    if steps < 2:
        raise SizeError(f"synthetic profiles need T >= 2, got {steps}")
    vals = np.sin(np.pi * np.arange(steps) / (steps - 1))
    vals[0] = vals[-1] = 0.0
    if steps % 2:
        vals[steps // 2] = 1.0
    return np.clip(vals, 0.0, 1.0)


def synth_clear(steps: int, dt_minutes: int = DEFAULT_DT_MINUTES) -> SolarProfile:
    """Clear day: a half-sine arch with peak exactly 1 (for odd ``steps``)."""
    return SolarProfile(tuple(_arch(steps).tolist()), dt_minutes)


def synth_overcast(steps: int, dt_minutes: int = DEFAULT_DT_MINUTES, seed: int = 0) -> SolarProfile:
    """Overcast day: the arch scaled to 0.4 with multiplicative noise in [0.6, 1.0]."""
    arch = _arch(steps)
    rng = np.random.default_rng(seed)
    noise = rng.uniform(0.6, 1.0, size=steps)
    return SolarProfile(tuple(np.clip(0.4 * arch * noise, 0.0, None).tolist()), dt_minutes)


def synth_partly_cloudy(steps: int, dt_minutes: int = DEFAULT_DT_MINUTES,
                        seed: int = 0) -> SolarProfile:
    """Partly cloudy day: the clear arch with random cloud dropouts.

    ``max(1, round(steps / 10))`` windows are drawn; each starts at a uniform
    step, lasts 1-4 steps and multiplies the arch by a factor in [0.2, 0.5].
    """
    vals = _arch(steps)
    rng = np.random.default_rng(seed)
    for _ in range(max(1, round(steps / 10))):
        start = int(rng.integers(0, steps))
        length = int(rng.integers(1, 5))
        factor = float(rng.uniform(0.2, 0.5))
        vals[start:start + length] *= factor
    return SolarProfile(tuple(vals.tolist()), dt_minutes)


SYNTH_DAYS = {
    "clear": lambda steps, dt, seed: synth_clear(steps, dt),
    "overcast": synth_overcast,
    "partly": synth_partly_cloudy,
}


def synth(kind: str, steps: int, dt_minutes: int = DEFAULT_DT_MINUTES, seed: int = 1) -> SolarProfile:
    """Dispatch to one of the synthetic day generators by name."""
    try:
        gen = SYNTH_DAYS[kind]
    except KeyError:
        raise DomainError(f"unknown synthetic day {kind!r}; choose from {sorted(SYNTH_DAYS)}") from None
    return gen(steps, dt_minutes, seed)
