"""The 45-term hull parameterization: types, feasibility, sampling, table IO.

The first term is the length overall in metres; the remaining 44 terms are
dimensionless, so feasibility never depends on scale.  Feasibility is decided
by a fixed set of algebraic constraints on the surface template -- no mesh is
built -- and a vector that passes is guaranteed to produce a watertight,
non-self-intersecting mesh (checked end to end by the acceptance suite).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from . import _geom, names
from .errors import InvalidParamsError, ParseError, SamplingError

PARAM_NAMES = names.PARAM_NAMES
N_TERMS = names.N_TERMS


class HullParameters:
    """Immutable 45-term design vector with named access."""

    __slots__ = ("values",)

    def __init__(self, values):
        arr = np.array(values, dtype=float).reshape(-1)
        if arr.size != N_TERMS:
            raise InvalidParamsError(f"expected {N_TERMS} terms, got {arr.size}")
        if not np.all(np.isfinite(arr)):
            bad = int(np.flatnonzero(~np.isfinite(arr))[0])
            raise InvalidParamsError(f"non-finite value for term '{PARAM_NAMES[bad]}'")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    def __setattr__(self, key, value):
        raise AttributeError("HullParameters is immutable")

    def __getitem__(self, name: str) -> float:
        return float(self.values[names.IDX[name]])

    @property
    def loa(self) -> float:
        return float(self.values[names.I_LOA])

    @property
    def shape_terms(self) -> np.ndarray:
        """The 44 dimensionless terms (everything except loa)."""
        return self.values[names.SHAPE_SLICE]

    def replace(self, **terms: float) -> "HullParameters":
        vals = self.values.copy()
        for key, val in terms.items():
            if key not in names.IDX:
                raise InvalidParamsError(f"unknown term '{key}'")
            vals[names.IDX[key]] = val
        return HullParameters(vals)

    @classmethod
    def from_dict(cls, mapping) -> "HullParameters":
        missing = [n for n in PARAM_NAMES if n not in mapping]
        if missing:
            raise InvalidParamsError(f"missing terms: {missing[:3]}...")
        return cls([mapping[n] for n in PARAM_NAMES])

    def as_dict(self) -> dict[str, float]:
        return {n: float(v) for n, v in zip(PARAM_NAMES, self.values)}

    def __eq__(self, other):
        return isinstance(other, HullParameters) and np.array_equal(self.values, other.values)

    def __repr__(self):
        return f"HullParameters(loa={self.loa:g}, ...)"


@dataclass(frozen=True)
class ParameterRanges:
    """Per-term sampling bounds plus the subset selector.

    Subset 1 samples the full ranges; subset 2 removes bulbs (both bulb
    length terms pinned to zero); subset 3 biases toward large-ship forms
    (strictly positive keel radius, zero deadrise).
    """

    lower: np.ndarray
    upper: np.ndarray
    subset: int = 1

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float)
        hi = np.asarray(self.upper, dtype=float)
        if lo.shape != (N_TERMS,) or hi.shape != (N_TERMS,):
            raise InvalidParamsError("ranges must have 45 lower and upper bounds")
        if np.any(lo > hi):
            bad = int(np.flatnonzero(lo > hi)[0])
            raise InvalidParamsError(f"lower > upper for term '{PARAM_NAMES[bad]}'")
        lo = lo.copy()
        hi = hi.copy()
        lo.flags.writeable = False
        hi.flags.writeable = False
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def for_subset(cls, subset: int) -> "ParameterRanges":
        lo = names.SAMPLE_LOWER.copy()
        hi = names.SAMPLE_UPPER.copy()
        if subset == 1:
            pass
        elif subset == 2:
            for term in ("bow_bulb_length_frac", "stern_bulb_length_frac"):
                lo[names.IDX[term]] = 0.0
                hi[names.IDX[term]] = 0.0
        elif subset == 3:
            lo[names.IDX["deadrise_deg"]] = 0.0
            hi[names.IDX["deadrise_deg"]] = 0.0
            lo[names.IDX["keel_radius_frac"]] = 0.05
        else:
            raise InvalidParamsError(f"unknown subset {subset} (expected 1, 2, or 3)")
        return cls(lo, hi, subset)


@dataclass(frozen=True)
class ConstraintCheck:
    index: int
    name: str
    family: str
    margin: float

    @property
    def passed(self) -> bool:
        return self.margin >= 0.0


@dataclass(frozen=True)
class FeasibilityReport:
    feasible: bool
    constraints: tuple[ConstraintCheck, ...]

    @property
    def violated(self) -> tuple[ConstraintCheck, ...]:
        return tuple(c for c in self.constraints if not c.passed)

    @property
    def n_violated(self) -> int:
        return len(self.violated)

    def __repr__(self):
        return f"FeasibilityReport(feasible={self.feasible}, violated={self.n_violated})"


def check_feasibility(params: HullParameters | np.ndarray) -> FeasibilityReport:
    """Algebraic feasibility check; pure, constant-time, no mesh involved.

    Margins of exactly zero count as feasible (the feasible set is closed).
    Non-finite input raises InvalidParamsError rather than reporting
    infeasible.
    """
    if not isinstance(params, HullParameters):
        params = HullParameters(params)
    # evaluate at unit length: every margin depends only on the shape terms
    unit = params.values.copy()
    unit[names.I_LOA] = 1.0
    resolved = _geom.resolve(unit)
    margins = _geom.constraint_margins(resolved)
    checks = tuple(
        ConstraintCheck(i, name, family, margin)
        for i, (name, family, margin) in enumerate(margins)
    )
    # restore the true loa for the one constraint that looks at it
    loa_ok = params.loa > 0 and np.isfinite(params.loa)
    checks = tuple(
        ConstraintCheck(c.index, c.name, c.family, params.loa if c.name == "loa_positive" else c.margin)
        for c in checks
    )
    feasible = loa_ok and all(c.margin >= 0.0 for c in checks)
    return FeasibilityReport(feasible=feasible, constraints=checks)


def sample_hull(
    ranges: ParameterRanges,
    seed,
    max_attempts: int = 100_000,
) -> HullParameters:
    """Rejection-sample a feasible hull, uniform per term within its range.

    Deterministic for a given (ranges, seed).  `seed` may be an int or a
    numpy SeedSequence/Generator for stream composition by callers.
    """
    if isinstance(seed, np.random.Generator):
        rng = seed
    else:
        rng = np.random.default_rng(seed)
    span = ranges.upper - ranges.lower
    for attempt in range(1, max_attempts + 1):
        vec = ranges.lower + span * rng.random(N_TERMS)
        params = HullParameters(vec)
        if check_feasibility(params).feasible:
            return params
    raise SamplingError(
        f"no feasible hull found in {max_attempts} attempts", attempts=max_attempts
    )


# --------------------------------------------------------------------------- #
# parameter table IO
# --------------------------------------------------------------------------- #

HEADER = ("hull_id",) + PARAM_NAMES


def save_params(path, rows: list[tuple[str, HullParameters]]) -> None:
    """Write a parameter table: header `hull_id,<45 names>`, one row per hull."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(HEADER)
        for hull_id, params in rows:
            writer.writerow([hull_id] + [f"{v:.15g}" for v in params.values])


def load_params(path) -> list[tuple[str, HullParameters]]:
    """Read a parameter table written by save_params; strict about schema."""
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file, expected header row") from None
        header = tuple(h.strip() for h in header)
        if header != HEADER:
            if len(header) != len(HEADER):
                missing = [h for h in HEADER if h not in header]
                raise ParseError(
                    f"{path}: header has {len(header)} columns, expected "
                    f"{len(HEADER)}; missing {missing[:3]}"
                )
            bad = next(i for i, (a, b) in enumerate(zip(header, HEADER)) if a != b)
            raise ParseError(
                f"{path}: header column {bad} is '{header[bad]}', expected '{HEADER[bad]}'"
            )
        rows: list[tuple[str, HullParameters]] = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(HEADER):
                raise ParseError(
                    f"{path}: row {lineno} has {len(row)} columns, expected {len(HEADER)}"
                )
            hull_id = row[0]
            try:
                vals = [float(cell) for cell in row[1:]]
            except ValueError as exc:
                bad = next(i for i, cell in enumerate(row[1:], 1) if not _is_float(cell))
                raise ParseError(
                    f"{path}: row {lineno} column {bad} ('{row[bad]}') is not numeric"
                ) from exc
            rows.append((hull_id, HullParameters(vals)))
    return rows


def _is_float(cell: str) -> bool:
    try:
        float(cell)
        return True
    except ValueError:
        return False
