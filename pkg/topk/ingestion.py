"""
Data Ingestion for Fair Top-k
Candidate CSV loading with attribute coding, per-class statistics and synthetic pools
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Optional

import numpy as np
import pandas as pd

from topk.errors import (
    CodingConfigError,
    EncodingError,
    InvalidParameterError,
    MissingColumnError,
    ScoreParseError,
    SpecError,
    UnmatchedValueError,
    ValidationError,
)
from topk.model import Candidate, Instance, build_instance

logger = logging.getLogger(__name__)

SCORE_FLOOR = 0.0
SCORE_CAP = 850.0
# Rejection sampling gives up after this many batches for one class
MAX_SAMPLING_ROUNDS = 10_000


# ---------------------------------------------------------------------------
# Attribute coding
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Bin:
    """One code of an attribute: a set of raw values or an inclusive numeric range"""

    code: str
    values: Optional[frozenset] = None
    low: Optional[float] = None
    high: Optional[float] = None

    @classmethod
    def from_dict(cls, data) -> Bin:
        code = str(data["code"])
        has_values = "values" in data
        has_range = "range" in data
        if has_values == has_range:
            raise CodingConfigError(f"bin {code!r}: give exactly one of 'values' or 'range'")
        if has_values:
            return cls(code=code, values=frozenset(str(v).strip() for v in data["values"]))
        low, high = (float(x) for x in data["range"])
        if low > high:
            raise CodingConfigError(f"bin {code!r}: empty range [{low}, {high}]")
        return cls(code=code, low=low, high=high)

    def to_dict(self) -> dict:
        if self.values is not None:
            return {"code": self.code, "values": sorted(self.values)}
        return {"code": self.code, "range": [self.low, self.high]}

    def matches(self, raw) -> bool:
        if self.values is not None:
            return raw in self.values
        number = _as_number(raw)
        return number is not None and self.low <= number <= self.high


def _as_number(raw) -> Optional[float]:
    try:
        number = float(raw)
    except ValueError:
        return None
    return number if math.isfinite(number) else None


@dataclass(frozen=True)
class AttributeCoding:
    """Maps the raw values of one source column onto codes"""

    source_column: str
    bins: tuple[Bin, ...]

    def __post_init__(self):
        if not self.bins:
            raise CodingConfigError(f"attribute {self.source_column!r} has no bins")
        codes = [b.code for b in self.bins]
        if len(set(codes)) != len(codes):
            raise CodingConfigError(f"attribute {self.source_column!r}: duplicate codes")
        self._check_disjoint()

    def _check_disjoint(self):
        value_bins = [b for b in self.bins if b.values is not None]
        range_bins = [b for b in self.bins if b.values is None]
        seen = {}
        for b in value_bins:
            for value in b.values:
                if value in seen:
                    raise CodingConfigError(
                        f"attribute {self.source_column!r}: value {value!r} in bins "
                        f"{seen[value]!r} and {b.code!r}"
                    )
                seen[value] = b.code
        for i, a in enumerate(range_bins):
            for b in range_bins[i + 1:]:
                if a.low <= b.high and b.low <= a.high:
                    raise CodingConfigError(
                        f"attribute {self.source_column!r}: ranges of {a.code!r} and {b.code!r} overlap"
                    )
        for value, code in seen.items():
            number = _as_number(value)
            for b in range_bins:
                if number is not None and b.low <= number <= b.high:
                    raise CodingConfigError(
                        f"attribute {self.source_column!r}: value {value!r} of {code!r} "
                        f"falls in the range of {b.code!r}"
                    )

    def code(self, raw) -> Optional[str]:
        for b in self.bins:
            if b.matches(raw):
                return b.code
        return None


@dataclass(frozen=True)
class CodingConfig:
    """Which columns hold id and score, and how attribute columns become class codes"""

    attributes: tuple[AttributeCoding, ...]
    score_column: str = "score"
    id_column: str = "id"

    @classmethod
    def from_dict(cls, data) -> CodingConfig:
        try:
            attributes = tuple(
                AttributeCoding(str(a["source_column"]), tuple(Bin.from_dict(b) for b in a["bins"]))
                for a in data["attributes"]
            )
        except (KeyError, TypeError, ValueError) as e:
            if isinstance(e, ValidationError):
                raise
            raise CodingConfigError(f"malformed coding config: {e!r}") from e
        return cls(
            attributes=attributes,
            score_column=str(data.get("score_column", "score")),
            id_column=str(data.get("id_column", "id")),
        )

    @classmethod
    def from_json(cls, path) -> CodingConfig:
        with open(path, "r", encoding="utf-8") as f:
            return cls.from_dict(json.load(f))

    @classmethod
    def from_instance(cls, instance: Instance, columns) -> CodingConfig:
        """Value-set coding that maps every code present in the instance onto itself"""
        columns = tuple(columns)
        observed = [set() for _ in columns]
        for candidate in instance.candidates():
            for position, value in enumerate(candidate.attributes):
                observed[position].add(value)
        attributes = tuple(
            AttributeCoding(column, tuple(Bin(code=v, values=frozenset([v])) for v in sorted(values)))
            for column, values in zip(columns, observed)
        )
        return cls(attributes=attributes)

    def to_dict(self) -> dict:
        return {
            "id_column": self.id_column,
            "score_column": self.score_column,
            "attributes": [
                {"source_column": a.source_column, "bins": [b.to_dict() for b in a.bins]}
                for a in self.attributes
            ],
        }

    def save_json(self, path):
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_dict(), f, indent=2)
            f.write("\n")

    @property
    def attribute_columns(self) -> tuple[str, ...]:
        return tuple(a.source_column for a in self.attributes)


def load_csv(path, coding: CodingConfig) -> Instance:
    """Read `id,score,<attributes...>` rows and code them into an instance"""
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    except UnicodeDecodeError as e:
        raise EncodingError(path, e.start, e.reason) from e
    for column in (coding.id_column, coding.score_column, *coding.attribute_columns):
        if column not in frame.columns:
            raise MissingColumnError(column, path)

    # file line numbers: the header is line 1
    raw_scores = frame[coding.score_column].str.strip()
    scores = pd.to_numeric(raw_scores, errors="coerce")
    bad = ~np.isfinite(scores.to_numpy(dtype=np.float64)) | (scores < 0).to_numpy()
    if bad.any():
        first = int(np.flatnonzero(bad)[0])
        raise ScoreParseError(first + 2, frame[coding.score_column].iloc[first])

    codes = []
    for attribute in coding.attributes:
        raw_values = frame[attribute.source_column].str.strip().tolist()
        coded = []
        for offset, raw in enumerate(raw_values):
            code = attribute.code(raw)
            if code is None:
                raise UnmatchedValueError(offset + 2, attribute.source_column, raw)
            coded.append(code)
        codes.append(coded)

    ids = frame[coding.id_column].str.strip().tolist()
    candidates = [
        Candidate(id=ids[row], score=float(scores.iloc[row]),
                  attributes=tuple(column[row] for column in codes))
        for row in range(len(frame))
    ]
    instance = build_instance(candidates)
    logger.info("loaded %d candidates in %d classes from %s",
                instance.total_candidates, instance.num_classes, path)
    return instance


def write_csv(instance: Instance, path, columns) -> None:
    """Write the instance in the format load_csv reads; scores keep their exact float repr"""
    columns = tuple(columns)
    rows = []
    for candidate in instance.candidates():
        if len(candidate.attributes) != len(columns):
            raise ValidationError(
                f"candidate {candidate.id!r} has {len(candidate.attributes)} attributes "
                f"for {len(columns)} columns"
            )
        rows.append([candidate.id, repr(candidate.score), *candidate.attributes])
    frame = pd.DataFrame(rows, columns=["id", "score", *columns])
    frame.to_csv(path, index=False, lineterminator="\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# Descriptive statistics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ClassStats:
    """Score distribution of one class"""

    label: str
    size: int
    mean: float
    min: float
    q1: float
    median: float
    q3: float
    max: float


def class_stats(instance: Instance) -> list[ClassStats]:
    """One row per class; quartiles interpolate linearly between order statistics"""
    stats = []
    for cls in instance.classes:
        scores = cls.utilities
        q1, median, q3 = np.quantile(scores, [0.25, 0.5, 0.75], method="linear")
        stats.append(ClassStats(
            label=cls.label,
            size=cls.size,
            mean=float(np.mean(scores)),
            min=float(scores.min()),
            q1=float(q1),
            median=float(median),
            q3=float(q3),
            max=float(scores.max()),
        ))
    return stats


# ---------------------------------------------------------------------------
# Synthetic pools
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ClassSpec:
    """Size and score distribution of one synthetic class"""

    label: str
    size: int
    score_mean: float
    score_stddev: float
    attributes: tuple[str, ...] = ()

    @property
    def codes(self) -> tuple[str, ...]:
        return self.attributes or (self.label,)


@dataclass(frozen=True)
class SyntheticSpec:
    """Seeded recipe for a synthetic candidate pool"""

    class_specs: tuple[ClassSpec, ...]
    score_floor: float = SCORE_FLOOR
    score_cap: float = SCORE_CAP
    seed: int = 0
    attribute_names: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.class_specs:
            raise SpecError("synthetic spec has no classes")
        if not self.score_floor < self.score_cap:
            raise SpecError(f"score floor {self.score_floor} must be below cap {self.score_cap}")
        labels = [c.label for c in self.class_specs]
        if len(set(labels)) != len(labels):
            raise SpecError("synthetic spec repeats a class label")
        for spec in self.class_specs:
            if spec.size < 1:
                raise SpecError(f"class {spec.label!r}: size must be >= 1")
            if not spec.score_stddev > 0:
                raise SpecError(f"class {spec.label!r}: stddev must be > 0")
            if "".join(spec.codes) != spec.label:
                raise SpecError(f"class {spec.label!r}: attribute codes {spec.codes} do not spell the label")
            if len(spec.codes) != len(self.attribute_columns):
                raise SpecError(
                    f"class {spec.label!r}: {len(spec.codes)} codes for "
                    f"{len(self.attribute_columns)} attribute columns"
                )

    @property
    def attribute_columns(self) -> tuple[str, ...]:
        return self.attribute_names or ("class",)

    @property
    def total(self) -> int:
        return sum(c.size for c in self.class_specs)

    @classmethod
    def from_dict(cls, data) -> SyntheticSpec:
        try:
            specs = tuple(
                ClassSpec(
                    label=str(c["label"]),
                    size=int(c["size"]),
                    score_mean=float(c["score_mean"]),
                    score_stddev=float(c["score_stddev"]),
                    attributes=tuple(str(a) for a in c.get("attributes", ())),
                )
                for c in data["class_specs"]
            )
        except (KeyError, TypeError, ValueError) as e:
            raise SpecError(f"malformed synthetic spec: {e!r}") from e
        return cls(
            class_specs=specs,
            score_floor=float(data.get("score_floor", SCORE_FLOOR)),
            score_cap=float(data.get("score_cap", SCORE_CAP)),
            seed=int(data.get("seed", 0)),
            attribute_names=tuple(str(a) for a in data.get("attribute_names", ())),
        )

    @classmethod
    def from_json(cls, path) -> SyntheticSpec:
        with open(path, "r", encoding="utf-8") as f:
            return cls.from_dict(json.load(f))


def _truncated_normal(rng, mean, stddev, floor, cap, size):
    """Rejection sampling from the untruncated normal"""
    accepted = []
    rounds = 0
    while len(accepted) < size:
        rounds += 1
        if rounds > MAX_SAMPLING_ROUNDS:
            raise SpecError(
                f"could not draw {size} scores in [{floor}, {cap}] from N({mean}, {stddev}^2)"
            )
        need = size - len(accepted)
        draws = rng.normal(mean, stddev, size=2 * need)
        kept = draws[(draws >= floor) & (draws <= cap)]
        accepted.extend(kept[:need].tolist())
    return accepted


def generate_synthetic(spec: SyntheticSpec) -> Instance:
    """Draw every class from its truncated normal, scores rounded to 0.01"""
    rng = np.random.default_rng(spec.seed)
    candidates = []
    for class_spec in spec.class_specs:
        draws = _truncated_normal(rng, class_spec.score_mean, class_spec.score_stddev,
                                  spec.score_floor, spec.score_cap, class_spec.size)
        for value in draws:
            # parse the 2-decimal text so write/load reproduces the same float
            candidates.append(Candidate(
                id=f"s{len(candidates) + 1:06d}",
                score=float(f"{value:.2f}"),
                attributes=class_spec.codes,
            ))
    instance = build_instance(candidates)
    logger.info("generated %d synthetic candidates in %d classes (seed %d)",
                instance.total_candidates, instance.num_classes, spec.seed)
    return instance


def random_instance(rng, max_classes=3, max_class_size=5, max_total=14, max_score=850,
                    integer_scores=True) -> Instance:
    """Small random instance for searches and property checks (distinct scores)

    Shapes whose candidate count exceeds max_total are redrawn; None lifts the cap.
    """
    if max_total is not None and max_total < 1:
        raise InvalidParameterError(f"max_total must be >= 1, got {max_total}")
    while True:
        num_classes = int(rng.integers(1, max_classes + 1))
        sizes = rng.integers(1, max_class_size + 1, size=num_classes)
        total = int(sizes.sum())
        if max_total is None or total <= max_total:
            break
    if integer_scores:
        scores = rng.choice(max_score + 1, size=total, replace=False).astype(np.float64)
    else:
        scores = rng.uniform(0, max_score, size=total)
    candidates = []
    position = 0
    for i, size in enumerate(sizes):
        for _ in range(int(size)):
            candidates.append(Candidate(id=f"r{position:04d}", score=float(scores[position]),
                                        attributes=(f"c{i}",)))
            position += 1
    return build_instance(candidates)


def write_synthetic(spec: SyntheticSpec, path) -> Instance:
    """Generate and write a load_csv-compatible file"""
    instance = generate_synthetic(spec)
    write_csv(instance, path, spec.attribute_columns)
    return instance


# ---------------------------------------------------------------------------
# Separate-tracks pool manifest
# ---------------------------------------------------------------------------

class Pool(NamedTuple):
    program_id: str
    instance: Instance
    rate: float


def load_pools(manifest, coding: CodingConfig) -> list[Pool]:
    """Manifest: JSON list of {program_id, input, rate}; inputs resolve against the manifest's folder"""
    manifest = Path(manifest)
    with open(manifest, "r", encoding="utf-8") as f:
        entries = json.load(f)
    pools = []
    for entry in entries:
        try:
            program_id = str(entry["program_id"])
            source = manifest.parent / entry["input"]
            rate = float(entry["rate"])
        except (KeyError, TypeError, ValueError) as e:
            raise SpecError(f"malformed pool entry {entry!r}: {e!r}") from e
        pools.append(Pool(program_id, load_csv(source, coding), rate))
    return pools
