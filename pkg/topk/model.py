"""
Problem Data Model for Fair Top-k
Candidates, intersectional classes, instances, policy parameters and selections
"""

from __future__ import annotations

import dataclasses
import heapq
import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterable, Iterator, Sequence, Union

import numpy as np

from topk.errors import (
    AttributeArityError,
    DuplicateCandidateError,
    EmptyInstanceError,
    InfeasibleQuotaError,
    InfeasibleSelectionError,
    InvalidParameterError,
    LabelCollisionError,
    NoClassesRemainError,
    ValidationError,
)

logger = logging.getLogger(__name__)

# Absorbs representation error in p * n (0.29 * 100 = 28.999...)
RATE_EPSILON = 1e-9

ClassKey = Callable[["Candidate"], Union[str, Sequence[str]]]


def _rank_key(candidate):
    """Non-increasing score, ties by ascending id"""
    return (-candidate.score, candidate.id)


def _read_only(array):
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class Candidate:
    """Single applicant: opaque id, utility score and protected attribute codes"""

    id: str
    score: float
    attributes: tuple[str, ...] = ()

    def __post_init__(self):
        score = float(self.score)
        if not math.isfinite(score) or score < 0:
            raise InvalidParameterError(
                f"candidate {self.id!r}: score {self.score!r} must be finite and >= 0"
            )
        object.__setattr__(self, "id", str(self.id))
        object.__setattr__(self, "score", score)
        object.__setattr__(self, "attributes", tuple(str(a) for a in self.attributes))


@dataclass(frozen=True)
class IntersectionalClass:
    """Candidates sharing one combination of protected attribute values"""

    label: str
    members: tuple[Candidate, ...]

    def __post_init__(self):
        if not self.members:
            raise EmptyInstanceError(f"class {self.label!r} has no members")
        object.__setattr__(self, "members", tuple(sorted(self.members, key=_rank_key)))

    @property
    def size(self) -> int:
        return len(self.members)

    @cached_property
    def utilities(self) -> np.ndarray:
        """Scores aligned with members (non-increasing)"""
        return _read_only(np.array([m.score for m in self.members], dtype=np.float64))

    @cached_property
    def prefix(self) -> np.ndarray:
        """prefix[j] = total utility of the top j members, j = 0..size"""
        sums = np.zeros(self.size + 1, dtype=np.float64)
        np.cumsum(self.utilities, out=sums[1:])
        return _read_only(sums)


@dataclass(frozen=True)
class Instance:
    """Candidate pool partitioned into non-overlapping intersectional classes"""

    classes: tuple[IntersectionalClass, ...]

    def __post_init__(self):
        classes = tuple(self.classes)
        if not classes:
            raise EmptyInstanceError("instance has no classes")
        seen_ids = set()
        seen_labels = set()
        for cls in classes:
            if cls.label in seen_labels:
                raise ValidationError(f"duplicate class label {cls.label!r}")
            seen_labels.add(cls.label)
            for member in cls.members:
                if member.id in seen_ids:
                    raise DuplicateCandidateError(member.id)
                seen_ids.add(member.id)
        object.__setattr__(self, "classes", classes)

    @property
    def total_candidates(self) -> int:
        return sum(cls.size for cls in self.classes)

    @property
    def num_classes(self) -> int:
        return len(self.classes)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(cls.label for cls in self.classes)

    @cached_property
    def sizes(self) -> np.ndarray:
        return _read_only(np.array([cls.size for cls in self.classes], dtype=np.int64))

    @property
    def max_score(self) -> float:
        return max(float(cls.utilities[0]) for cls in self.classes)

    def class_index(self, label) -> int:
        for i, cls in enumerate(self.classes):
            if cls.label == label:
                return i
        raise KeyError(label)

    def candidates(self) -> Iterator[Candidate]:
        """All candidates, class by class, each class in rank order"""
        for cls in self.classes:
            yield from cls.members

    def top_k_counts(self, k) -> tuple[int, ...]:
        """Per-class membership of the global top-k (score desc, id asc)"""
        if k > self.total_candidates:
            raise InfeasibleQuotaError(k, self.total_candidates)
        owner = {}
        for i, cls in enumerate(self.classes):
            for member in cls.members:
                owner[member.id] = i
        counts = [0] * self.num_classes
        for member in heapq.nsmallest(k, self.candidates(), key=_rank_key):
            counts[owner[member.id]] += 1
        return tuple(counts)


@dataclass(frozen=True)
class PolicyParams:
    """Selection rate p, quota k and trade-off weight lambda"""

    selection_rate: float
    quota: int
    tradeoff: float = 0.0

    def __post_init__(self):
        p = float(self.selection_rate)
        lam = float(self.tradeoff)
        if not (0.0 <= p <= 1.0):
            raise InvalidParameterError(f"selection rate {self.selection_rate!r} outside [0, 1]")
        if not math.isfinite(lam) or lam < 0:
            raise InvalidParameterError(f"trade-off {self.tradeoff!r} must be finite and >= 0")
        if int(self.quota) != self.quota or self.quota < 0:
            raise InvalidParameterError(f"quota {self.quota!r} must be a non-negative integer")
        object.__setattr__(self, "selection_rate", p)
        object.__setattr__(self, "tradeoff", lam)
        object.__setattr__(self, "quota", int(self.quota))

    @classmethod
    def from_rate(cls, rate, total, tradeoff=0.0) -> PolicyParams:
        """k = floor(p * n)"""
        if not (0.0 <= float(rate) <= 1.0):
            raise InvalidParameterError(f"selection rate {rate!r} outside [0, 1]")
        quota = min(int(math.floor(float(rate) * total + RATE_EPSILON)), total)
        return cls(selection_rate=rate, quota=quota, tradeoff=tradeoff)

    @classmethod
    def from_quota(cls, quota, total, tradeoff=0.0) -> PolicyParams:
        """p = k / n"""
        if total <= 0:
            raise EmptyInstanceError("cannot derive a selection rate from an empty pool")
        if quota < 0:
            raise InvalidParameterError(f"quota {quota!r} must be non-negative")
        if quota > total:
            raise InfeasibleQuotaError(quota, total)
        return cls(selection_rate=quota / total, quota=quota, tradeoff=tradeoff)

    @classmethod
    def for_instance(cls, instance, *, rate=None, quota=None, tradeoff=0.0) -> PolicyParams:
        """Exactly one of rate / quota must be given"""
        if (rate is None) == (quota is None):
            raise InvalidParameterError("give exactly one of a selection rate or a quota")
        if rate is not None:
            return cls.from_rate(rate, instance.total_candidates, tradeoff)
        return cls.from_quota(quota, instance.total_candidates, tradeoff)

    def with_tradeoff(self, tradeoff) -> PolicyParams:
        return dataclasses.replace(self, tradeoff=tradeoff)

    def check_against(self, instance):
        if self.quota > instance.total_candidates:
            raise InfeasibleQuotaError(self.quota, instance.total_candidates)


@dataclass(frozen=True)
class Selection:
    """Per-class admitted counts; class i admits its top counts[i] members"""

    counts: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "counts", tuple(int(c) for c in self.counts))

    @classmethod
    def empty(cls, num_classes) -> Selection:
        return cls((0,) * num_classes)

    @property
    def total(self) -> int:
        return sum(self.counts)

    def increment(self, class_index) -> Selection:
        counts = list(self.counts)
        counts[class_index] += 1
        return Selection(tuple(counts))

    def check_feasible(self, instance, quota=None):
        """Raise unless 0 <= counts[i] <= n_i (and, if given, sum == quota)"""
        if len(self.counts) != instance.num_classes:
            raise ValidationError(
                f"selection has {len(self.counts)} counts for {instance.num_classes} classes"
            )
        for count, cls in zip(self.counts, instance.classes):
            if count < 0 or count > cls.size:
                raise InfeasibleSelectionError(cls.label, count, cls.size)
        if quota is not None and self.total != quota:
            raise ValidationError(f"selection admits {self.total}, quota is {quota}")

    def rates(self, instance) -> np.ndarray:
        return np.asarray(self.counts, dtype=np.float64) / instance.sizes

    def admitted(self, instance) -> list[Candidate]:
        """Reconstruct the admitted candidates (within-class prefixes)"""
        self.check_feasible(instance)
        chosen = []
        for count, cls in zip(self.counts, instance.classes):
            chosen.extend(cls.members[:count])
        return chosen

    def bits(self, instance) -> tuple[int, ...]:
        """0/1 decision per candidate, in Instance.candidates() order"""
        self.check_feasible(instance)
        flags = []
        for count, cls in zip(self.counts, instance.classes):
            flags.extend([1] * count + [0] * (cls.size - count))
        return tuple(flags)


@dataclass(frozen=True)
class ObjectiveBreakdown:
    """J = B - lambda * D with per-class contributions"""

    total: float
    utility: float
    discrepancy: float
    tradeoff: float
    per_class_utility: tuple[float, ...]
    per_class_discrepancy: tuple[float, ...]

    @property
    def mean_discrepancy(self) -> float:
        return self.discrepancy / len(self.per_class_discrepancy)


def _normalize_key(key) -> tuple[str, ...]:
    if isinstance(key, str):
        return (key,)
    return tuple(str(part) for part in key)


def build_instance(candidates: Iterable[Candidate], class_key: ClassKey | None = None) -> Instance:
    """Group candidates into intersectional classes keyed by attribute combination"""
    candidates = list(candidates)
    if not candidates:
        raise EmptyInstanceError()

    arity = len(candidates[0].attributes)
    seen = set()
    for candidate in candidates:
        if candidate.id in seen:
            raise DuplicateCandidateError(candidate.id)
        seen.add(candidate.id)
        if len(candidate.attributes) != arity:
            raise AttributeArityError(candidate.id, arity, len(candidate.attributes))

    key_of = class_key or (lambda c: c.attributes)
    groups = {}
    for candidate in candidates:
        groups.setdefault(_normalize_key(key_of(candidate)), []).append(candidate)

    # codes are concatenated, so differently split keys can share a label
    key_of_label = {}
    for key in sorted(groups):
        label = "".join(key)
        if label in key_of_label:
            raise LabelCollisionError(label, key_of_label[label], key)
        key_of_label[label] = key

    classes = tuple(
        IntersectionalClass(label="".join(key), members=tuple(members))
        for key, members in sorted(groups.items())
    )
    instance = Instance(classes)
    logger.debug("built instance: %d candidates in %d classes",
                 instance.total_candidates, instance.num_classes)
    return instance


def filter_small_classes(instance: Instance, min_size: int) -> tuple[Instance, tuple[str, ...]]:
    """Drop classes with fewer than min_size candidates; returns (instance, removed labels)"""
    if min_size < 1:
        raise InvalidParameterError(f"min_size must be >= 1, got {min_size}")
    kept = tuple(cls for cls in instance.classes if cls.size >= min_size)
    removed = tuple(cls.label for cls in instance.classes if cls.size < min_size)
    if not kept:
        raise NoClassesRemainError(min_size)
    if removed:
        logger.warning("ignoring %d classes with fewer than %d candidates: %s",
                       len(removed), min_size, ", ".join(removed))
        return Instance(kept), removed
    return instance, removed
