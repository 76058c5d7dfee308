"""Search instances: urns, marble counts, and the joint prior over red-marble
placements.

Urn subsets are represented as integer bitmasks over urn indices, which caps
instances at 20 urns so that full subset enumeration stays around a million
entries. All probabilities are double precision; consistency checks use the
tolerance ``VALIDATION_EPS``.
"""

import enum
import json
import math
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field
from types import MappingProxyType

from .errors import InvalidProblemError

MAX_URNS = 20
VALIDATION_EPS = 1e-9


class PriorKind(str, enum.Enum):
    """How the joint prior over red-marble placements is specified."""

    INDEPENDENT = "independent"
    SINGLE_MARBLE = "single"
    GENERAL = "general"


@dataclass(frozen=True)
class Urn:
    """One urn: a label and its (positive) marble count."""

    id: str
    marbles: int


@dataclass(frozen=True)
class PriorModel:
    """Joint prior: per-urn marginals plus, for the general kind, explicit
    joint probabilities for subsets of size >= 2 keyed by bitmask.

    Joints never store the empty set (its probability is 1 by convention) or
    singletons (those live in ``marginals``). For the general kind a subset
    with no stored joint has probability 0, which is the only default that
    does not invent correlation.
    """

    kind: PriorKind
    marginals: tuple[float, ...]
    joints: Mapping[int, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "joints", MappingProxyType(dict(self.joints)))


@dataclass(frozen=True)
class Problem:
    """An immutable search instance: ordered urns plus their joint prior."""

    urns: tuple[Urn, ...]
    prior: PriorModel

    @property
    def n_urns(self) -> int:
        return len(self.urns)

    @property
    def total_marbles(self) -> int:
        return sum(u.marbles for u in self.urns)

    @property
    def full_mask(self) -> int:
        return (1 << self.n_urns) - 1

    def index_of(self, label: str) -> int:
        for i, urn in enumerate(self.urns):
            if urn.id == label:
                return i
        raise InvalidProblemError(f"unknown urn id {label!r}")

    def mask_of(self, labels: Iterable[str]) -> int:
        mask = 0
        for label in labels:
            mask |= 1 << self.index_of(label)
        return mask

    def labels_of(self, mask: int) -> tuple[str, ...]:
        return tuple(self.urns[i].id for i in iter_bits(mask))

    def phi_table(self) -> tuple[float, ...]:
        """Prior probability for every subset, indexed by bitmask.

        Built lazily and cached; the problem is immutable so a racing
        recomputation is harmless.
        """
        cached = self.__dict__.get("_phi_table")
        if cached is None:
            cached = tuple(_build_phi_table(self))
            object.__setattr__(self, "_phi_table", cached)
        return cached


@dataclass(frozen=True)
class PlacementOutcome:
    """An exact placement: red marbles in precisely the urns of ``urns``."""

    urns: int
    probability: float


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of consistency validation. Violations are data, not errors."""

    violations: tuple[str, ...] = ()
    warnings: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations


def iter_bits(mask: int) -> Iterator[int]:
    """Yield the set bit positions of ``mask`` in ascending order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def iter_submasks(mask: int) -> Iterator[int]:
    """Yield every submask of ``mask``, including 0 and ``mask`` itself."""
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


def _check_probability(value: float, what: str) -> float:
    value = float(value)
    if not math.isfinite(value) or value < 0.0 or value > 1.0:
        raise InvalidProblemError(f"{what} must be a probability in [0, 1], got {value!r}")
    return value


def build_problem(
    urns: Sequence[tuple[str, int]],
    kind: PriorKind | str,
    marginals: Mapping[str, float],
    joints: Mapping[Iterable[str], float] | None = None,
) -> Problem:
    """Assemble a Problem from labelled counts and a prior description.

    Performs structural checks only (labels, ranges, kind rules); full
    probabilistic consistency is the job of :func:`validate`.
    """
    if not urns:
        raise InvalidProblemError("a problem needs at least one urn")
    if len(urns) > MAX_URNS:
        raise InvalidProblemError(f"at most {MAX_URNS} urns are supported, got {len(urns)}")

    seen: set[str] = set()
    built: list[Urn] = []
    for label, count in urns:
        if label in seen:
            raise InvalidProblemError(f"duplicate urn id {label!r}")
        seen.add(label)
        if not isinstance(count, int) or isinstance(count, bool) or count < 1:
            raise InvalidProblemError(f"urn {label!r} needs a positive integer marble count, got {count!r}")
        built.append(Urn(label, count))

    try:
        kind = PriorKind(kind)
    except ValueError:
        raise InvalidProblemError(f"unknown prior kind {kind!r}") from None

    index = {u.id: i for i, u in enumerate(built)}
    for label in marginals:
        if label not in index:
            raise InvalidProblemError(f"marginal given for unknown urn id {label!r}")
    marg = []
    for urn in built:
        if urn.id not in marginals:
            raise InvalidProblemError(f"missing marginal probability for urn {urn.id!r}")
        marg.append(_check_probability(marginals[urn.id], f"marginal of {urn.id!r}"))

    joint_map: dict[int, float] = {}
    if joints:
        if kind is not PriorKind.GENERAL:
            raise InvalidProblemError("joint probabilities are only allowed for the general kind")
        for labels, prob in joints.items():
            labels = tuple(labels)
            if len(set(labels)) != len(labels):
                raise InvalidProblemError(f"joint subset {labels!r} repeats an urn id")
            if len(labels) < 2:
                raise InvalidProblemError(f"joint subset {labels!r} must name at least two urns")
            mask = 0
            for label in labels:
                if label not in index:
                    raise InvalidProblemError(f"joint given for unknown urn id {label!r}")
                mask |= 1 << index[label]
            if mask in joint_map:
                raise InvalidProblemError(f"duplicate joint subset {labels!r}")
            joint_map[mask] = _check_probability(prob, f"joint of {labels!r}")

    return Problem(tuple(built), PriorModel(kind, tuple(marg), joint_map))


def _build_phi_table(problem: Problem) -> list[float]:
    n = problem.n_urns
    prior = problem.prior
    table = [0.0] * (1 << n)
    table[0] = 1.0
    if prior.kind is PriorKind.INDEPENDENT:
        for mask in range(1, 1 << n):
            low = mask & -mask
            table[mask] = table[mask ^ low] * prior.marginals[low.bit_length() - 1]
    elif prior.kind is PriorKind.SINGLE_MARBLE:
        for i, p in enumerate(prior.marginals):
            table[1 << i] = p
    else:
        for i, p in enumerate(prior.marginals):
            table[1 << i] = p
        for mask, p in prior.joints.items():
            table[mask] = p
    return table


def prior_probability(problem: Problem, subset: int) -> float:
    """Prior probability that every urn in ``subset`` holds a red marble.

    The empty subset has probability 1 by convention. The independent kind
    multiplies marginals; the single-marble kind sends every subset of two
    or more urns to 0; the general kind looks up stored joints, defaulting
    to 0 for unspecified ones.
    """
    if subset < 0 or subset > problem.full_mask:
        raise InvalidProblemError(f"subset mask {subset:#x} references urns outside the problem")
    return problem.phi_table()[subset]


def placement_probability(problem: Problem, subset: int) -> float:
    """Probability that red marbles sit in exactly the urns of ``subset``.

    Alternating sum over supersets of ``subset``. Tiny negatives from
    floating-point cancellation (within ``VALIDATION_EPS``) are clamped to
    0; anything more negative is returned as-is for the validator to flag.
    """
    if subset < 0 or subset > problem.full_mask:
        raise InvalidProblemError(f"subset mask {subset:#x} references urns outside the problem")
    phi = problem.phi_table()
    rest = problem.full_mask & ~subset
    size = subset.bit_count()
    terms = []
    for extra in iter_submasks(rest):
        mask = subset | extra
        sign = -1.0 if (mask.bit_count() - size) & 1 else 1.0
        terms.append(sign * phi[mask])
    return _clamp_unit(math.fsum(terms))


def placement_distribution(problem: Problem) -> tuple[PlacementOutcome, ...]:
    """All exact-placement probabilities, one entry per subset bitmask.

    Assumes :func:`validate` passed; values within ``VALIDATION_EPS`` below
    0 (or above 1) are clamped into [0, 1].
    """
    atoms = _raw_placement_probabilities(problem)
    return tuple(PlacementOutcome(mask, _clamp_unit(p)) for mask, p in enumerate(atoms))


def _clamp_unit(p: float) -> float:
    if -VALIDATION_EPS <= p < 0.0:
        return 0.0
    if 1.0 < p <= 1.0 + VALIDATION_EPS:
        return 1.0
    return p


def _raw_placement_probabilities(problem: Problem) -> list[float]:
    # Superset Moebius transform: atoms[U] = sum over S >= U of (-1)^|S\U| phi[S],
    # computed in O(n * 2^n) by peeling one bit at a time.
    n = problem.n_urns
    atoms = list(problem.phi_table())
    for bit in range(n):
        step = 1 << bit
        for mask in range(1 << n):
            if not mask & step:
                atoms[mask] -= atoms[mask | step]
    return atoms


def validate(problem: Problem) -> ValidationReport:
    """Check that the prior is a coherent probability model.

    An empty violation list means: every exact-placement probability is at
    least ``-VALIDATION_EPS``, the placement probabilities sum to 1 within
    1e-9, and nesting monotonicity holds (a subset is never less probable
    than a superset). Zero marginals are legal but reported as warnings
    because no draw from such an urn can ever succeed.
    """
    violations: list[str] = []
    warnings: list[str] = []
    phi = problem.phi_table()

    atoms = _raw_placement_probabilities(problem)
    for mask, p in enumerate(atoms):
        if p < -VALIDATION_EPS:
            labels = ", ".join(problem.labels_of(mask)) or "no urn"
            violations.append(
                f"placement probability for exactly {{{labels}}} is negative: {p:.12g}"
            )
    total = math.fsum(atoms)
    if abs(total - 1.0) > VALIDATION_EPS:
        violations.append(f"placement probabilities sum to {total:.12g}, expected 1")

    for mask in range(1, 1 << problem.n_urns):
        for bit in iter_bits(mask):
            smaller = mask ^ (1 << bit)
            if phi[mask] > phi[smaller] + VALIDATION_EPS:
                violations.append(
                    f"prior of {{{', '.join(problem.labels_of(mask))}}} exceeds prior of its "
                    f"subset {{{', '.join(problem.labels_of(smaller)) or ''}}}: "
                    f"{phi[mask]:.12g} > {phi[smaller]:.12g}"
                )

    for urn, p in zip(problem.urns, problem.prior.marginals):
        if p == 0.0:
            warnings.append(f"urn {urn.id!r} has zero prior probability; drawing from it can never succeed")

    return ValidationReport(tuple(violations), tuple(warnings))


def parse_problem(data: object) -> Problem:
    """Build a Problem from the JSON document structure.

    Expected shape::

        {"urns": [{"id": "u1", "marbles": 2}, ...],
         "prior": {"kind": "independent" | "single" | "general",
                   "marginals": {"u1": 0.5, ...},
                   "joints": [{"urns": ["u1", "u2"], "prob": 0.3}, ...]}}

    ``joints`` is permitted only for kind ``general``.
    """
    if not isinstance(data, dict):
        raise InvalidProblemError("problem document must be a JSON object")
    urns_doc = data.get("urns")
    prior_doc = data.get("prior")
    if not isinstance(urns_doc, list) or not isinstance(prior_doc, dict):
        raise InvalidProblemError('problem document needs "urns" (list) and "prior" (object)')

    urns: list[tuple[str, int]] = []
    for entry in urns_doc:
        if not isinstance(entry, dict) or "id" not in entry or "marbles" not in entry:
            raise InvalidProblemError('each urn needs "id" and "marbles"')
        label = entry["id"]
        if not isinstance(label, str):
            raise InvalidProblemError(f"urn id must be a string, got {label!r}")
        urns.append((label, entry["marbles"]))

    kind = prior_doc.get("kind")
    marginals = prior_doc.get("marginals")
    if not isinstance(marginals, dict):
        raise InvalidProblemError('prior needs a "marginals" object')

    joints: dict[tuple[str, ...], float] = {}
    joints_doc = prior_doc.get("joints")
    if joints_doc is not None:
        if not isinstance(joints_doc, list):
            raise InvalidProblemError('"joints" must be a list')
        for entry in joints_doc:
            if not isinstance(entry, dict) or "urns" not in entry or "prob" not in entry:
                raise InvalidProblemError('each joint needs "urns" and "prob"')
            labels = entry["urns"]
            if not isinstance(labels, list) or not all(isinstance(x, str) for x in labels):
                raise InvalidProblemError('joint "urns" must be a list of urn ids')
            key = tuple(labels)
            if key in joints:
                raise InvalidProblemError(f"duplicate joint subset {key!r}")
            joints[key] = entry["prob"]

    return build_problem(urns, kind, marginals, joints or None)


def load_problem(path: str) -> Problem:
    """Read a problem file (JSON, UTF-8) from ``path``."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise InvalidProblemError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidProblemError(f"{path} is not valid JSON: {exc}") from exc
    return parse_problem(data)


def problem_to_dict(problem: Problem) -> dict:
    """Inverse of :func:`parse_problem`, for writing problem files."""
    doc: dict = {
        "urns": [{"id": u.id, "marbles": u.marbles} for u in problem.urns],
        "prior": {
            "kind": problem.prior.kind.value,
            "marginals": {u.id: p for u, p in zip(problem.urns, problem.prior.marginals)},
        },
    }
    if problem.prior.kind is PriorKind.GENERAL and problem.prior.joints:
        doc["prior"]["joints"] = [
            {"urns": list(problem.labels_of(mask)), "prob": prob}
            for mask, prob in sorted(problem.prior.joints.items())
        ]
    return doc
