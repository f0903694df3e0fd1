"""Scenarios, the property-query kernel, and sampling privacy curves.

A sampling privacy curve (SPC) is the expected two-sided divergence of the
per-template answer laws, taken over templates drawn with the critical index
conditioned into the queried block. For iid entries it collapses to a single
divergence at the sample size; with adversary-known entries it becomes a
hypergeometric mixture with a cheap threshold upper bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import distkit
from .curve import d_hat, property_query_answer_law
from .distkit import Pmf, hypergeometric, poisson_binomial, shift
from .errors import DomainError
from .partition import PartitionLaw, Template, enumerate_templates, sample_template, TEMPLATE_CAP


@dataclass(frozen=True)
class IidEntries:
    """All entries share one Bernoulli parameter per attribute."""

    probs: tuple[float, ...]

    def __post_init__(self) -> None:
        probs = self.probs
        if isinstance(probs, (int, float)):
            probs = (float(probs),)
        probs = tuple(float(p) for p in probs)
        if not probs:
            raise DomainError("need at least one attribute")
        if any(not 0.0 <= p <= 1.0 for p in probs):
            raise DomainError("Bernoulli parameters must lie in [0, 1]")
        object.__setattr__(self, "probs", probs)

    @property
    def num_attributes(self) -> int:
        return len(self.probs)

    def matrix(self, n: int) -> np.ndarray:
        return np.tile(np.asarray(self.probs), (n, 1))


@dataclass(frozen=True)
class ExplicitEntries:
    """One Bernoulli parameter per entry (per attribute)."""

    probs: tuple[tuple[float, ...], ...]

    def __post_init__(self) -> None:
        rows = []
        for row in self.probs:
            if isinstance(row, (int, float)):
                row = (float(row),)
            rows.append(tuple(float(p) for p in row))
        if not rows:
            raise DomainError("need at least one entry")
        width = len(rows[0])
        if width == 0 or any(len(r) != width for r in rows):
            raise DomainError("entries must share the same attribute count")
        if any(not 0.0 <= p <= 1.0 for r in rows for p in r):
            raise DomainError("Bernoulli parameters must lie in [0, 1]")
        object.__setattr__(self, "probs", tuple(rows))

    @property
    def num_attributes(self) -> int:
        return len(self.probs[0])

    def matrix(self, n: int) -> np.ndarray:
        if len(self.probs) != n:
            raise DomainError(f"{len(self.probs)} entries given for a database of size {n}")
        return np.asarray(self.probs, dtype=np.float64)


@dataclass(frozen=True)
class KnownEntries:
    """iid Bernoulli(p) entries of which `known` are adversary background
    knowledge, `known_positive` of them positive. The critical entry is
    never among the known ones."""

    p: float
    known: int
    known_positive: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.p <= 1.0:
            raise DomainError("p must lie in [0, 1]")
        if self.known < 0 or self.known_positive < 0:
            raise DomainError("counts must be nonnegative")
        if self.known_positive > self.known:
            raise DomainError("known_positive may not exceed known")

    @property
    def num_attributes(self) -> int:
        return 1

    def matrix(self, n: int, critical_index: int = 1) -> np.ndarray:
        # known entries occupy the first non-critical positions, positives first
        out = np.full((n, 1), self.p)
        slots = [i for i in range(n) if i != critical_index - 1]
        for pos, slot in enumerate(slots[: self.known]):
            out[slot, 0] = 1.0 if pos < self.known_positive else 0.0
        return out


EntryModel = IidEntries | ExplicitEntries | KnownEntries


@dataclass(frozen=True)
class Scenario:
    """Database size, entry model, and the critical index under attack."""

    n: int
    entries: EntryModel
    critical_index: int = 1

    def __post_init__(self) -> None:
        if self.n < 1:
            raise DomainError("n must be positive")
        if not 1 <= self.critical_index <= self.n:
            raise DomainError(f"critical index {self.critical_index} outside [1, {self.n}]")
        if isinstance(self.entries, ExplicitEntries) and len(self.entries.probs) != self.n:
            raise DomainError("explicit entry list length must equal n")
        if isinstance(self.entries, KnownEntries) and self.entries.known > self.n - 1:
            raise DomainError("at most n - 1 entries can be known")

    @property
    def num_attributes(self) -> int:
        return self.entries.num_attributes

    @property
    def num_values(self) -> int:
        """Size of the entry value space {0,1}^T."""
        return 1 << self.num_attributes

    @property
    def is_iid(self) -> bool:
        return isinstance(self.entries, IidEntries)

    def probs_matrix(self) -> np.ndarray:
        """(n, T) Bernoulli parameters; known entries appear as 0/1 rows."""
        if isinstance(self.entries, KnownEntries):
            return self.entries.matrix(self.n, self.critical_index)
        return self.entries.matrix(self.n)


def value_bit(value: int, attribute: int) -> int:
    """Attribute bit of an encoded entry value (attribute t is bit t)."""
    return (value >> attribute) & 1


@dataclass(frozen=True)
class PropertyQuery:
    """Counts block entries whose attribute equals the target.

    negate=False counts ones, negate=True counts zeros. Other mechanisms
    would plug in here as alternative kernels; only exact counting ships.
    """

    attribute: int = 0
    negate: bool = False

    def __post_init__(self) -> None:
        if self.attribute < 0:
            raise DomainError("attribute index must be nonnegative")

    def success_probs(self, rows: np.ndarray) -> np.ndarray:
        if self.attribute >= rows.shape[1]:
            raise DomainError(
                f"query targets attribute {self.attribute} but entries have {rows.shape[1]}")
        col = rows[:, self.attribute]
        return 1.0 - col if self.negate else col

    def indicator(self, value: int) -> int:
        bit = value_bit(value, self.attribute)
        return 1 - bit if self.negate else bit

    def conditional_law(self, rows: np.ndarray, critical_value: int) -> Pmf:
        """Answer law on a block given the critical entry's value; `rows`
        holds the block's non-critical entry parameters."""
        base = poisson_binomial(self.success_probs(rows)) if rows.shape[0] else distkit.point(0)
        return shift(base, self.indicator(critical_value))

    def indicator_laws(self, rows: np.ndarray) -> dict[int, Pmf]:
        """The two conditional answer laws a block can have, keyed by the
        predicate's value on the critical entry. Critical values with equal
        indicator yield identical laws, so the two-sided divergence over the
        full value space reduces to these."""
        base = poisson_binomial(self.success_probs(rows)) if rows.shape[0] else distkit.point(0)
        return {0: base, 1: shift(base, 1)}

    def unconditional_law(self, rows: np.ndarray) -> Pmf:
        return poisson_binomial(self.success_probs(rows))


class SpcEstimate(NamedTuple):
    value: float
    half_width: float | None = None


@dataclass(frozen=True)
class Enumerate:
    """Exhaustive expectation over the template law."""

    cap: int = TEMPLATE_CAP


@dataclass(frozen=True)
class MonteCarlo:
    """Sampled expectation; reports a 95% normal-approximation half-width.

    The seed may be an int or a tuple of ints (entropy for a SeedSequence).
    """

    trials: int
    seed: int | tuple[int, ...] = 0

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise DomainError("trials must be positive")


def _iid_conditional_laws(sample_size: int, p: float, query: PropertyQuery) -> dict[int, Pmf]:
    success = 1.0 - p if query.negate else p
    return {
        c: property_query_answer_law(sample_size, success, c)
        for c in (0, 1)
    }


def spc_iid(scenario: Scenario, sample_size: int, epsilon: float,
            query: PropertyQuery = PropertyQuery()) -> float:
    """SPC of an iid scenario, conditioned on the critical entry being sampled.

    Identical for every template of a given size, so it equals the two-sided
    divergence at database size `sample_size`.
    """
    if not isinstance(scenario.entries, (IidEntries, KnownEntries)):
        raise DomainError("spc_iid requires an iid entry model")
    if isinstance(scenario.entries, KnownEntries) and scenario.entries.known > 0:
        raise DomainError("use spc_known_entries when known entries are present")
    if not 1 <= sample_size <= scenario.n:
        raise DomainError(f"sample size must lie in [1, {scenario.n}]")
    if query.attribute >= scenario.num_attributes:
        raise DomainError(
            f"query targets attribute {query.attribute} but entries have "
            f"{scenario.num_attributes}")
    p = scenario.entries.probs[query.attribute] if isinstance(scenario.entries, IidEntries) \
        else scenario.entries.p
    return d_hat(_iid_conditional_laws(sample_size, p, query), epsilon)


def _known_weights(n: int, v: int, s: int, population_excludes_critical: bool) -> Pmf:
    population = n - 1 if population_excludes_critical else n
    return hypergeometric(population, v, s - 1)


def spc_known_entries(scenario: Scenario, sample_size: int, epsilon: float, *,
                      population_excludes_critical: bool = False) -> float:
    """SPC with v adversary-known entries: hypergeometric mixture over the
    number z of known entries drawn into the sample.

    Only the count z matters; the known values shift every answer law by the
    same constant. The default weights use hypergeometric(n, v, s-1); the
    flag switches to population n - 1, which excludes the critical entry
    from the draw (the two differ by O(s/n)).
    """
    if not isinstance(scenario.entries, KnownEntries):
        raise DomainError("spc_known_entries requires a known-entries model")
    if not 1 <= sample_size <= scenario.n:
        raise DomainError(f"sample size must lie in [1, {scenario.n}]")
    v, p = scenario.entries.known, scenario.entries.p
    weights = _known_weights(scenario.n, v, sample_size, population_excludes_critical)
    terms = []
    for z, w in weights.items():
        unknown = sample_size - 1 - z
        delta_z = 1.0 if unknown == 0 else d_hat(
            {c: shift(distkit.binomial(unknown, p), c) for c in (0, 1)}, epsilon)
        terms.append(w * delta_z)
    return min(1.0, math.fsum(terms))


def spc_known_entries_threshold_bound(scenario: Scenario, sample_size: int, epsilon: float,
                                      phi: int, *,
                                      population_excludes_critical: bool = False) -> float:
    """Upper bound on spc_known_entries from a single divergence evaluation.

    Replaces the mixture terms above a threshold phi by 1 and those below by
    the value at phi (the terms are nondecreasing in z), giving
    (1 - cdf(phi)) + cdf(phi) * delta(phi).
    """
    if not isinstance(scenario.entries, KnownEntries):
        raise DomainError("threshold bound requires a known-entries model")
    if not 0 <= phi < sample_size - 1:
        raise DomainError(f"phi must lie in [0, {sample_size - 2}]")
    p = scenario.entries.p
    weights = _known_weights(scenario.n, scenario.entries.known, sample_size,
                             population_excludes_critical)
    head = distkit.cdf(weights, phi)
    unknown = sample_size - 1 - phi
    delta_phi = d_hat({c: shift(distkit.binomial(unknown, p), c) for c in (0, 1)}, epsilon)
    return min(1.0, (1.0 - head) + head * delta_phi)


def _template_delta(scenario: Scenario, template: Template, block: int,
                    query: PropertyQuery, epsilon: float, probs: np.ndarray) -> float:
    j = scenario.critical_index
    members = [i for i in template.block(block) if i != j]
    rows = probs[[i - 1 for i in members], :]
    return d_hat(query.indicator_laws(rows), epsilon)


def spc_general(scenario: Scenario, law: PartitionLaw, query: PropertyQuery,
                epsilon: float, mode: Enumerate | MonteCarlo = Enumerate()) -> SpcEstimate:
    """Expected per-template divergence under a law restricted to (j, k).

    Per-template answer laws are Poisson-binomial counts of the block's
    entries (shifted by the critical value). Enumerate mode is exact;
    MonteCarlo averages over sampled templates.
    """
    if law.restriction is None:
        raise DomainError("spc_general requires a law restricted to (critical index, block)")
    j, k = law.restriction
    if j != scenario.critical_index:
        raise DomainError("law restriction does not match the scenario's critical index")
    if law.n != scenario.n:
        raise DomainError("law and scenario disagree on n")
    probs = scenario.probs_matrix()
    if isinstance(mode, Enumerate):
        terms = [
            w * _template_delta(scenario, tpl, k, query, epsilon, probs)
            for tpl, w in enumerate_templates(law, cap=mode.cap)
        ]
        return SpcEstimate(min(1.0, math.fsum(terms)), None)
    rng = np.random.default_rng(np.random.SeedSequence(mode.seed))
    values = np.empty(mode.trials)
    for t in range(mode.trials):
        tpl = sample_template(law, rng)
        values[t] = _template_delta(scenario, tpl, k, query, epsilon, probs)
    mean = float(values.mean())
    spread = float(values.std(ddof=1)) if mode.trials > 1 else 0.0
    return SpcEstimate(mean, 1.96 * spread / math.sqrt(mode.trials))
