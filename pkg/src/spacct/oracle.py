"""Ground truth for the composition bounds on tiny instances.

exact_mechanism_law enumerates every template, every assignment of the
non-critical entries, and every critical value, and accumulates the exact
joint answer laws of the partition mechanism. It deliberately avoids the
convolution machinery used by the bound computations, so agreement between
the two is a genuine cross-check. mc_distinguish estimates the same
divergence from sampled runs of the mechanism.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .compose import AdaptiveSpec, CompositionSpec, NonadaptiveSpec
from .curve import hockey_stick
from .distkit import Pmf
from .errors import CapacityError, DomainError
from .partition import PartitionLaw, TemplateFormat, enumerate_templates, template_count
from .spc import IidEntries, PropertyQuery, Scenario

# Ceiling on |W|^(n-1) * template count * answer-tuple count.
ORACLE_CAP = 10**7

# Epsilon grid of the built-in verification matrix.
MATRIX_EPSILONS = (0.0, 0.1, 1.0)


@dataclass(frozen=True)
class ExactMechanismLaw:
    """Joint answer law of the mechanism, per critical value.

    Answer tuples (a_1, ..., a_m) are flattened to a single integer by
    mixed-radix encoding with bases n_k + 1.
    """

    laws: dict[int, Pmf]
    radix: tuple[int, ...]

    def delta(self, epsilon: float) -> float:
        best = 0.0
        values = list(self.laws)
        for v in values:
            for w in values:
                if v != w:
                    best = max(best, hockey_stick(self.laws[v], self.laws[w], epsilon))
        return best


class McEstimate(NamedTuple):
    estimate: float
    half_width: float


def _flat_multipliers(radix: tuple[int, ...]) -> np.ndarray:
    mult = np.ones(len(radix), dtype=np.int64)
    for k in range(len(radix) - 2, -1, -1):
        mult[k] = mult[k + 1] * radix[k + 1]
    return mult


def _answer_matrix(spec: CompositionSpec, get_answers, num_rows: int) -> np.ndarray:
    """Answers of all rows (enumerated assignments or sampled trials).

    get_answers(query, rows, block) must return the per-row answers of
    `query` on block index `block` restricted to `rows`. Adaptive specs are
    evaluated by grouping rows on their answer prefix.
    """
    m = spec.format.num_blocks
    answers = np.zeros((num_rows, m), dtype=np.int64)
    if isinstance(spec, NonadaptiveSpec):
        all_rows = np.arange(num_rows)
        for k, query in enumerate(spec.queries):
            answers[:, k] = get_answers(query, all_rows, k)
        return answers
    groups: list[tuple[tuple[int, ...], np.ndarray]] = [((), np.arange(num_rows))]
    for k in range(m):
        nxt = []
        for prefix, rows in groups:
            query = spec.choose(prefix)
            if not isinstance(query, PropertyQuery):
                raise DomainError(f"adaptive chooser returned {query!r} for prefix {prefix}")
            a = get_answers(query, rows, k)
            answers[rows, k] = a
            if k + 1 < m:
                for val in np.unique(a):
                    nxt.append((prefix + (int(val),), rows[a == val]))
        groups = nxt
    return answers


def exact_mechanism_law(scenario: Scenario, spec: CompositionSpec,
                        cap: int = ORACLE_CAP) -> ExactMechanismLaw:
    """Exact joint answer laws by brute-force enumeration.

    Cost is |W|^(n-1) * #templates * #answer tuples and is checked against
    `cap` before any work happens.
    """
    fmt = spec.format
    n = scenario.n
    num_values = scenario.num_values
    num_attrs = scenario.num_attributes
    law = PartitionLaw(n, fmt)
    n_templates = template_count(law)
    radix = tuple(s + 1 for s in fmt.sizes)
    n_answers = math.prod(radix)
    budget = num_values ** (n - 1) * n_templates * n_answers
    if budget > cap:
        raise CapacityError(
            f"exact enumeration needs {budget} law evaluations, above the cap of {cap}"
        )
    j0 = scenario.critical_index - 1
    probs = scenario.probs_matrix()

    num_rows = num_values ** (n - 1)
    ids = np.arange(num_rows, dtype=np.int64)
    place = num_values ** np.arange(n - 1, dtype=np.int64)
    digits = (ids[:, None] // place[None, :]) % num_values
    bits = ((digits[:, :, None] >> np.arange(num_attrs)) & 1).astype(np.int8)
    probs_nc = np.delete(probs, j0, axis=0)
    row_prob = np.prod(np.where(bits == 1, probs_nc[None], 1.0 - probs_nc[None]), axis=(1, 2))

    mult = _flat_multipliers(radix)
    templates = enumerate_templates(law, cap=max(n_templates, 1))
    hist = {v: np.zeros(n_answers) for v in range(num_values)}
    noncrit = [i for i in range(n) if i != j0]
    for v in range(num_values):
        entries = np.empty((num_rows, n, num_attrs), dtype=np.int8)
        entries[:, noncrit, :] = bits
        for t in range(num_attrs):
            entries[:, j0, t] = (v >> t) & 1
        plane_cache: dict[tuple[int, bool], np.ndarray] = {}

        def plane_for(query: PropertyQuery) -> np.ndarray:
            key = (query.attribute, query.negate)
            if key not in plane_cache:
                plane = entries[:, :, query.attribute]
                plane_cache[key] = 1 - plane if query.negate else plane
            return plane_cache[key]

        for template, w in templates:
            blocks0 = [np.asarray(block, dtype=np.int64) - 1 for block in template.index_lists]

            def get_answers(query: PropertyQuery, rows: np.ndarray, k: int) -> np.ndarray:
                plane = plane_for(query)
                return plane[np.ix_(rows, blocks0[k])].sum(axis=1)

            answers = _answer_matrix(spec, get_answers, num_rows)
            flat = answers @ mult
            np.add.at(hist[v], flat, w * row_prob)
    laws = {v: Pmf(0, h) for v, h in hist.items()}
    return ExactMechanismLaw(laws=laws, radix=radix)


def exact_mechanism_delta(scenario: Scenario, spec: CompositionSpec, epsilon: float,
                          cap: int = ORACLE_CAP) -> float:
    """Exact mechanism divergence: max over ordered critical-value pairs."""
    return exact_mechanism_law(scenario, spec, cap=cap).delta(epsilon)


def mc_distinguish(scenario: Scenario, spec: CompositionSpec, epsilon: float,
                   trials: int, seed: int) -> McEstimate:
    """Plug-in divergence estimate from sampled mechanism runs.

    Per critical value, samples (template, database, answers) `trials` times
    and histograms the answer tuples; the divergence of each ordered pair of
    empirical laws is evaluated directly. The half-width is the 95% normal
    approximation for the maximizing pair, treating its optimal answer set
    as fixed. The estimator's bias is O(answer-space / trials).

    A master seed is split into one child stream per critical value, and
    each trial's randomness occupies a fixed slice of that stream, so
    results do not depend on evaluation order and reruns are bit-identical.
    """
    if trials < 10**3:
        raise DomainError("need at least 1000 trials")
    fmt = spec.format
    n = scenario.n
    num_values = scenario.num_values
    num_attrs = scenario.num_attributes
    radix = tuple(s + 1 for s in fmt.sizes)
    mult = _flat_multipliers(radix)
    n_answers = math.prod(radix)
    j0 = scenario.critical_index - 1
    probs = scenario.probs_matrix()
    starts = np.cumsum([0] + list(fmt.sizes))

    children = np.random.SeedSequence(seed).spawn(num_values)
    hist: dict[int, np.ndarray] = {}
    for v in range(num_values):
        rng = np.random.default_rng(children[v])
        perm = np.argsort(rng.random((trials, n)), axis=1)
        entries = (rng.random((trials, n, num_attrs)) < probs[None]).astype(np.int8)
        for t in range(num_attrs):
            entries[:, j0, t] = (v >> t) & 1
        plane_cache: dict[tuple[int, bool], np.ndarray] = {}

        def plane_for(query: PropertyQuery) -> np.ndarray:
            key = (query.attribute, query.negate)
            if key not in plane_cache:
                plane = entries[:, :, query.attribute]
                plane_cache[key] = 1 - plane if query.negate else plane
            return plane_cache[key]

        def get_answers(query: PropertyQuery, rows: np.ndarray, k: int) -> np.ndarray:
            plane = plane_for(query)
            slots = perm[rows, starts[k]:starts[k + 1]]
            return np.take_along_axis(plane[rows], slots, axis=1).sum(axis=1)

        answers = _answer_matrix(spec, get_answers, trials)
        flat = answers @ mult
        hist[v] = np.bincount(flat, minlength=n_answers) / trials

    scale = math.exp(min(epsilon, 700.0))
    best, best_pair = -1.0, (0, 1)
    for v in range(num_values):
        for w in range(num_values):
            if v == w:
                continue
            mask = hist[v] > scale * hist[w]
            est = math.fsum(hist[v][mask].tolist()) - scale * math.fsum(hist[w][mask].tolist())
            if est > best:
                best, best_pair = est, (v, w)
    best = max(0.0, best)
    v, w = best_pair
    mask = hist[v] > scale * hist[w]
    pv = math.fsum(hist[v][mask].tolist())
    pw = math.fsum(hist[w][mask].tolist())
    var = (pv * (1.0 - pv) + scale * scale * pw * (1.0 - pw)) / trials
    return McEstimate(best, 1.96 * math.sqrt(max(var, 0.0)))


@dataclass(frozen=True)
class MatrixInstance:
    name: str
    scenario: Scenario
    spec: CompositionSpec


def verification_matrix() -> list[MatrixInstance]:
    """The built-in tiny-instance matrix used for bound verification:
    n in {2,4,6,8} x m in {1,2} (equal blocks) x p in {0.2,0.5} x
    {nonadaptive, a 2-branch adaptive spec}."""
    instances = []
    for n in (2, 4, 6, 8):
        for p in (0.2, 0.5):
            scenario = Scenario(n, IidEntries((p,)))
            for m in (1, 2):
                sizes = (n,) if m == 1 else (n // 2, n // 2)
                fmt = TemplateFormat(sizes)
                base = f"n={n} p={p} m={m}"
                instances.append(MatrixInstance(
                    f"{base} nonadaptive", scenario,
                    NonadaptiveSpec(fmt, tuple(PropertyQuery() for _ in sizes)),
                ))
                threshold = (sizes[0] + 1) // 2
                instances.append(MatrixInstance(
                    f"{base} adaptive", scenario,
                    AdaptiveSpec(fmt, _two_branch_chooser(threshold)),
                ))
    return instances


def _two_branch_chooser(threshold: int):
    # first query counts ones; the second counts ones when the first answer
    # reaches the threshold and zeros otherwise
    def choose(prefix: tuple[int, ...]) -> PropertyQuery:
        if not prefix:
            return PropertyQuery()
        return PropertyQuery() if prefix[0] >= threshold else PropertyQuery(negate=True)

    return choose
