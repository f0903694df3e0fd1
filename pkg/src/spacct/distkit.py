"""Finite integer-support probability mass functions.

All laws handled by the accountant (entry counts, query answers, sampling
weights) are finite discrete distributions over a contiguous integer range.
Masses are stored in linear space as float64; constructors that involve
factorials work in log space (log-gamma) so that supports of size 2^15 do
not overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .errors import DomainError

# End masses below this floor are trimmed; chosen so trimming never moves a
# normalized sum by more than ~1e-300 * support size.
SUPPORT_FLOOR = 1e-300

# |fsum(masses) - 1| must stay below this for every constructed Pmf.
NORMALIZATION_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Pmf:
    """A probability mass function on {offset, offset+1, ..., offset+len-1}.

    Invariants: masses are nonnegative, compensated-sum to 1 within 1e-9,
    and the support is contiguous (interior zeros allowed; end points below
    SUPPORT_FLOOR are trimmed at construction).
    """

    offset: int
    masses: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        arr = np.asarray(self.masses, dtype=np.float64)
        if arr.ndim != 1 or arr.size == 0:
            raise DomainError("masses must be a nonempty 1-D sequence")
        if np.any(arr < 0.0):
            raise DomainError("masses must be nonnegative")
        total = math.fsum(arr.tolist())
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise DomainError(f"masses sum to {total!r}, expected 1 +- {NORMALIZATION_TOL}")
        lo, hi = 0, arr.size
        while hi - lo > 1 and arr[lo] < SUPPORT_FLOOR:
            lo += 1
        while hi - lo > 1 and arr[hi - 1] < SUPPORT_FLOOR:
            hi -= 1
        arr = arr[lo:hi].copy()
        arr.setflags(write=False)
        object.__setattr__(self, "offset", int(self.offset) + lo)
        object.__setattr__(self, "masses", arr)

    @property
    def top(self) -> int:
        """Largest support point."""
        return self.offset + self.masses.size - 1

    def mass(self, a: int) -> float:
        if self.offset <= a <= self.top:
            return float(self.masses[a - self.offset])
        return 0.0

    def total(self) -> float:
        return math.fsum(self.masses.tolist())

    def mean(self) -> float:
        pts = np.arange(self.offset, self.top + 1, dtype=np.float64)
        return math.fsum((pts * self.masses).tolist())

    def variance(self) -> float:
        mu = self.mean()
        pts = np.arange(self.offset, self.top + 1, dtype=np.float64) - mu
        return math.fsum((pts * pts * self.masses).tolist())

    def items(self):
        """Iterate (support point, mass) pairs."""
        for i, m in enumerate(self.masses):
            yield self.offset + i, float(m)


def point(value: int) -> Pmf:
    """Point mass at an integer value."""
    return Pmf(int(value), np.ones(1))


def binomial(trials: int, p: float) -> Pmf:
    """Binomial(trials, p) with masses computed via log-gamma.

    For p = 1/2 the upper half of the support is mirrored from the lower
    half, so mass(k) == mass(trials - k) holds bit-identically.
    """
    if trials < 0:
        raise DomainError("trials must be nonnegative")
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p={p!r} outside [0, 1]")
    if trials == 0 or p == 0.0:
        return point(0)
    if p == 1.0:
        return point(trials)
    if p == 0.5:
        half = trials // 2
        k = np.arange(half + 1, dtype=np.float64)
        logpmf = (
            gammaln(trials + 1.0) - gammaln(k + 1.0) - gammaln(trials - k + 1.0)
            + trials * math.log(0.5)
        )
        masses = np.empty(trials + 1)
        masses[: half + 1] = np.exp(logpmf)
        for j in range(half + 1, trials + 1):
            masses[j] = masses[trials - j]
        return Pmf(0, masses)
    k = np.arange(trials + 1, dtype=np.float64)
    logpmf = (
        gammaln(trials + 1.0) - gammaln(k + 1.0) - gammaln(trials - k + 1.0)
        + k * math.log(p) + (trials - k) * math.log1p(-p)
    )
    return Pmf(0, np.exp(logpmf))


def hypergeometric(population: int, successes: int, draws: int) -> Pmf:
    """Law of the number of successes among `draws` taken without replacement.

    Support is {max(0, draws - (population - successes)) .. min(draws, successes)},
    embedded in a contiguous range.
    """
    if population < 0 or successes < 0 or draws < 0:
        raise DomainError("parameters must be nonnegative")
    if successes > population:
        raise DomainError("successes may not exceed population")
    if draws > population:
        raise DomainError("draws may not exceed population")
    if successes == 0 or draws == 0:
        return point(0)
    lo = max(0, draws - (population - successes))
    hi = min(draws, successes)
    if lo == hi:
        return point(lo)
    z = np.arange(lo, hi + 1, dtype=np.float64)
    logpmf = (
        gammaln(successes + 1.0) - gammaln(z + 1.0) - gammaln(successes - z + 1.0)
        + gammaln(population - successes + 1.0)
        - gammaln(draws - z + 1.0) - gammaln(population - successes - draws + z + 1.0)
        - gammaln(population + 1.0)
        + gammaln(draws + 1.0) + gammaln(population - draws + 1.0)
    )
    return Pmf(lo, np.exp(logpmf))


def poisson_binomial(probs) -> Pmf:
    """Sum of independent Bernoulli(p_i) variables, by iterated convolution.

    O(len(probs)^2); intended for desk-scale blocks. An empty sequence
    yields a point mass at 0.
    """
    acc = np.ones(1)
    for q in probs:
        if not 0.0 <= q <= 1.0:
            raise DomainError(f"Bernoulli parameter {q!r} outside [0, 1]")
        nxt = np.zeros(acc.size + 1)
        nxt[:-1] += acc * (1.0 - q)
        nxt[1:] += acc * q
        acc = nxt
    return Pmf(0, acc)


def cdf(d: Pmf, x: int) -> float:
    """P(D <= x); 0 below the support, ~1 at or above its top."""
    if x < d.offset:
        return 0.0
    if x >= d.top:
        return d.total()
    return math.fsum(d.masses[: x - d.offset + 1].tolist())


def shift(d: Pmf, k: int) -> Pmf:
    """Translate the support by k; masses are unchanged."""
    return Pmf(d.offset + int(k), d.masses)


def mixture(components) -> Pmf:
    """Pointwise weighted sum of (weight, Pmf) components over the union support."""
    components = list(components)
    if not components:
        raise DomainError("mixture needs at least one component")
    weights = [w for w, _ in components]
    if any(w < 0 for w in weights):
        raise DomainError("weights must be nonnegative")
    wsum = math.fsum(weights)
    if abs(wsum - 1.0) > NORMALIZATION_TOL:
        raise DomainError(f"weights sum to {wsum!r}, expected 1 +- {NORMALIZATION_TOL}")
    lo = min(d.offset for _, d in components)
    hi = max(d.top for _, d in components)
    out = np.zeros(hi - lo + 1)
    for w, d in components:
        out[d.offset - lo : d.offset - lo + d.masses.size] += w * d.masses
    return Pmf(lo, out)
