"""Single-site Monte Carlo for volumes beyond exact enumeration.

The default kernel is the heat bath: a visited site redraws its spin from
the exact single-site conditional, computed locally from the cubes containing
the site.  Metropolis proposals are available as an option.  Sweeps visit
all sites in a random order.

Randomness is counter-based (Philox): the uniforms consumed for the sites of
sweep t come from a stream keyed by (seed, salt, t) and indexed by site, and
the visit order comes from a separate stream, so a chain is a pure function
of its spec and replicas with different seeds are independent by key.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .contours import Configuration, contours as extract_contours, _grid
from .errors import InputError
from .exact import FiniteVolumeEnsemble
from .lattice import Box, Site
from .model import ModelSpec, require_certified

_SALT_HEAT = 0x68656174          # site-update uniforms
_SALT_ORDER = 0x6f72646572       # visit order
_SALT_PROPOSE = 0x70726f70       # metropolis proposals

KERNELS = ("heat-bath", "metropolis")


@dataclass(frozen=True)
class ChainSpec:
    """A fully reproducible chain: ensemble, seed, and sweep schedule."""

    ensemble: FiniteVolumeEnsemble
    seed: int
    burn_in: int
    samples: int
    thinning: int = 1
    kernel: str = "heat-bath"

    def __post_init__(self):
        if self.burn_in < 1 or self.samples < 1:
            raise InputError("burn_in and samples must be >= 1")
        if self.thinning < 1:
            raise InputError("thinning must be >= 1")
        if self.kernel not in KERNELS:
            raise InputError(f"kernel must be one of {KERNELS}")

    @property
    def total_sweeps(self) -> int:
        return self.burn_in + self.samples * self.thinning


def _stream(seed: int, salt: int, sweep: int) -> np.random.Generator:
    key = np.array([np.uint64(seed & 0xFFFFFFFFFFFFFFFF), np.uint64(salt)],
                   dtype=np.uint64)
    counter = np.array([0, 0, 0, np.uint64(sweep)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key, counter=counter))


class _ChainState:
    """Mutable spins plus incrementally maintained cube codes and energy."""

    def __init__(self, model: ModelSpec, box: Box, exterior: int):
        require_certified(model)
        grid = _grid(model, box)
        self.model = model
        self.box = box
        self.exterior = exterior
        self.q = model.q
        self.n = box.size
        self.u = grid.u_list
        self.u_min = grid.tables.u_min
        self.digits = [exterior - 1] * self.n
        self.codes = []
        # per site: list of (cube index, power of q at its position)
        self.site_cubes = [[] for _ in range(self.n)]
        for j, (sid, pows, ext_pow) in enumerate(grid.cube_terms):
            code = (exterior - 1) * ext_pow
            for k, p in zip(sid, pows):
                code += self.digits[k] * p
                self.site_cubes[k].append((j, p))
            self.codes.append(code)

    def energy(self) -> float:
        u = self.u
        return math.fsum(u[c] for c in self.codes) - len(self.codes) * self.u_min

    def spins(self) -> np.ndarray:
        return np.array(self.digits, dtype=np.int64) + 1

    def configuration(self) -> Configuration:
        return Configuration(self.box, tuple(d + 1 for d in self.digits),
                             self.exterior)

    def set_digit(self, k: int, digit: int) -> None:
        delta = digit - self.digits[k]
        if delta == 0:
            return
        codes = self.codes
        for j, p in self.site_cubes[k]:
            codes[j] += delta * p
        self.digits[k] = digit

    def conditional(self, k: int, beta: float) -> list:
        """Exact single-site conditional probabilities over the q spin values."""
        u = self.u
        codes = self.codes
        cur = self.digits[k]
        energies = []
        for v in range(self.q):
            delta = v - cur
            e = 0.0
            for j, p in self.site_cubes[k]:
                e += u[codes[j] + delta * p]
            energies.append(e)
        lo = min(energies)
        weights = [math.exp(-beta * (e - lo)) for e in energies]
        z = math.fsum(weights)
        return [w / z for w in weights]

    def heat_bath(self, k: int, u01: float, beta: float) -> None:
        probs = self.conditional(k, beta)
        acc = 0.0
        for v, p in enumerate(probs):
            acc += p
            if u01 < acc:
                self.set_digit(k, v)
                return
        self.set_digit(k, self.q - 1)

    def metropolis(self, k: int, u_prop: float, u_acc: float, beta: float) -> None:
        cur = self.digits[k]
        v = int(u_prop * (self.q - 1))
        if v >= cur:
            v += 1  # uniform over the q-1 other values
        e = 0.0
        u = self.u
        for j, p in self.site_cubes[k]:
            e += u[self.codes[j] + (v - cur) * p] - u[self.codes[j]]
        if e <= 0 or u_acc < math.exp(-beta * e):
            self.set_digit(k, v)


def site_conditional(ens: FiniteVolumeEnsemble, config: Configuration,
                     site: Site) -> list:
    """Heat-bath conditional at one site of a configuration (for checks)."""
    state = _ChainState(ens.model, ens.box, ens.exterior)
    for k, v in enumerate(config.spins):
        state.set_digit(k, v - 1)
    return state.conditional(ens.box.index_of(site), ens.beta)


@dataclass
class ChainResult:
    spec: ChainSpec
    means: dict
    stderrs: dict
    batch_count: int
    series: dict | None = None


def _batch_stats(series: np.ndarray, batches: int):
    m = len(series)
    if m < 2:
        return float(series[0]), 0.0, 1
    b = max(2, min(batches, m))
    length = m // b
    trimmed = series[: b * length].reshape(b, length)
    means = trimmed.mean(axis=1)
    mean = float(series.mean())
    stderr = float(means.std(ddof=1) / math.sqrt(b))
    return mean, stderr, b


def run_chain(spec: ChainSpec, observables: Mapping[str, Callable],
              batches: int = 32, keep_series: bool = False) -> ChainResult:
    """Run one chain and estimate the observables with batch-means errors.

    Observables are callables of the flat spin array (values 1..q, row-major
    site order).  The chain starts from the constant exterior configuration
    and is bit-reproducible given the spec.
    """
    ens = spec.ensemble
    state = _ChainState(ens.model, ens.box, ens.exterior)
    n = state.n
    q = ens.model.q
    beta = ens.beta
    names = sorted(observables)
    series = {name: np.empty(spec.samples, dtype=np.float64) for name in names}
    recorded = 0
    heat = spec.kernel == "heat-bath"
    for t in range(spec.total_sweeps):
        order = _stream(spec.seed, _SALT_ORDER, t).permutation(n)
        us = _stream(spec.seed, _SALT_HEAT, t).random(n)
        if heat:
            for k in order:
                state.heat_bath(int(k), float(us[k]), beta)
        else:
            props = _stream(spec.seed, _SALT_PROPOSE, t).random(n)
            if q < 2:
                raise InputError("metropolis needs q >= 2")
            for k in order:
                state.metropolis(int(k), float(props[k]), float(us[k]), beta)
        kept = t - spec.burn_in + 1
        if kept >= 1 and kept % spec.thinning == 0 and recorded < spec.samples:
            spins = state.spins()
            for name in names:
                series[name][recorded] = observables[name](spins)
            recorded += 1
    means, stderrs = {}, {}
    b_used = 0
    for name in names:
        mean, stderr, b_used = _batch_stats(series[name], batches)
        means[name] = mean
        stderrs[name] = stderr
    return ChainResult(spec=spec, means=means, stderrs=stderrs,
                       batch_count=b_used,
                       series=series if keep_series else None)


def site_indicator(box: Box, site: Site, spin: int) -> Callable:
    """Observable: 1.0 when the spin at ``site`` equals ``spin``."""
    k = box.index_of(site)

    def observe(spins: np.ndarray) -> float:
        return 1.0 if int(spins[k]) == spin else 0.0

    return observe


# ---------------------------------------------------------------------------
# Contour-size tails
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TailRecord:
    n: int
    frequency: float
    stderr: float
    envelope: float | None


@dataclass(frozen=True)
class TailReport:
    records: tuple
    samples: int


def tail_envelope(model: ModelSpec, box: Box, beta: float, n: int,
                  census_counts: Mapping[int, int]) -> float | None:
    """Union bound on P(some contour of size >= n) from rooted counts.

    Sums count * exp(-beta * gap * m) over enumerated sizes m >= n, closes
    the tail beyond the enumerated range with the geometric bound
    (4*e*k)^m / 2, and multiplies by the box size (every contour contains a
    site of the box).  Returns None when the geometric tail diverges.
    """
    from .census import max_degree

    report = require_certified(model)
    k = max_degree(model.d, model.r)
    m_max = max(census_counts) if census_counts else 0
    total = 0.0
    for m, count in census_counts.items():
        if m >= n:
            total += count * math.exp(-beta * report.gap * m)
    x = 4 * math.e * k * math.exp(-beta * report.gap)
    if x >= 1:
        return None
    start = max(n, m_max + 1)
    total += 0.5 * x ** start / (1 - x)
    return min(1.0, box.size * total)


def estimate_contour_size_tail(spec: ChainSpec, n_max: int,
                               census_counts: Mapping[int, int] | None = None,
                               batches: int = 32) -> TailReport:
    """Empirical frequency of "some contour of size >= n" for n = 0..n_max.

    Frequencies come with batch-means standard errors; when rooted census
    counts are supplied, each n also carries its union-bound envelope.
    """
    ens = spec.ensemble
    state = _ChainState(ens.model, ens.box, ens.exterior)
    n_sites = state.n
    beta = ens.beta
    heat = spec.kernel == "heat-bath"
    max_sizes = np.empty(spec.samples, dtype=np.float64)
    recorded = 0
    for t in range(spec.total_sweeps):
        order = _stream(spec.seed, _SALT_ORDER, t).permutation(n_sites)
        us = _stream(spec.seed, _SALT_HEAT, t).random(n_sites)
        if heat:
            for k in order:
                state.heat_bath(int(k), float(us[k]), beta)
        else:
            props = _stream(spec.seed, _SALT_PROPOSE, t).random(n_sites)
            for k in order:
                state.metropolis(int(k), float(props[k]), float(us[k]), beta)
        kept = t - spec.burn_in + 1
        if kept >= 1 and kept % spec.thinning == 0 and recorded < spec.samples:
            cs = extract_contours(state.configuration(), ens.model)
            max_sizes[recorded] = max((g.size for g in cs), default=0)
            recorded += 1
    records = []
    for n in range(n_max + 1):
        hits = (max_sizes >= n).astype(np.float64)
        mean, stderr, _ = _batch_stats(hits, batches)
        env = None
        if census_counts is not None and n >= 1:
            env = tail_envelope(ens.model, ens.box, beta, n, census_counts)
        records.append(TailRecord(n=n, frequency=mean, stderr=stderr, envelope=env))
    return TailReport(records=tuple(records), samples=spec.samples)
