"""Exact finite-volume Gibbs distributions by full enumeration.

Configurations with a fixed exterior spin are indexed 0 .. q^|box| - 1, the
digit of flat site k in base q being its spin minus one.  One sweep decodes
index chunks with numpy, assembles per-cube pattern codes, and reads cube
energies from the model table; relative energies are nonnegative with the
all-exterior configuration at zero, so raw Boltzmann weights never overflow
and partition sums stay in linear arithmetic (the maximal weight is one,
which is exactly the max-shifted log-domain form).

Chunks are processed independently, optionally across worker processes, and
merged in fixed chunk order, so results are bit-identical for any worker
count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .contours import Configuration, Contour, _cube_codes_row, _grid, _light_contours
from .errors import CapacityError, InputError, VerificationError
from .lattice import Box, Site
from .model import ModelSpec, _tables, require_certified

DEFAULT_BUDGET = 1 << 26
CHUNK = 1 << 14
BOUND_TOL = 1e-12


@dataclass(frozen=True)
class FiniteVolumeEnsemble:
    """The exact Boltzmann distribution over spins on a box with a constant
    exterior spin: weight exp(-beta * relative energy), normalized."""

    box: Box
    exterior: int
    beta: float
    model: ModelSpec

    def __post_init__(self):
        if self.beta < 0:
            raise InputError(f"beta must be >= 0, got {self.beta}")
        if not 1 <= self.exterior <= self.model.s:
            raise InputError(
                f"exterior spin {self.exterior} outside the symmetric sector "
                f"1..{self.model.s}")
        if self.box.dimension != self.model.d:
            raise InputError("box dimension does not match the model")

    @property
    def config_count(self) -> int:
        return self.model.q ** self.box.size


@dataclass(frozen=True)
class DistributionSummary:
    log_partition: float
    marginals: dict
    sample_space_size: int


@dataclass(frozen=True)
class ContourRecord:
    """One realizable contour with its exact probability and its bound."""

    contour: tuple  # canonical (site, mark) pairs
    size: int
    probability: float
    bound: float

    @property
    def slack(self) -> float:
        return self.bound - self.probability


@dataclass(frozen=True)
class ContourStatistics:
    beta: float
    gap: float
    records: tuple
    config_count: int

    @property
    def violations(self) -> tuple:
        return tuple(rec for rec in self.records if rec.slack < -BOUND_TOL)


# ---------------------------------------------------------------------------
# Chunked enumeration
# ---------------------------------------------------------------------------

def _check_budget(count: int, budget: int | None):
    cap = DEFAULT_BUDGET if budget is None else budget
    if count > cap:
        raise CapacityError(
            f"enumeration over {count} configurations exceeds the budget {cap}",
            count=count)


def _chunk_ranges(count: int):
    return [(start, min(start + CHUNK, count)) for start in range(0, count, CHUNK)]


def _decode_digits(q: int, n_sites: int, start: int, stop: int) -> np.ndarray:
    idx = np.arange(start, stop, dtype=np.int64)
    powers = q ** np.arange(n_sites, dtype=np.int64)
    return ((idx[:, None] // powers) % q).astype(np.int64)


def _chunk_energies(model: ModelSpec, box: Box, exterior: int,
                    start: int, stop: int):
    """Decode one index chunk; return (digits, cube codes, relative energies)."""
    grid = _grid(model, box)
    digits = _decode_digits(model.q, box.size, start, stop)
    m = stop - start
    codes = np.empty((m, len(grid.cube_terms)), dtype=np.int64)
    for j, (sid, pows, ext_pow) in enumerate(grid.cube_terms):
        col = np.full(m, (exterior - 1) * ext_pow, dtype=np.int64)
        for k, p in zip(sid, pows):
            col += digits[:, k] * p
        codes[:, j] = col
    u = grid.tables.u
    energies = u[codes].sum(axis=1) - len(grid.cube_terms) * grid.tables.u_min
    return digits, codes, energies


def _run_chunks(task, argses: Sequence[tuple], workers: int) -> list:
    if workers <= 1 or len(argses) <= 1:
        return [task(a) for a in argses]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(task, argses))


def config_from_index(box: Box, exterior: int, q: int, index: int) -> Configuration:
    """The configuration at a sweep index (site k's digit is base-q digit k)."""
    spins = []
    for _ in range(box.size):
        spins.append(index % q + 1)
        index //= q
    return Configuration(box, tuple(spins), exterior)


def index_of_config(config: Configuration, q: int) -> int:
    idx = 0
    for v in reversed(config.spins):
        idx = idx * q + (v - 1)
    return idx


# ---------------------------------------------------------------------------
# Distribution and marginals
# ---------------------------------------------------------------------------

def _dist_task(args):
    model, box, exterior, beta, start, stop = args
    digits, _, energies = _chunk_energies(model, box, exterior, start, stop)
    w = np.exp(-beta * energies)
    q = model.q
    marg = np.empty((box.size, q), dtype=np.float64)
    for k in range(box.size):
        marg[k] = np.bincount(digits[:, k], weights=w, minlength=q)
    return float(w.sum()), marg


def enumerate_distribution(ens: FiniteVolumeEnsemble, budget: int | None = None,
                           workers: int = 1) -> DistributionSummary:
    """Exact partition sum and single-site marginals by full enumeration."""
    count = ens.config_count
    _check_budget(count, budget)
    argses = [(ens.model, ens.box, ens.exterior, ens.beta, a, b)
              for a, b in _chunk_ranges(count)]
    parts = _run_chunks(_dist_task, argses, workers)
    z = math.fsum(p[0] for p in parts)
    marg = np.zeros((ens.box.size, ens.model.q), dtype=np.float64)
    for _, m in parts:
        marg += m
    marg /= z
    sites = ens.box.sites()
    marginals = {
        (site, v + 1): float(marg[k, v])
        for k, site in enumerate(sites) for v in range(ens.model.q)
    }
    return DistributionSummary(log_partition=math.log(z), marginals=marginals,
                               sample_space_size=count)


def _trend_task(args):
    model, box, exterior, betas, site_idx, start, stop = args
    digits, _, energies = _chunk_energies(model, box, exterior, start, stop)
    out = []
    for beta in betas:
        w = np.exp(-beta * energies)
        counts = np.bincount(digits[:, site_idx], weights=w, minlength=model.q)
        out.append((float(w.sum()), counts))
    return out


def _site_marginals(model: ModelSpec, box: Box, exterior: int, x: Site,
                    betas: Sequence[float], budget, workers) -> list:
    """Exact marginal distribution at one site, for each beta (one sweep)."""
    count = model.q ** box.size
    _check_budget(count, budget)
    site_idx = box.index_of(x)
    argses = [(model, box, exterior, tuple(betas), site_idx, a, b)
              for a, b in _chunk_ranges(count)]
    parts = _run_chunks(_trend_task, argses, workers)
    out = []
    for bi in range(len(betas)):
        z = math.fsum(p[bi][0] for p in parts)
        counts = np.zeros(model.q, dtype=np.float64)
        for p in parts:
            counts += p[bi][1]
        out.append(counts / z)
    return out


def marginal_trend(model: ModelSpec, box: Box, x: Site, i: int, j: int,
                   betas: Sequence[float], budget: int | None = None,
                   workers: int = 1) -> list:
    """Exact marginals of spin j at site x under exterior i along a beta grid."""
    if j == i:
        raise InputError("trend is defined for a spin different from the exterior")
    if not 1 <= j <= model.q:
        raise InputError(f"spin {j} outside 1..{model.q}")
    require_certified(model)
    dists = _site_marginals(model, box, i, x, betas, budget, workers)
    return [float(dist[j - 1]) for dist in dists]


@dataclass(frozen=True)
class GapRecord:
    """Marginal distributions at one site under exterior spins 1 and 2.

    ``gap`` is P_1(x = 1) - P_2(x = 1); the permutation residual is the
    error of the swap identity P_2(x = 1) = P_1(x = 2), which is exact for
    symmetric models.
    """

    beta: float
    gap: float
    permutation_residual: float
    first_marginals: tuple   # spin distribution at x under exterior 1
    second_marginals: tuple  # spin distribution at x under exterior 2


def coexistence_gap(model: ModelSpec, box: Box, x: Site,
                    betas: Sequence[float], budget: int | None = None,
                    workers: int = 1) -> list:
    """Gap between the spin-1 marginals under exterior 1 and exterior 2.

    For a symmetric certified model the two ensembles are related by the
    swap of spins 1 and 2, so P_2(x=1) equals P_1(x=2); the residual of that
    identity is reported alongside the gap.
    """
    require_certified(model)
    if model.s < 2:
        raise InputError("coexistence needs at least two ground states")
    under1 = _site_marginals(model, box, 1, x, betas, budget, workers)
    under2 = _site_marginals(model, box, 2, x, betas, budget, workers)
    out = []
    for beta, d1, d2 in zip(betas, under1, under2):
        out.append(GapRecord(
            beta=beta,
            gap=float(d1[0] - d2[0]),
            permutation_residual=abs(float(d2[0]) - float(d1[1])),
            first_marginals=tuple(float(v) for v in d1),
            second_marginals=tuple(float(v) for v in d2)))
    return out


# ---------------------------------------------------------------------------
# Contour statistics
# ---------------------------------------------------------------------------

def _contour_task(args):
    model, box, exterior, betas, start, stop = args
    grid = _grid(model, box)
    digits, codes, energies = _chunk_energies(model, box, exterior, start, stop)
    weights = [np.exp(-beta * energies) for beta in betas]
    z_parts = tuple(float(w.sum()) for w in weights)
    stats = {}
    ext_digit = exterior - 1
    digit_rows = digits.tolist()
    code_rows = codes.tolist()
    for row_i in range(len(digit_rows)):
        lights = _light_contours(digit_rows[row_i], ext_digit, code_rows[row_i], grid)
        for serial, size in lights:
            entry = stats.get(serial)
            if entry is None:
                entry = [size] + [0.0] * len(betas)
                stats[serial] = entry
            for bi in range(len(betas)):
                entry[bi + 1] += float(weights[bi][row_i])
    return z_parts, stats


def contour_statistics(model: ModelSpec, box: Box, exterior: int,
                       betas: Sequence[float], budget: int | None = None,
                       workers: int = 1) -> list:
    """Exact probability of every realizable contour at each beta.

    One sweep serves all betas (contour decompositions are beta-free).
    Returns one ContourStatistics per beta with records sorted by slack
    against exp(-beta * gap * size), tightest first.
    """
    report = require_certified(model)
    count = model.q ** box.size
    _check_budget(count, budget)
    argses = [(model, box, exterior, tuple(betas), a, b)
              for a, b in _chunk_ranges(count)]
    parts = _run_chunks(_contour_task, argses, workers)
    zs = [math.fsum(p[0][bi] for p in parts) for bi in range(len(betas))]
    merged = {}
    for _, stats in parts:
        for serial, entry in stats.items():
            acc = merged.get(serial)
            if acc is None:
                merged[serial] = list(entry)
            else:
                for bi in range(len(betas)):
                    acc[bi + 1] += entry[bi + 1]
    out = []
    for bi, beta in enumerate(betas):
        records = []
        for serial, entry in merged.items():
            size = entry[0]
            p = entry[bi + 1] / zs[bi]
            records.append(ContourRecord(
                contour=serial, size=size, probability=p,
                bound=math.exp(-beta * report.gap * size)))
        records.sort(key=lambda rec: (rec.slack, rec.contour))
        out.append(ContourStatistics(beta=beta, gap=report.gap,
                                     records=tuple(records), config_count=count))
    return out


def verify_peierls_bound(ens: FiniteVolumeEnsemble, budget: int | None = None,
                         workers: int = 1) -> ContourStatistics:
    """Check p(contour) <= exp(-beta * gap * size) for every realizable contour.

    Raises VerificationError (with the witness record and the full statistics
    attached) on any violation beyond 1e-12.
    """
    stats = contour_statistics(ens.model, ens.box, ens.exterior, [ens.beta],
                               budget=budget, workers=workers)[0]
    bad = stats.violations
    if bad:
        worst = min(bad, key=lambda rec: rec.slack)
        raise VerificationError(
            f"contour probability {worst.probability} exceeds the bound "
            f"{worst.bound} (size {worst.size}, beta {ens.beta})",
            witness=worst, details=stats)
    return stats


def contour_probability(ens: FiniteVolumeEnsemble, gamma: Contour,
                        budget: int | None = None, workers: int = 1) -> float:
    """Exact probability that ``gamma`` occurs among a configuration's contours."""
    require_certified(ens.model)
    if not all(ens.box.contains(site) for site in gamma.interior):
        return 0.0
    target = gamma.serial()
    stats = contour_statistics(ens.model, ens.box, ens.exterior, [ens.beta],
                               budget=budget, workers=workers)[0]
    for rec in stats.records:
        if rec.contour == target:
            return rec.probability
    return 0.0


# ---------------------------------------------------------------------------
# Full sweep table (in-memory; small boxes)
# ---------------------------------------------------------------------------

@dataclass
class SweepTable:
    """Per-configuration energies and contour summaries of a whole ensemble."""

    box: Box
    exterior: int
    model: ModelSpec
    energies: np.ndarray
    contours: list  # per index: tuple of (serial, size)


def full_sweep(model: ModelSpec, box: Box, exterior: int,
               budget: int | None = None) -> SweepTable:
    """Materialize energies and contour lists for every configuration."""
    require_certified(model)
    count = model.q ** box.size
    _check_budget(count, min(budget, 1 << 22) if budget else 1 << 22)
    grid = _grid(model, box)
    energies = np.empty(count, dtype=np.float64)
    all_contours = []
    ext_digit = exterior - 1
    for start, stop in _chunk_ranges(count):
        digits, codes, e = _chunk_energies(model, box, exterior, start, stop)
        energies[start:stop] = e
        digit_rows = digits.tolist()
        code_rows = codes.tolist()
        for row_i in range(len(digit_rows)):
            all_contours.append(
                _light_contours(digit_rows[row_i], ext_digit, code_rows[row_i], grid))
    return SweepTable(box=box, exterior=exterior, model=model,
                      energies=energies, contours=all_contours)


# ---------------------------------------------------------------------------
# Finite-volume consistency of the conditional distributions
# ---------------------------------------------------------------------------

def dlr_consistency(ens: FiniteVolumeEnsemble, subbox: Box,
                    budget: int | None = None) -> float:
    """Max discrepancy between the subbox marginal and the conditional mixture.

    The exact marginal of the ensemble on the subbox is compared with the
    mixture, over configurations of the surrounding annulus, of the
    conditional Boltzmann distributions on the subbox (computed from scratch
    from cube energies).  The identity is algebraic, so the discrepancy is
    pure rounding and should sit below 1e-10.
    """
    box, model = ens.box, ens.model
    if not (box.contains(subbox.lower) and box.contains(subbox.upper)):
        raise InputError(f"subbox {subbox.lower}..{subbox.upper} not inside the box")
    count = ens.config_count
    _check_budget(count, budget)
    q = model.q
    tables = _tables(model)

    sites = box.sites()
    sub_flat = [k for k, site in enumerate(sites) if subbox.contains(site)]
    ann_flat = [k for k, site in enumerate(sites) if not subbox.contains(site)]
    n_sub, n_ann = len(sub_flat), len(ann_flat)

    # exact joint accumulation
    sub_marginal = np.zeros(q ** n_sub, dtype=np.float64)
    ann_weight = np.zeros(q ** n_ann, dtype=np.float64)
    for start, stop in _chunk_ranges(count):
        digits, _, energies = _chunk_energies(model, box, ens.exterior, start, stop)
        w = np.exp(-ens.beta * energies)
        sub_code = np.zeros(stop - start, dtype=np.int64)
        for j, k in enumerate(sub_flat):
            sub_code += digits[:, k] * (q ** j)
        ann_code = np.zeros(stop - start, dtype=np.int64)
        for j, k in enumerate(ann_flat):
            ann_code += digits[:, k] * (q ** j)
        sub_marginal += np.bincount(sub_code, weights=w, minlength=q ** n_sub)
        ann_weight += np.bincount(ann_code, weights=w, minlength=q ** n_ann)
    z = sub_marginal.sum()
    sub_marginal /= z
    ann_weight /= z

    # conditional distributions recomputed from cube energies
    sub_sites = subbox.sites()
    cubes = [
        (sid, pos, ext) for sid, pos, ext in
        zip(_grid(model, box).bx.cube_site_idx,
            _grid(model, box).bx.cube_positions,
            _grid(model, box).bx.cube_ext_positions)
    ]
    sub_set = set(sub_flat)
    touching = []
    for sid, pos, ext in cubes:
        if any(k in sub_set for k in sid):
            touching.append((sid, pos, ext))

    powers = tables.powers
    u = tables.u
    sub_index = {k: j for j, k in enumerate(sub_flat)}
    ann_index = {k: j for j, k in enumerate(ann_flat)}
    ext_digit = ens.exterior - 1

    mixture = np.zeros(q ** n_sub, dtype=np.float64)
    for ann_code in range(q ** n_ann):
        w_ann = ann_weight[ann_code]
        ann_digits = [(ann_code // q ** j) % q for j in range(n_ann)]
        cond = np.zeros(q ** n_sub, dtype=np.float64)
        for sub_code in range(q ** n_sub):
            sub_digits = [(sub_code // q ** j) % q for j in range(n_sub)]
            e = 0.0
            for sid, pos, ext in touching:
                code = ext_digit * sum(powers[p] for p in ext)
                for k, p in zip(sid, pos):
                    if k in sub_index:
                        code += sub_digits[sub_index[k]] * powers[p]
                    else:
                        code += ann_digits[ann_index[k]] * powers[p]
                e += float(u[code]) - tables.u_min
            cond[sub_code] = math.exp(-ens.beta * e)
        cond /= cond.sum()
        mixture += w_ann * cond

    return float(np.max(np.abs(sub_marginal - mixture)))
