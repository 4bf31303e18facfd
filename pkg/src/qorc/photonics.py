"""Boson sampling through the pre-circuit / phase layer / reservoir interferometer.

Outcomes are enumerated exactly (number-resolved, any photon count up to the
largest one the noise model can produce), then sampled and collapsed to
bucket-detector click patterns.

Noise model
-----------
Photon ``i`` carries an internal state with amplitude ``sqrt(a)`` on a mode
shared by all photons and ``sqrt(1 - a)`` on a mode private to it, so the
two-photon HOM visibility is ``a**2``; ``a = sqrt(I)``. Multiphoton interference
depends only on products of overlaps around permutation cycles, so the state is
equivalent to the mixture in which each photon independently sits in the shared
mode (weight ``a``) or its private mode (weight ``1 - a``). Photons in the shared
mode interfere through the permanent rule; the others propagate as independent
classical particles.

Each source additionally emits a fully distinguishable extra photon with
probability ``g2``, and every photon survives to the detectors with probability
``transmission``. Events with a click count other than ``N`` are discarded.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations, combinations_with_replacement

import numpy as np

from . import _accel
from .errors import BudgetExceededError, InvalidOutcomeError, ShapeError
from .linalg import (
    UNITARITY_TOL,
    haar_random_unitary,
    occupation_to_indices,
    permanent,
    permanent_abs2_batch,
    submatrix,
)
from .rng import make_rng

DEFAULT_MAX_OUTCOMES = 500_000


@dataclass(frozen=True)
class NoiseModel:
    indistinguishability: float = 1.0
    g2: float = 0.0
    transmission: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.indistinguishability <= 1.0:
            raise ValueError(f"indistinguishability must lie in [0, 1], got {self.indistinguishability}")
        if not 0.0 <= self.g2 < 1.0:
            raise ValueError(f"g2 must lie in [0, 1), got {self.g2}")
        if not 0.0 < self.transmission <= 1.0:
            raise ValueError(f"transmission must lie in (0, 1], got {self.transmission}")

    @property
    def is_ideal(self) -> bool:
        return self.indistinguishability == 1.0 and self.g2 == 0.0 and self.transmission == 1.0


def default_input_modes(modes: int, photons: int) -> list[int]:
    """Evenly spaced input modes ``floor(k * M / N)``."""
    return [k * modes // photons for k in range(photons)]


def random_input_modes(modes: int, photons: int, seed: int) -> list[int]:
    rng = make_rng(seed)
    return sorted(int(m) for m in rng.choice(modes, size=photons, replace=False))


@dataclass
class ReservoirCircuit:
    modes: int
    photons: int
    u_pre: np.ndarray
    u_res: np.ndarray
    input_modes: list[int] = field(default=None)

    def __post_init__(self):
        if self.photons < 1 or self.modes <= self.photons:
            raise ValueError(f"need M > N >= 1, got M={self.modes}, N={self.photons}")
        if self.modes <= self.photons**2:
            warnings.warn(
                f"M={self.modes} <= N^2={self.photons**2}: outside the collision-free boson sampling regime",
                stacklevel=2,
            )
        if self.input_modes is None:
            self.input_modes = default_input_modes(self.modes, self.photons)
        self.input_modes = [int(m) for m in self.input_modes]
        if len(self.input_modes) != self.photons or len(set(self.input_modes)) != self.photons:
            raise ValueError(f"need {self.photons} distinct input modes, got {self.input_modes}")
        if min(self.input_modes) < 0 or max(self.input_modes) >= self.modes:
            raise ValueError(f"input modes {self.input_modes} out of range for M={self.modes}")
        for name in ("u_pre", "u_res"):
            u = np.asarray(getattr(self, name), dtype=np.complex128)
            if u.shape != (self.modes, self.modes):
                raise ShapeError(f"{name} has shape {u.shape}, expected ({self.modes}, {self.modes})")
            setattr(self, name, u)

    @classmethod
    def from_seed(cls, modes, photons, unitary_seed, input_modes=None, distinct_pre=False):
        """Random circuit; pre-circuit and reservoir share one unitary unless ``distinct_pre``."""
        u_res = haar_random_unitary(modes, unitary_seed)
        u_pre = haar_random_unitary(modes, unitary_seed + 1) if distinct_pre else u_res
        return cls(modes, photons, u_pre, u_res, input_modes)


def assemble_unitary(circuit: ReservoirCircuit, phases) -> np.ndarray:
    """``u_res @ diag(exp(i phases)) @ u_pre``."""
    phases = np.asarray(phases, dtype=np.float64)
    if phases.shape != (circuit.modes,):
        raise ShapeError(f"expected {circuit.modes} phases, got shape {phases.shape}")
    if not np.all(np.isfinite(phases)):
        raise ValueError("phases must be finite")
    return circuit.u_res @ (np.exp(1j * phases)[:, None] * circuit.u_pre)


def _check_states(u, input_state, output_state):
    s = np.asarray(input_state, dtype=np.int64)
    t = np.asarray(output_state, dtype=np.int64)
    m = np.asarray(u).shape[0]
    if s.shape != (m,) or t.shape != (m,):
        raise ShapeError(f"Fock states must have {m} modes")
    if s.min(initial=0) < 0 or t.min(initial=0) < 0:
        raise InvalidOutcomeError("occupations must be non-negative")
    if s.sum() != t.sum():
        raise InvalidOutcomeError(f"input carries {s.sum()} photons but output carries {t.sum()}")
    return s, t


def _factorial_product(occ) -> int:
    return math.prod(math.factorial(int(k)) for k in occ)


def ideal_outcome_probability(u, input_state, output_state) -> float:
    """``|perm(U_{T,S})|^2 / (prod s_i! prod t_j!)`` for indistinguishable photons."""
    s, t = _check_states(u, input_state, output_state)
    sub = submatrix(u, occupation_to_indices(t), occupation_to_indices(s))
    return abs(permanent(sub)) ** 2 / (_factorial_product(s) * _factorial_product(t))


def distinguishable_outcome_probability(u, input_state, output_state) -> float:
    """``perm(A_{T,S}) / prod t_j!`` with ``A = |U|^2`` (independent classical photons).

    The output factorials remove the orderings of photons landing in the same
    mode; distinguishable photons sharing an input mode are still counted
    separately.
    """
    s, t = _check_states(u, input_state, output_state)
    a = np.abs(np.asarray(u)) ** 2
    sub = submatrix(a, occupation_to_indices(t), occupation_to_indices(s))
    return permanent(sub).real / _factorial_product(t)


def _comb_rank(c: np.ndarray, n_values: int, binom: np.ndarray) -> np.ndarray:
    """Lexicographic rank of each sorted row of ``c`` among r-subsets of range(n_values)."""
    r = c.shape[1]
    total = math.comb(n_values, r) - 1
    acc = np.zeros(c.shape[0], dtype=np.int64)
    for i in range(r):
        acc += binom[n_values - 1 - c[:, i], r - i]
    return total - acc


def _binom_table(n: int) -> np.ndarray:
    table = np.zeros((n + 1, n + 1), dtype=np.int64)
    for a in range(n + 1):
        for b in range(a + 1):
            table[a, b] = math.comb(a, b)
    return table


class FockSpace:
    """All occupation vectors of ``0..max_photons`` photons in ``modes`` modes.

    States are ordered by photon number, then lexicographically by their sorted
    list of occupied mode indices (one entry per photon).
    """

    def __init__(self, modes: int, max_photons: int):
        self.modes = modes
        self.max_photons = max_photons
        self.block_sizes = [math.comb(modes + n - 1, n) for n in range(max_photons + 1)]
        self.offsets = np.concatenate([[0], np.cumsum(self.block_sizes)]).astype(np.int64)
        self.size = int(self.offsets[-1])
        self._binom = _binom_table(modes + max_photons + 1)
        self.block_modes = [
            np.array(list(combinations_with_replacement(range(modes), n)), dtype=np.int64).reshape(size, n)
            for n, size in enumerate(self.block_sizes)
        ]
        self.photon_count = np.repeat(np.arange(max_photons + 1), self.block_sizes)
        self._add_table = None
        self._factorials = None
        self._click_maps = {}

    def rank_multiset(self, m: np.ndarray) -> np.ndarray:
        """Global index of each row of sorted photon-mode lists ``m`` (all rows same length)."""
        m = np.atleast_2d(np.asarray(m, dtype=np.int64))
        n = m.shape[1]
        if n == 0:
            return np.zeros(m.shape[0], dtype=np.int64)
        c = m + np.arange(n)
        return self.offsets[n] + _comb_rank(c, self.modes + n - 1, self._binom)

    def index_of(self, occupation) -> int:
        occ = np.asarray(occupation, dtype=np.int64)
        if occ.shape != (self.modes,) or occ.min() < 0 or occ.sum() > self.max_photons:
            raise InvalidOutcomeError(f"occupation {occupation} not in this space")
        return int(self.rank_multiset(occupation_to_indices(occ)[None, :])[0])

    def occupation(self, index: int) -> np.ndarray:
        n = int(np.searchsorted(self.offsets, index, side="right") - 1)
        occ = np.zeros(self.modes, dtype=np.int64)
        np.add.at(occ, self.block_modes[n][index - self.offsets[n]], 1)
        return occ

    @property
    def add_table(self) -> np.ndarray:
        """``add_table[i, j]``: index of state ``i`` with one more photon in mode ``j``."""
        if self._add_table is None:
            rows = []
            for n in range(self.max_photons):
                ms = self.block_modes[n]
                grown = np.concatenate(
                    [np.repeat(ms, self.modes, axis=0), np.tile(np.arange(self.modes), len(ms))[:, None]],
                    axis=1,
                )
                grown.sort(axis=1)
                rows.append(self.rank_multiset(grown).reshape(len(ms), self.modes))
            self._add_table = np.concatenate(rows) if rows else np.zeros((0, self.modes), np.int64)
        return self._add_table

    @property
    def factorial_products(self) -> np.ndarray:
        """``prod_j t_j!`` for every state."""
        if self._factorials is None:
            out = np.ones(self.size)
            for n in range(2, self.max_photons + 1):
                ms = self.block_modes[n]
                run = np.ones(len(ms))
                fac = np.ones(len(ms))
                for i in range(1, n):
                    same = ms[:, i] == ms[:, i - 1]
                    run = np.where(same, run + 1, 1)
                    fac *= run
                out[self.offsets[n]:self.offsets[n + 1]] = fac
            self._factorials = out
        return self._factorials

    def click_map(self, photons: int) -> np.ndarray:
        """Pattern index of every state with exactly ``photons`` clicked modes, else -1."""
        if photons not in self._click_maps:
            out = np.full(self.size, -1, dtype=np.int64)
            binom = _binom_table(self.modes)
            for n in range(photons, self.max_photons + 1):
                ms = self.block_modes[n]
                first = np.ones((len(ms), n), dtype=bool)
                first[:, 1:] = ms[:, 1:] != ms[:, :-1]
                hit = first.sum(axis=1) == photons
                if not hit.any():
                    continue
                distinct = ms[hit][first[hit]].reshape(-1, photons)
                out[self.offsets[n] + np.flatnonzero(hit)] = _comb_rank(distinct, self.modes, binom)
            self._click_maps[photons] = out
        return self._click_maps[photons]


def fock_space_size(modes: int, max_photons: int) -> int:
    return math.comb(modes + max_photons, max_photons)


@lru_cache(maxsize=8)
def fock_space(modes: int, max_photons: int) -> FockSpace:
    return FockSpace(modes, max_photons)


def bucket_collapse(outcome, photons: int):
    """Modes that clicked, as a tuple, or ``None`` when photons collided (fewer than N clicks).

    Outcomes with more than N clicks (possible with extra photons) also return
    ``None``: they are not one of the C(M, N) feature slots.
    """
    occ = np.asarray(outcome)
    clicked = tuple(int(i) for i in np.flatnonzero(occ > 0))
    return clicked if len(clicked) == photons else None


def pattern_index(pattern, modes: int, photons: int) -> int:
    """Lexicographic rank of a click pattern among the C(M, N) patterns."""
    p = np.asarray(sorted(pattern), dtype=np.int64)
    if p.size != photons or len(set(p.tolist())) != photons or p.min() < 0 or p.max() >= modes:
        raise InvalidOutcomeError(f"{pattern} is not an {photons}-click pattern on {modes} modes")
    return int(_comb_rank(p[None, :], modes, _binom_table(modes))[0])


def index_pattern(index: int, modes: int, photons: int) -> tuple:
    """Inverse of :func:`pattern_index`."""
    total = math.comb(modes, photons)
    if not 0 <= index < total:
        raise IndexError(f"pattern index {index} outside [0, {total})")
    out = []
    start = 0
    for slot in range(photons):
        for v in range(start, modes):
            block = math.comb(modes - 1 - v, photons - 1 - slot)
            if index < block:
                out.append(v)
                start = v + 1
                break
            index -= block
    return tuple(out)


def all_patterns(modes: int, photons: int) -> list[tuple]:
    return list(combinations(range(modes), photons))


@dataclass
class OutcomeDistribution:
    """Exact outcome probabilities.

    ``kind == "number-resolved"``: ``probabilities`` is indexed by ``space``.
    ``kind == "click-pattern"``: indexed by :func:`pattern_index`, and
    ``collision_mass`` holds the probability of every other event.
    """

    kind: str
    probabilities: np.ndarray
    modes: int
    photons: int
    space: FockSpace | None = None
    collision_mass: float = 0.0

    @property
    def outcome_count(self) -> int:
        return int(self.probabilities.size)

    def clicks(self) -> OutcomeDistribution:
        """Collapse a number-resolved distribution onto click patterns."""
        if self.kind == "click-pattern":
            return self
        cmap = self.space.click_map(self.photons)
        keep = cmap >= 0
        probs = np.bincount(cmap[keep], weights=self.probabilities[keep], minlength=math.comb(self.modes, self.photons))
        return OutcomeDistribution(
            "click-pattern", probs, self.modes, self.photons,
            collision_mass=float(self.probabilities[~keep].sum()),
        )


@_accel.njit
def _add_photon_numba(p_in, add_table, mode_probs, out):
    limit = add_table.shape[0]
    m = mode_probs.shape[0]
    for i in range(limit):
        w = p_in[i]
        if w != 0.0:
            for j in range(m):
                out[add_table[i, j]] += w * mode_probs[j]


def _add_photon_numpy(p_in, add_table, mode_probs, out):
    idx = np.flatnonzero(p_in[: add_table.shape[0]])
    if idx.size:
        weights = (p_in[idx, None] * mode_probs[None, :]).ravel()
        out += np.bincount(add_table[idx].ravel(), weights=weights, minlength=out.size)


def add_classical_photon(p: np.ndarray, space: FockSpace, mode_probs: np.ndarray) -> np.ndarray:
    """Convolve a distribution with one independent photon landing in mode j w.p. ``mode_probs[j]``."""
    out = np.zeros_like(p)
    if _accel.USE_NUMBA:
        _add_photon_numba(p, space.add_table, np.ascontiguousarray(mode_probs), out)
    else:
        _add_photon_numpy(p, space.add_table, mode_probs, out)
    return out


def _ideal_block(u: np.ndarray, input_modes, space: FockSpace) -> np.ndarray:
    """Probabilities of all k-photon outputs for indistinguishable photons in ``input_modes``."""
    k = len(input_modes)
    lo, hi = space.offsets[k], space.offsets[k + 1]
    if k == 0:
        return np.ones(1)
    rows = space.block_modes[k]
    probs = permanent_abs2_batch(u[:, list(input_modes)], rows)
    return probs / space.factorial_products[lo:hi]


def max_photons_for(photons: int, noise: NoiseModel) -> int:
    return photons * 2 if noise.g2 > 0 else photons


def exact_distribution(
    circuit: ReservoirCircuit,
    phases,
    noise: NoiseModel = NoiseModel(),
    max_outcomes: int = DEFAULT_MAX_OUTCOMES,
) -> OutcomeDistribution:
    """Number-resolved output distribution of the noisy circuit."""
    nmax = max_photons_for(circuit.photons, noise)
    required = fock_space_size(circuit.modes, nmax)
    if required > max_outcomes:
        raise BudgetExceededError(required, max_outcomes)
    u = assemble_unitary(circuit, phases)
    return _exact_from_unitary(u, circuit.input_modes, circuit.modes, circuit.photons, noise, fock_space(circuit.modes, nmax))


def _exact_from_unitary(u, input_modes, modes, photons, noise, space) -> OutcomeDistribution:
    a = math.sqrt(noise.indistinguishability)
    eta = noise.transmission
    w_common = eta * a
    w_own = eta * (1.0 - a)
    w_lost = 1.0 - eta
    single = [np.abs(u[:, t]) ** 2 for t in input_modes]

    total = np.zeros(space.size)
    for size in range(photons + 1):
        if size and w_common == 0.0:
            continue
        weight = w_common**size
        for common in combinations(range(photons), size):
            rest = [i for i in range(photons) if i not in common]
            if rest and w_own == 0.0 and w_lost == 0.0:
                continue
            p = np.zeros(space.size)
            k = len(common)
            p[space.offsets[k]:space.offsets[k + 1]] = _ideal_block(u, [input_modes[i] for i in common], space)
            for i in rest:
                moved = add_classical_photon(p, space, single[i]) if w_own else 0.0
                p = w_lost * p + w_own * moved
            total += weight * p

    if noise.g2 > 0:
        w_extra = noise.g2 * eta
        for i in range(photons):
            total = (1.0 - w_extra) * total + w_extra * add_classical_photon(total, space, single[i])

    return OutcomeDistribution("number-resolved", total, modes, photons, space=space)


@dataclass
class ClickHistogram:
    counts: np.ndarray
    total_samples: int
    discarded_collisions: int

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if int(self.counts.sum()) + self.discarded_collisions != self.total_samples:
            raise ValueError("histogram counts and discarded events do not add up to total_samples")


def sample_histogram(dist: OutcomeDistribution, n_samples: int, seed: int, index: int | None = None) -> ClickHistogram:
    """Draw ``n_samples`` detection events and histogram the N-click patterns.

    ``index`` selects a child stream of ``seed`` (one per image).
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    rng = make_rng(seed, index)
    p = np.clip(dist.probabilities, 0.0, None)
    if dist.kind == "number-resolved":
        draws = rng.multinomial(n_samples, p / p.sum())
        cmap = dist.space.click_map(dist.photons)
        keep = cmap >= 0
        counts = np.bincount(cmap[keep], weights=draws[keep], minlength=math.comb(dist.modes, dist.photons))
    else:
        full = np.append(p, max(dist.collision_mass, 0.0))
        draws = rng.multinomial(n_samples, full / full.sum())
        counts = draws[:-1]
    counts = np.rint(counts).astype(np.int64)
    return ClickHistogram(counts, n_samples, n_samples - int(counts.sum()))


def reservoir_histogram(circuit, phases, noise, n_samples, seed, index=None, max_outcomes=DEFAULT_MAX_OUTCOMES):
    return sample_histogram(exact_distribution(circuit, phases, noise, max_outcomes), n_samples, seed, index)
