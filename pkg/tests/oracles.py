"""Reference implementations used only by the tests.

They are deliberately slow and share no code with the package: permanents by
summing over permutations, photon statistics by brute-force enumeration of an
enlarged mode space in which every photon carries an explicit internal state.
"""

from __future__ import annotations

import math
from itertools import combinations, combinations_with_replacement, permutations, product

import numpy as np


def naive_permanent(a) -> complex:
    a = np.asarray(a, dtype=np.complex128)
    n = a.shape[0]
    if n == 0:
        return 1.0 + 0j
    return complex(sum(np.prod([a[i, p[i]] for i in range(n)]) for p in permutations(range(n))))


def _ext_probabilities(spatial, sources, internal, n_out_modes):
    """Output distribution over spatial occupations of the first ``n_out_modes`` rows.

    ``spatial``: (rows, M) linear map acting on spatial modes (may include loss rows).
    ``sources``: input spatial mode of each photon.
    ``internal``: (photons, D) internal state of each photon (pure).
    Returns a dict ``tuple(occupation of visible modes) -> probability``.
    """
    rows = spatial.shape[0]
    d = internal.shape[1]
    n = len(sources)
    # column k of b: amplitude of photon k in extended mode (row, d)
    b = np.einsum("rk,kd->rdk", spatial[:, sources], internal).reshape(rows * d, n)
    out = {}
    for modes in combinations_with_replacement(range(rows * d), n):
        amp = naive_permanent(b[list(modes), :])
        counts = {}
        for m in modes:
            counts[m] = counts.get(m, 0) + 1
        p = abs(amp) ** 2 / math.prod(math.factorial(c) for c in counts.values())
        if p == 0.0:
            continue
        occ = [0] * n_out_modes
        for m in modes:
            r = m // d
            if r < n_out_modes:
                occ[r] += 1
        key = tuple(occ)
        out[key] = out.get(key, 0.0) + p
    return out


def noisy_distribution(u, input_modes, indistinguishability=1.0, g2=0.0, transmission=1.0):
    """Brute-force output distribution of the partially distinguishable, lossy, g2-contaminated source.

    Photon k has internal state ``sqrt(a)|0> + sqrt(1-a)|k+1>`` with
    ``a = sqrt(indistinguishability)``: the overlap of two photons is ``a``, so
    its square (the HOM visibility) equals the indistinguishability. Each
    source emits, with probability ``g2``, an extra photon in a private
    internal state. Loss is a beam splitter of transmission ``eta`` into M
    environment modes that are traced out.
    """
    u = np.asarray(u, dtype=np.complex128)
    m = u.shape[0]
    n = len(input_modes)
    eta = transmission
    spatial = np.vstack([math.sqrt(eta) * u, math.sqrt(1.0 - eta) * np.eye(m)])
    a = math.sqrt(indistinguishability)
    dim = 1 + 2 * n
    total = {}
    for extras in product((0, 1), repeat=n):
        w = math.prod(g2 if e else 1.0 - g2 for e in extras)
        if w == 0.0:
            continue
        sources, states = [], []
        for k in range(n):
            v = np.zeros(dim)
            v[0] = math.sqrt(a)
            v[1 + k] = math.sqrt(1.0 - a)
            sources.append(input_modes[k])
            states.append(v)
        for k in range(n):
            if extras[k]:
                v = np.zeros(dim)
                v[1 + n + k] = 1.0
                sources.append(input_modes[k])
                states.append(v)
        part = _ext_probabilities(spatial, sources, np.array(states), m)
        for key, p in part.items():
            total[key] = total.get(key, 0.0) + w * p
    return total


def hom_coincidence(indistinguishability):
    """Two photons on a 50:50 beam splitter: P(one photon in each output)."""
    bs = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    dist = noisy_distribution(bs, [0, 1], indistinguishability)
    return dist.get((1, 1), 0.0)


def classical_monte_carlo(u, input_modes, n_trials, seed):
    """Route each photon independently according to |U|^2 and histogram the occupations."""
    rng = np.random.default_rng(seed)
    probs = np.abs(np.asarray(u)) ** 2
    m = probs.shape[0]
    hits = np.stack([rng.choice(m, size=n_trials, p=probs[:, s] / probs[:, s].sum()) for s in input_modes], axis=1)
    occ = np.zeros((n_trials, m), dtype=np.int64)
    for col in hits.T:
        occ[np.arange(n_trials), col] += 1
    keys, counts = np.unique(occ, axis=0, return_counts=True)
    return {tuple(int(v) for v in k): c / n_trials for k, c in zip(keys, counts)}


def multinomial_tvd_band(p, n_samples, n_trials, seed):
    """TVDs between two independent multinomial histograms of ``p`` (renormalized)."""
    rng = np.random.default_rng(seed)
    out = np.empty(n_trials)
    for i in range(n_trials):
        a = rng.multinomial(n_samples, p).astype(float)
        b = rng.multinomial(n_samples, p).astype(float)
        out[i] = 0.5 * np.abs(a / a.sum() - b / b.sum()).sum()
    return out


def brute_patterns(m, n):
    return list(combinations(range(m), n))


def js_base2(p, q):
    """Jensen-Shannon divergence written out directly from entropies (bits)."""
    def h(v):
        v = np.asarray(v, dtype=float)
        v = v[v > 0]
        return float(-(v * np.log2(v)).sum())

    p, q = np.asarray(p, float), np.asarray(q, float)
    return h(0.5 * (p + q)) - 0.5 * h(p) - 0.5 * h(q)


def finite_difference(f, x, step=1e-5):
    x = np.array(x, dtype=np.float64)
    g = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"])
    for _ in it:
        i = it.multi_index
        orig = x[i]
        x[i] = orig + step
        fp = f(x)
        x[i] = orig - step
        fm = f(x)
        x[i] = orig
        g[i] = (fp - fm) / (2 * step)
    return g
