"""Classical preprocessing: PCA, phase encoding, standardization, input assembly."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, InvalidDimensionError, ShapeError

TWO_PI = 2.0 * np.pi
PHASE_CEILING = np.nextafter(TWO_PI, 0.0)

VARIANTS = ("original", "qorc", "reservoir_only", "original_plus_pca")


@dataclass
class PcaModel:
    mean: np.ndarray
    components: np.ndarray  # (n_components, D), orthonormal rows
    explained_variance: np.ndarray

    @property
    def n_components(self) -> int:
        return self.components.shape[0]


def fit_pca(train: np.ndarray, n_components: int) -> PcaModel:
    """Top eigenpairs of the training covariance (dense symmetric solver).

    Each component's sign is fixed so its largest-magnitude entry is positive.
    """
    x = np.asarray(train, dtype=np.float64)
    n, d = x.shape
    if not 1 <= n_components <= min(d, n):
        raise InvalidDimensionError(f"cannot extract {n_components} components from {n} x {d} data")
    mean = x.mean(axis=0)
    centered = x - mean
    cov = centered.T @ centered / max(n - 1, 1)
    vals, vecs = np.linalg.eigh(cov)
    order = np.argsort(vals)[::-1][:n_components]
    comps = vecs[:, order].T
    pivots = np.argmax(np.abs(comps), axis=1)
    comps *= np.sign(comps[np.arange(n_components), pivots])[:, None]
    return PcaModel(mean, comps, np.clip(vals[order], 0.0, None))


def project(model: PcaModel, images: np.ndarray) -> np.ndarray:
    x = np.asarray(images, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != model.mean.size:
        raise ShapeError(f"expected {model.mean.size} columns, got shape {x.shape}")
    return (x - model.mean) @ model.components.T


@dataclass
class PhaseCalibration:
    low: np.ndarray
    high: np.ndarray

    @classmethod
    def fit(cls, train_components: np.ndarray) -> PhaseCalibration:
        x = np.asarray(train_components, dtype=np.float64)
        low, high = x.min(axis=0), x.max(axis=0)
        flat = np.flatnonzero(high <= low)
        if flat.size:
            warnings.warn(f"components {flat.tolist()} are constant on the training split; encoded as phase 0", stacklevel=2)
        return cls(low, high)


def encode_phases(components: np.ndarray, calibration: PhaseCalibration, span: float = TWO_PI) -> np.ndarray:
    """Map each component affinely from its training ``[min, max]`` onto ``[0, span)``.

    ``span`` defaults to the full ``2*pi`` and may not exceed it. Values outside
    the training range are clamped. Works on a single row or a matrix of rows.
    """
    if not 0 < span <= TWO_PI:
        raise ValueError(f"phase span must lie in (0, 2*pi], got {span}")
    x = np.asarray(components, dtype=np.float64)
    width = calibration.high - calibration.low
    safe = np.where(width > 0, width, 1.0)
    frac = np.clip((x - calibration.low) / safe, 0.0, 1.0)
    phases = np.minimum(span * frac, PHASE_CEILING)
    if span < TWO_PI:
        phases = np.minimum(phases, np.nextafter(span, 0.0))
    return np.where(width > 0, phases, 0.0)


@dataclass
class Standardizer:
    means: np.ndarray
    stds: np.ndarray

    @property
    def zero_variance(self) -> np.ndarray:
        return self.stds == 0


def fit_standardizer(train: np.ndarray) -> Standardizer:
    x = np.asarray(train, dtype=np.float64)
    return Standardizer(x.mean(axis=0), x.std(axis=0))


def apply_standardizer(s: Standardizer, m: np.ndarray) -> np.ndarray:
    """``(x - mean) / std`` per column; zero-variance columns become 0."""
    x = np.asarray(m, dtype=np.float64)
    if x.shape[-1] != s.means.size:
        raise ShapeError(f"expected {s.means.size} columns, got {x.shape[-1]}")
    safe = np.where(s.stds > 0, s.stds, 1.0)
    return np.where(s.stds > 0, (x - s.means) / safe, 0.0)


def assemble_inputs(variant: str, pixels=None, pca=None, fingerprints=None) -> np.ndarray:
    """Concatenate column blocks for one classifier input variant.

    original: pixels; qorc: pixels | fingerprint; reservoir_only: fingerprint;
    original_plus_pca: pixels | pca.
    """
    layouts = {
        "original": ("pixels",),
        "qorc": ("pixels", "fingerprints"),
        "reservoir_only": ("fingerprints",),
        "original_plus_pca": ("pixels", "pca"),
    }
    if variant not in layouts:
        raise ConfigError(f"unknown variant {variant!r}; choose from {', '.join(VARIANTS)}")
    blocks = {"pixels": pixels, "pca": pca, "fingerprints": fingerprints}
    parts = []
    for name in layouts[variant]:
        if blocks[name] is None:
            raise ConfigError(f"variant {variant!r} needs the {name} block")
        parts.append(np.asarray(blocks[name], dtype=np.float64))
    rows = {p.shape[0] for p in parts}
    if len(rows) != 1:
        raise ShapeError(f"blocks disagree on row count: {sorted(rows)}")
    return np.concatenate(parts, axis=1)
