"""Experiment orchestration: config, fingerprint generation, training runs, sweeps."""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import data as data_mod
from .analysis import js_divergence, ks_two_sample, renormalize, tvd
from .cache import CacheHeader, CacheWriter, FeatureCache, phase_digest, read_cache
from .errors import ConfigError, DataError
from .features import (
    PhaseCalibration,
    apply_standardizer,
    assemble_inputs,
    encode_phases,
    fit_pca,
    fit_standardizer,
    project,
)
from .learn import EvalReport, TrainConfig, evaluate, train
from .photonics import (
    DEFAULT_MAX_OUTCOMES,
    NoiseModel,
    ReservoirCircuit,
    exact_distribution,
    random_input_modes,
    sample_histogram,
)

log = logging.getLogger(__name__)

SWEEP_AXES = ("epochs", "indistinguishability", "train_size", "imbalance", "photon_number")


@dataclass
class Seeds:
    unitary: int = 0
    sampling: int = 0
    shuffle: int = 0
    subset: int = 0
    split: int = 0
    input_state: int | None = None  # None: evenly spaced input modes


@dataclass
class SweepSpec:
    axis: str = "epochs"
    values: list = field(default_factory=list)
    repeats: int = 1


@dataclass
class ExperimentConfig:
    dataset: str = "digits"
    variant: str = "qorc"
    photons: int = 3
    modes: int = 12
    input_modes: list | None = None
    samples_per_image: int = 30000
    noise: NoiseModel = field(default_factory=NoiseModel)
    classifier: TrainConfig = field(default_factory=TrainConfig)
    seeds: Seeds = field(default_factory=Seeds)
    test_fraction: float = 0.2
    train_size: int | None = None
    imbalance: str | None = None
    imbalance_total: int = 10000
    distinct_pre: bool = False
    phase_span: float = 0.5 * math.pi  # chosen on a validation split of the training pool
    max_outcomes: int = DEFAULT_MAX_OUTCOMES
    workers: int = 1
    sweep: SweepSpec | None = None
    output_dir: str = "runs"

    @property
    def pca_components(self) -> int:
        return self.modes

    def validate(self) -> ExperimentConfig:
        if self.variant not in ("original", "qorc", "reservoir_only", "original_plus_pca"):
            raise ConfigError(f"unknown variant {self.variant!r}")
        if not 1 <= self.photons < self.modes:
            raise ConfigError(f"need 1 <= photons < modes, got N={self.photons}, M={self.modes}")
        if not 0 < self.phase_span <= 2.0 * math.pi:
            raise ConfigError(f"phase_span must lie in (0, 2*pi], got {self.phase_span}")
        if self.samples_per_image < 1:
            raise ConfigError("samples_per_image must be >= 1")
        if self.imbalance not in (None, "balanced", "gaussian", "severe"):
            raise ConfigError(f"unknown imbalance kind {self.imbalance!r}")
        if self.sweep is not None and self.sweep.axis not in SWEEP_AXES:
            raise ConfigError(f"unknown sweep axis {self.sweep.axis!r}")
        kind, _, path = self.dataset.partition(":")
        if kind in ("csv", "raw"):
            if not path or not Path(path).exists():
                raise ConfigError(f"dataset file {path!r} does not exist")
        elif kind == "mnist":
            d = Path(path) if path else data_mod.mnist_dir()
            if not d.is_dir():
                raise ConfigError(f"MNIST directory {d} does not exist (set QORC_MNIST_DIR)")
        elif kind != "digits":
            raise ConfigError(f"unknown dataset {self.dataset!r}")
        return self

    def to_dict(self) -> dict:
        return asdict(self)

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()[:12]

    @classmethod
    def from_dict(cls, raw: dict) -> ExperimentConfig:
        raw = dict(raw)
        nested = {"noise": NoiseModel, "classifier": TrainConfig, "seeds": Seeds, "sweep": SweepSpec}
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            for key, typ in nested.items():
                if isinstance(raw.get(key), dict):
                    sub_known = {f.name for f in fields(typ)}
                    bad = set(raw[key]) - sub_known
                    if bad:
                        raise ConfigError(f"unknown keys in {key}: {sorted(bad)}")
                    raw[key] = typ(**raw[key])
            return cls(**raw)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from None

    @classmethod
    def load(cls, path) -> ExperimentConfig:
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        return cls.from_dict(raw)


def sig6(x):
    """Round to 6 significant digits (reports are diffable)."""
    if isinstance(x, float):
        return float(f"{x:.6g}") if math.isfinite(x) else x
    if isinstance(x, dict):
        return {k: sig6(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [sig6(v) for v in x]
    if isinstance(x, np.ndarray):
        return sig6(x.tolist())
    if isinstance(x, np.generic):
        return sig6(x.item())
    return x


def load_splits(cfg: ExperimentConfig) -> tuple[data_mod.LabeledDataset, data_mod.LabeledDataset]:
    kind, _, path = cfg.dataset.partition(":")
    try:
        if kind == "mnist":
            return data_mod.load_mnist(path or None)
        if kind == "digits":
            ds = data_mod.load_digits()
        elif kind == "csv":
            ds = data_mod.load_csv(path)
        elif kind == "raw":
            ds = data_mod.read_raw(path)
        else:
            raise ConfigError(f"unknown dataset {cfg.dataset!r}")
    except FileNotFoundError as exc:
        raise DataError(str(exc)) from None
    return data_mod.train_test_split(ds, cfg.test_fraction, cfg.seeds.split)


def select_training_rows(cfg: ExperimentConfig, pool: data_mod.LabeledDataset, seed: int | None = None) -> np.ndarray:
    """Pool row indices used for training under ``train_size`` / ``imbalance``."""
    seed = cfg.seeds.subset if seed is None else seed
    tagged = data_mod.LabeledDataset(pool.images[:, :1], pool.labels, pool.n_classes)
    tagged.images = np.arange(len(pool), dtype=np.float64)[:, None]
    if cfg.imbalance is not None:
        spec = data_mod.ImbalanceSpec.preset(cfg.imbalance, pool.n_classes, shuffle_seed=seed)
        picked = data_mod.apply_imbalance(tagged, spec, cfg.imbalance_total, seed)
    elif cfg.train_size is not None:
        picked = data_mod.subset(tagged, cfg.train_size, balanced=True, seed=seed)
    else:
        return np.arange(len(pool))
    return picked.images[:, 0].astype(np.int64)


@dataclass
class Prepared:
    """Everything upstream of sampling: splits, PCA, phases, circuit."""

    cfg: ExperimentConfig
    pool: data_mod.LabeledDataset
    test: data_mod.LabeledDataset
    pool_pca: np.ndarray
    test_pca: np.ndarray
    pool_phases: np.ndarray
    test_phases: np.ndarray
    circuit: ReservoirCircuit

    def phases_for(self, pool_rows) -> np.ndarray:
        return np.concatenate([self.pool_phases[pool_rows], self.test_phases])

    def image_ids(self, pool_rows) -> np.ndarray:
        """Per-image stream ids: pool row i -> i, test row j -> len(pool) + j."""
        return np.concatenate([np.asarray(pool_rows, dtype=np.int64), len(self.pool) + np.arange(len(self.test))])


def build_circuit(cfg: ExperimentConfig) -> ReservoirCircuit:
    inputs = cfg.input_modes
    if inputs is None and cfg.seeds.input_state is not None:
        inputs = random_input_modes(cfg.modes, cfg.photons, cfg.seeds.input_state)
    return ReservoirCircuit.from_seed(cfg.modes, cfg.photons, cfg.seeds.unitary, inputs, cfg.distinct_pre)


def prepare(cfg: ExperimentConfig, splits=None) -> Prepared:
    """Load data, fit PCA and the phase calibration on the whole training pool."""
    pool, test = splits if splits is not None else load_splits(cfg)
    pca = fit_pca(pool.images, cfg.pca_components)
    pool_pca, test_pca = project(pca, pool.images), project(pca, test.images)
    calib = PhaseCalibration.fit(pool_pca)
    return Prepared(
        cfg, pool, test, pool_pca, test_pca,
        encode_phases(pool_pca, calib, cfg.phase_span), encode_phases(test_pca, calib, cfg.phase_span),
        build_circuit(cfg),
    )


def cache_header(cfg: ExperimentConfig, circuit: ReservoirCircuit, phases: np.ndarray) -> CacheHeader:
    n = cfg.noise
    return CacheHeader(
        cfg.modes, cfg.photons, phases.shape[0], cfg.samples_per_image,
        float(n.indistinguishability), float(n.g2), float(n.transmission),
        cfg.seeds.unitary, cfg.seeds.sampling, cfg.distinct_pre,
        tuple(circuit.input_modes), phase_digest(phases),
    )


def _sample_one(args):
    circuit, phases, noise, n_samples, seed, image_id, max_outcomes = args
    dist = exact_distribution(circuit, phases, noise, max_outcomes)
    h = sample_histogram(dist, n_samples, seed, index=int(image_id))
    return h.counts, h.discarded_collisions


def generate_fingerprints(
    cfg: ExperimentConfig,
    circuit: ReservoirCircuit,
    phases: np.ndarray,
    image_ids: np.ndarray,
    cache_path=None,
    progress=None,
) -> FeatureCache:
    """Sample click histograms for every phase row, resuming ``cache_path`` if it is partial.

    Image ``r`` uses the child stream ``(seeds.sampling, image_ids[r])`` so the
    result does not depend on worker count or on which other images are present.
    """
    header = cache_header(cfg, circuit, phases)
    n_img = phases.shape[0]
    counts = np.zeros((n_img, header.n_patterns), dtype=np.uint32)
    discarded = np.zeros(n_img, dtype=np.uint32)
    writer = CacheWriter(cache_path, header) if cache_path else None
    start = 0
    if writer is not None and writer.done:
        existing = read_cache(cache_path, require_complete=False)
        start = writer.done
        counts[:start] = existing.counts
        discarded[:start] = existing.discarded
    jobs = (
        (circuit, phases[r], cfg.noise, cfg.samples_per_image, cfg.seeds.sampling, image_ids[r], cfg.max_outcomes)
        for r in range(start, n_img)
    )
    pool = ProcessPoolExecutor(cfg.workers) if cfg.workers > 1 else None
    try:
        results = pool.map(_sample_one, jobs, chunksize=64) if pool else map(_sample_one, jobs)
        for r, (c, d) in enumerate(results, start=start):
            counts[r], discarded[r] = c, d
            if writer is not None:
                writer.append(c, d)
            if progress is not None and (r + 1) % 500 == 0:
                progress(r + 1, n_img)
    finally:
        if pool:
            pool.shutdown()
        if writer is not None:
            writer.close()
    return FeatureCache(header, counts, discarded)


def fingerprints_for(prep: Prepared, pool_rows, cache_path=None, progress=None) -> FeatureCache:
    """Fingerprints of the selected pool rows followed by every test row (cache-aware)."""
    cfg = prep.cfg
    phases = prep.phases_for(pool_rows)
    if cache_path and Path(cache_path).exists():
        cache = read_cache(cache_path, require_complete=False)
        cache.check_compatible(cache_header(cfg, prep.circuit, phases))
        if cache.complete:
            return cache
    return generate_fingerprints(cfg, prep.circuit, phases, prep.image_ids(pool_rows), cache_path, progress)


@dataclass
class RunReport:
    config: dict
    config_hash: str
    train: EvalReport
    test: EvalReport
    runtime_per_epoch_s: float
    n_train: int
    n_test: int
    n_features: int
    traces: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return sig6({
            "config": self.config,
            "config_hash": self.config_hash,
            "train": self.train.to_dict(),
            "test": self.test.to_dict(),
            "runtime_per_epoch_s": self.runtime_per_epoch_s,
            "n_train": self.n_train,
            "n_test": self.n_test,
            "n_features": self.n_features,
            "traces": self.traces,
            "extra": self.extra,
        })

    def csv_row(self) -> dict:
        return sig6({
            "config_hash": self.config_hash,
            "variant": self.config.get("variant"),
            "n_train": self.n_train,
            "n_test": self.n_test,
            "n_features": self.n_features,
            "train_accuracy": self.train.accuracy,
            "test_accuracy": self.test.accuracy,
            "train_macro_f1": self.train.macro_f1,
            "test_macro_f1": self.test.macro_f1,
            "runtime_per_epoch_s": self.runtime_per_epoch_s,
            **{k: v for k, v in self.extra.items() if not isinstance(v, (list, dict))},
        })

    def write(self, out_dir, stem: str = "report"):
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{stem}.json").write_text(json.dumps(self.to_dict(), indent=2, default=str))
        write_csv(out / f"{stem}.csv", [self.csv_row()])


def write_csv(path, rows: list[dict]):
    keys = []
    for row in rows:
        keys.extend(k for k in row if k not in keys)
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=keys)
        w.writeheader()
        for row in rows:
            w.writerow({k: (f"{v:.6g}" if isinstance(v, float) else v) for k, v in row.items()})


def needs_reservoir(variant: str) -> bool:
    return variant in ("qorc", "reservoir_only")


def run_training(
    prep: Prepared,
    pool_rows,
    cache: FeatureCache | None,
    cfg: ExperimentConfig | None = None,
    track_epochs: bool = False,
) -> RunReport:
    """Assemble inputs for ``cfg.variant``, standardize on the training rows, train, evaluate.

    ``cache`` rows must be aligned with ``pool_rows`` followed by the test rows,
    or be a superset aligned with the whole pool (then ``pool_rows`` indexes it).
    """
    cfg = cfg or prep.cfg
    pool_rows = np.asarray(pool_rows, dtype=np.int64)
    y_train = prep.pool.labels[pool_rows]
    y_test = prep.test.labels
    n_tr, n_te = pool_rows.size, len(prep.test)

    fp_train = fp_test = None
    if needs_reservoir(cfg.variant):
        if cache is None or cache.counts.shape[0] == 0:
            raise DataError("this variant needs reservoir fingerprints but the cache is empty")
        counts = cache.counts.astype(np.float64)
        if counts.shape[0] == n_tr + n_te:
            fp_train, fp_test = counts[:n_tr], counts[n_tr:]
        elif counts.shape[0] == len(prep.pool) + n_te:
            fp_train, fp_test = counts[pool_rows], counts[len(prep.pool):]
        else:
            raise DataError(f"cache has {counts.shape[0]} rows; expected {n_tr + n_te} or {len(prep.pool) + n_te}")

    def blocks(pixels, pca, fp):
        return assemble_inputs(cfg.variant, pixels=pixels, pca=pca, fingerprints=fp)

    x_train = blocks(prep.pool.images[pool_rows], prep.pool_pca[pool_rows], fp_train)
    x_test = blocks(prep.test.images, prep.test_pca, fp_test)
    scaler = fit_standardizer(x_train)
    x_train, x_test = apply_standardizer(scaler, x_train), apply_standardizer(scaler, x_test)

    eval_sets = {"train": (x_train, y_train), "test": (x_test, y_test)} if track_epochs else None
    tcfg = replace(cfg.classifier, shuffle_seed=cfg.seeds.shuffle)
    model, history = train(x_train, y_train, tcfg, prep.pool.n_classes, eval_sets)
    tr_rep = evaluate(model, x_train, y_train)
    te_rep = evaluate(model, x_test, y_test)
    rpe = history.runtime_per_epoch
    tr_rep.runtime_per_epoch_s = te_rep.runtime_per_epoch_s = rpe
    traces = {"loss": history.loss, **{f"{k}_accuracy": v for k, v in history.accuracy.items()}}
    extra = {}
    if cache is not None and needs_reservoir(cfg.variant):
        extra["collision_fraction"] = float(cache.discarded.sum() / (cache.discarded.size * cache.header.samples_per_image))
    return RunReport(cfg.to_dict(), cfg.config_hash(), tr_rep, te_rep, rpe, n_tr, n_te, x_train.shape[1], traces, extra)


def default_cache_path(cfg: ExperimentConfig, tag: str = "") -> Path:
    return Path(cfg.output_dir) / f"fingerprints-{cfg.config_hash()}{tag}.qorcftr"


def run_pipeline(cfg: ExperimentConfig, cache_path=None, splits=None, track_epochs=False) -> RunReport:
    """Whole pipeline for one configuration (sampling only when the variant needs it)."""
    prep = prepare(cfg, splits)
    rows = select_training_rows(cfg, prep.pool)
    cache = fingerprints_for(prep, rows, cache_path) if needs_reservoir(cfg.variant) else None
    return run_training(prep, rows, cache, track_epochs=track_epochs)


def compare_caches(a: FeatureCache, b: FeatureCache, pooled_ks: bool = False) -> dict:
    """Per-image TVD / JS on renormalized counts and KS on standardized counts."""
    if (a.header.modes, a.header.photons) != (b.header.modes, b.header.photons):
        raise DataError("caches differ in (M, N)")
    if a.counts.shape != b.counts.shape:
        raise DataError(f"caches hold different shapes: {a.counts.shape} vs {b.counts.shape}")
    return compare_count_matrices(a.counts.astype(np.float64), b.counts.astype(np.float64), pooled_ks)


def _column_standardize(m: np.ndarray) -> np.ndarray:
    return apply_standardizer(fit_standardizer(m), m)


def compare_count_matrices(ca: np.ndarray, cb: np.ndarray, pooled_ks: bool = False) -> dict:
    """Per-image metrics averaged over images.

    KS compares row ``r`` of the column-standardized matrices as two samples;
    with ``pooled_ks`` a single test over all entries is reported as well.
    """
    sa, sb = _column_standardize(ca), _column_standardize(cb)
    t, j, ks, pv = [], [], [], []
    for r in range(ca.shape[0]):
        pa, pb = renormalize(ca[r]), renormalize(cb[r])
        t.append(tvd(pa, pb))
        j.append(js_divergence(pa, pb))
        d, p = ks_two_sample(sa[r], sb[r])
        ks.append(d)
        pv.append(p)
    out = {}
    for name, vals in (("tvd", t), ("js", j), ("ks", ks), ("ks_p_value", pv)):
        arr = np.asarray(vals)
        out[f"{name}_mean"] = float(arr.mean())
        out[f"{name}_std"] = float(arr.std())
    out["n_images"] = int(ca.shape[0])
    if pooled_ks:
        out["ks_pooled"], out["ks_pooled_p_value"] = ks_two_sample(sa.ravel(), sb.ravel())
    return out


def compare_to_exact(cache: FeatureCache, cfg: ExperimentConfig, phases: np.ndarray, pooled_ks: bool = False) -> dict:
    """Compare sampled rows against the exact click-pattern probabilities of the same images."""
    circuit = build_circuit(cfg)
    exact = np.array([
        exact_distribution(circuit, ph, cfg.noise, cfg.max_outcomes).clicks().probabilities for ph in phases
    ])
    return compare_count_matrices(cache.counts.astype(np.float64), exact, pooled_ks)


def sweep(cfg: ExperimentConfig, progress=None) -> tuple[list[dict], list[str]]:
    """Run one training per (axis value, repeat); returns CSV rows and error messages."""
    spec = cfg.sweep
    if spec is None or not spec.values:
        raise ConfigError("sweep needs an axis and a list of values")
    rows, errors = [], []
    splits = load_splits(cfg)

    def record(value, repeat, report: RunReport | None, err: Exception | None, **more):
        row = {"axis": spec.axis, "value": value, "repeat": repeat}
        if report is not None:
            row.update(report.csv_row())
        else:
            row.update({"config_hash": cfg.config_hash(), "error": str(err)})
            errors.append(f"{spec.axis}={value} repeat={repeat}: {err}")
        row.update(more)
        rows.append(sig6(row))
        if progress:
            progress(row)

    if spec.axis == "epochs":
        epochs = sorted(int(v) for v in spec.values)
        run_cfg = replace(cfg, classifier=replace(cfg.classifier, epochs=max(epochs)))
        try:
            rep = run_pipeline(run_cfg, default_cache_path(cfg), splits, track_epochs=True)
            for e in epochs:
                row = {"axis": "epochs", "value": e, "repeat": 0, "config_hash": rep.config_hash,
                       "train_accuracy": rep.traces["train_accuracy"][e - 1],
                       "test_accuracy": rep.traces["test_accuracy"][e - 1]}
                rows.append(sig6(row))
        except Exception as exc:  # noqa: BLE001 - collected and reported
            record(epochs, 0, None, exc)
        return rows, errors

    if spec.axis in ("train_size", "imbalance"):
        prep = prepare(cfg, splits)
        cache = None
        if needs_reservoir(cfg.variant):
            cache = fingerprints_for(prep, np.arange(len(prep.pool)), default_cache_path(cfg, "-pool"))
        for value in spec.values:
            for rep_i in range(spec.repeats):
                seed = cfg.seeds.subset + rep_i
                if spec.axis == "train_size":
                    run_cfg = replace(cfg, train_size=int(value), imbalance=None)
                else:
                    run_cfg = replace(cfg, imbalance=str(value), train_size=None)
                run_cfg = replace(run_cfg, seeds=replace(cfg.seeds, subset=seed))
                try:
                    sel = select_training_rows(run_cfg, prep.pool, seed)
                    rep = run_training(prep, sel, cache, run_cfg)
                    record(value, rep_i, rep, None)
                except Exception as exc:  # noqa: BLE001
                    record(value, rep_i, None, exc)
        _aggregate(rows)
        return rows, errors

    for value in spec.values:
        if spec.axis == "indistinguishability":
            run_cfg = replace(cfg, noise=replace(cfg.noise, indistinguishability=float(value)))
        else:
            run_cfg = replace(cfg, photons=int(value))
        try:
            run_cfg.validate()
            rep = run_pipeline(run_cfg, default_cache_path(run_cfg), splits)
            record(value, 0, rep, None, added_inputs=math.comb(run_cfg.modes, run_cfg.photons))
        except Exception as exc:  # noqa: BLE001
            record(value, 0, None, exc)
    return rows, errors


def _aggregate(rows: list[dict]):
    """Append mean/std of accuracy and macro F1 per axis value."""
    by_value = {}
    for r in rows:
        if "test_accuracy" in r:
            by_value.setdefault(r["value"], []).append(r)
    for value, group in by_value.items():
        agg = {"axis": group[0]["axis"], "value": value, "repeat": "mean+-std", "config_hash": group[0]["config_hash"]}
        for key in ("train_accuracy", "test_accuracy", "train_macro_f1", "test_macro_f1"):
            vals = np.array([g[key] for g in group], dtype=np.float64)
            agg[key] = float(vals.mean())
            agg[key + "_std"] = float(vals.std())
        rows.append(sig6(agg))


def reproducibility(cfg: ExperimentConfig, trials: int, vary: str, splits=None) -> dict:
    """Repeat the pipeline changing only the unitary seed or the input-mode seed."""
    if trials < 2:
        raise ConfigError("reproducibility needs at least 2 trials")
    if vary not in ("unitary", "input_state"):
        raise ConfigError(f"vary must be 'unitary' or 'input_state', got {vary!r}")
    splits = splits or load_splits(cfg)
    runs = []
    for t in range(trials):
        if vary == "unitary":
            seeds = replace(cfg.seeds, unitary=cfg.seeds.unitary + t)
        else:
            base = cfg.seeds.input_state if cfg.seeds.input_state is not None else 0
            seeds = replace(cfg.seeds, input_state=base + t)
        run_cfg = replace(cfg, seeds=seeds, input_modes=None if vary == "input_state" else cfg.input_modes)
        rep = run_pipeline(run_cfg, None, splits)
        runs.append({"trial": t, "seed": seeds.unitary if vary == "unitary" else seeds.input_state,
                     "train_accuracy": rep.train.accuracy, "test_accuracy": rep.test.accuracy})
    tr = np.array([r["train_accuracy"] for r in runs])
    te = np.array([r["test_accuracy"] for r in runs])
    return sig6({
        "vary": vary, "trials": trials, "runs": runs,
        "train_mean": float(tr.mean()), "train_std": float(tr.std(ddof=1)),
        "test_mean": float(te.mean()), "test_std": float(te.std(ddof=1)),
    })


def env_output_dir(default: str) -> str:
    return os.environ.get("QORC_OUTPUT_DIR", default)
