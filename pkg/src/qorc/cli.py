"""Command-line entry point: ``qorc <subcommand> [--config FILE] [overrides]``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict, replace
from pathlib import Path

import numpy as np

from . import experiment as ex
from .cache import read_cache
from .errors import BudgetExceededError, ConfigError, DataError, DivergenceError, FitFailedError, QorcError

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC, EXIT_PARTIAL = 0, 2, 3, 4, 5

log = logging.getLogger("qorc")


def _int_list(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _value_list(text: str) -> list:
    out = []
    for v in text.split(","):
        v = v.strip()
        try:
            out.append(int(v))
        except ValueError:
            try:
                out.append(float(v))
            except ValueError:
                out.append(v)
    return out


def add_config_flags(p: argparse.ArgumentParser):
    g = p.add_argument_group("experiment config (overrides --config)")
    g.add_argument("--config", type=Path, help="JSON experiment config")
    g.add_argument("--dataset", help="digits | mnist[:dir] | csv:<path> | raw:<path>")
    g.add_argument("--variant", choices=["original", "qorc", "reservoir_only", "original_plus_pca"])
    g.add_argument("--photons", type=int)
    g.add_argument("--modes", type=int)
    g.add_argument("--input-modes", type=_int_list, help="comma-separated input mode indices")
    g.add_argument("--samples-per-image", type=int)
    g.add_argument("--indistinguishability", type=float)
    g.add_argument("--g2", type=float)
    g.add_argument("--transmission", type=float)
    g.add_argument("--epochs", type=int)
    g.add_argument("--learning-rate", type=float)
    g.add_argument("--batch-size", type=int)
    g.add_argument("--unitary-seed", type=int)
    g.add_argument("--sampling-seed", type=int)
    g.add_argument("--shuffle-seed", type=int)
    g.add_argument("--subset-seed", type=int)
    g.add_argument("--split-seed", type=int)
    g.add_argument("--input-state-seed", type=int)
    g.add_argument("--test-fraction", type=float)
    g.add_argument("--train-size", type=int)
    g.add_argument("--imbalance", choices=["balanced", "gaussian", "severe"])
    g.add_argument("--phase-span", type=float, help="phase range in radians, at most 2*pi")
    g.add_argument("--max-outcomes", type=int)
    g.add_argument("--workers", type=int)
    g.add_argument("--output-dir")


def build_config(args: argparse.Namespace) -> ex.ExperimentConfig:
    cfg = ex.ExperimentConfig.load(args.config) if args.config else ex.ExperimentConfig()
    top = {
        "dataset": args.dataset, "variant": args.variant, "photons": args.photons, "modes": args.modes,
        "input_modes": args.input_modes, "samples_per_image": args.samples_per_image,
        "test_fraction": args.test_fraction, "train_size": args.train_size, "imbalance": args.imbalance,
        "phase_span": args.phase_span, "max_outcomes": args.max_outcomes, "workers": args.workers, "output_dir": args.output_dir,
    }
    noise = {"indistinguishability": args.indistinguishability, "g2": args.g2, "transmission": args.transmission}
    clf = {"epochs": args.epochs, "learning_rate": args.learning_rate, "batch_size": args.batch_size}
    seeds = {"unitary": args.unitary_seed, "sampling": args.sampling_seed, "shuffle": args.shuffle_seed,
             "subset": args.subset_seed, "split": args.split_seed, "input_state": args.input_state_seed}

    def pick(d):
        return {k: v for k, v in d.items() if v is not None}

    try:
        cfg = replace(cfg, **pick(top))
        cfg = replace(cfg, noise=replace(cfg.noise, **pick(noise)), classifier=replace(cfg.classifier, **pick(clf)),
                      seeds=replace(cfg.seeds, **pick(seeds)))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if args.output_dir is None:
        cfg = replace(cfg, output_dir=ex.env_output_dir(cfg.output_dir))
    return cfg.validate()


def _print_json(obj):
    print(json.dumps(ex.sig6(obj), indent=2, default=str))


def _progress(done, total):
    log.info("sampled %d / %d images", done, total)


def cmd_sample(args) -> int:
    cfg = build_config(args)
    prep = ex.prepare(cfg)
    rows = ex.select_training_rows(cfg, prep.pool)
    path = Path(args.cache) if args.cache else ex.default_cache_path(cfg)
    cache = ex.fingerprints_for(prep, rows, path, _progress)
    _print_json({"cache": str(path), "rows": int(cache.counts.shape[0]), "patterns": cache.header.n_patterns,
                 "discarded_fraction": float(cache.discarded.sum()) / max(cache.discarded.size * cfg.samples_per_image, 1)})
    return EXIT_OK


def cmd_train(args) -> int:
    cfg = build_config(args)
    prep = ex.prepare(cfg)
    rows = ex.select_training_rows(cfg, prep.pool)
    cache = None
    if ex.needs_reservoir(cfg.variant):
        if args.cache:
            cache = read_cache(args.cache, require_complete=False)
            cache.check_compatible(ex.cache_header(cfg, prep.circuit, prep.phases_for(rows)))
            if not cache.complete:
                raise DataError(f"{args.cache}: cache is incomplete ({cache.counts.shape[0]} of {cache.header.n_images} rows)")
        else:
            cache = ex.fingerprints_for(prep, rows, ex.default_cache_path(cfg), _progress)
    report = ex.run_training(prep, rows, cache, track_epochs=args.track_epochs)
    out = Path(cfg.output_dir)
    report.write(out, f"train-{cfg.config_hash()}")
    _print_json({"config_hash": report.config_hash, "train_accuracy": report.train.accuracy,
                 "test_accuracy": report.test.accuracy, "test_macro_f1": report.test.macro_f1,
                 "runtime_per_epoch_s": report.runtime_per_epoch_s, "report": str(out)})
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = build_config(args)
    if args.axis is not None or args.values is not None:
        base = cfg.sweep or ex.SweepSpec()
        cfg = replace(cfg, sweep=replace(
            base,
            axis=args.axis or base.axis,
            values=args.values if args.values is not None else base.values,
            repeats=args.repeats or base.repeats,
        )).validate()
    elif args.repeats and cfg.sweep is not None:
        cfg = replace(cfg, sweep=replace(cfg.sweep, repeats=args.repeats))
    rows, errors = ex.sweep(cfg, progress=lambda r: log.info("%s", r))
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"sweep-{cfg.sweep.axis}-{cfg.config_hash()}.csv"
    ex.write_csv(path, rows)
    print(f"wrote {len(rows)} rows to {path}")
    for e in errors:
        print(f"run failed: {e}", file=sys.stderr)
    return EXIT_PARTIAL if errors else EXIT_OK


def cmd_compare(args) -> int:
    a = read_cache(args.cache_a)
    if args.exact_config:
        if args.cache_b:
            raise ConfigError("give either a second cache or --exact-config, not both")
        cfg = ex.ExperimentConfig.load(args.exact_config).validate()
        prep = ex.prepare(cfg)
        phases = prep.phases_for(ex.select_training_rows(cfg, prep.pool))
        a.check_compatible(ex.cache_header(cfg, prep.circuit, phases))
        result = ex.compare_to_exact(a, cfg, phases, args.pooled_ks)
    else:
        if not args.cache_b:
            raise ConfigError("compare needs a second cache or --exact-config")
        result = ex.compare_caches(a, read_cache(args.cache_b), args.pooled_ks)
    _print_json(result)
    return EXIT_OK


def cmd_repro(args) -> int:
    cfg = build_config(args)
    result = ex.reproducibility(cfg, args.trials, args.vary)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / f"repro-{args.vary}-{cfg.config_hash()}.json").write_text(json.dumps(result, indent=2))
    _print_json(result)
    return EXIT_OK


def cmd_inspect_cache(args) -> int:
    cache = read_cache(args.cache, require_complete=False)
    h = asdict(cache.header)
    h["digest"] = cache.header.digest.hex()
    h["rows_present"] = int(cache.counts.shape[0])
    h["complete"] = cache.complete
    h["n_patterns"] = cache.header.n_patterns
    if cache.counts.shape[0]:
        h["discarded_fraction"] = float(cache.discarded.sum()) / (cache.discarded.size * cache.header.samples_per_image)
        h["mean_counts_per_pattern"] = float(np.mean(cache.counts))
    _print_json(h)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qorc", description="Photonic reservoir fingerprints and linear readout.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="sample click-pattern fingerprints into a cache file")
    add_config_flags(p)
    p.add_argument("--cache", help="cache path (default: <output_dir>/fingerprints-<hash>.qorcftr)")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("train", help="train and evaluate one configuration")
    add_config_flags(p)
    p.add_argument("--cache", help="existing fingerprint cache to use")
    p.add_argument("--track-epochs", action="store_true", help="record per-epoch train/test accuracy")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("sweep", help="one run per value of a sweep axis")
    add_config_flags(p)
    p.add_argument("--axis", choices=ex.SWEEP_AXES)
    p.add_argument("--values", type=_value_list, help="comma-separated axis values")
    p.add_argument("--repeats", type=int)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("compare", help="distance metrics between two caches, or a cache and exact probabilities")
    p.add_argument("cache_a")
    p.add_argument("cache_b", nargs="?")
    p.add_argument("--exact-config", type=Path, help="config whose exact distributions the cache is compared to")
    p.add_argument("--pooled-ks", action="store_true", help="also run one KS test over all standardized entries")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("repro", help="rerun varying only the unitary or input-state seed")
    add_config_flags(p)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--vary", choices=["unitary", "input_state"], default="unitary")
    p.set_defaults(func=cmd_repro)

    p = sub.add_parser("inspect-cache", help="print a cache header and summary")
    p.add_argument("cache")
    p.set_defaults(func=cmd_inspect_cache)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DivergenceError, FitFailedError, BudgetExceededError, FloatingPointError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DataError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except QorcError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
