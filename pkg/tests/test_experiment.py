import json
import math
from dataclasses import replace

import numpy as np
import pytest

from qorc import experiment as ex
from qorc.data import load_digits, train_test_split
from qorc.errors import CacheIncompatibleError, ConfigError, DataError
from qorc.learn import TrainConfig


def small_config(tmp_path, **kw):
    base = ex.ExperimentConfig(
        samples_per_image=300, classifier=TrainConfig(epochs=3), output_dir=str(tmp_path),
    )
    return replace(base, **kw)


@pytest.fixture(scope="module")
def digits_splits():
    return train_test_split(load_digits(), 0.2, 0)


def test_config_roundtrip_and_validation(tmp_path):
    cfg = small_config(tmp_path)
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(cfg.to_dict()))
    back = ex.ExperimentConfig.load(p)
    assert back == cfg and back.config_hash() == cfg.config_hash()
    with pytest.raises(ConfigError):
        ex.ExperimentConfig.from_dict({"bogus": 1})
    with pytest.raises(ConfigError):
        ex.ExperimentConfig.from_dict({"noise": {"indistinguishability": 2.0}})
    with pytest.raises(ConfigError):
        ex.ExperimentConfig.from_dict({"seeds": {"unitary": 1, "typo": 2}})
    with pytest.raises(ConfigError):
        replace(cfg, dataset="csv:/no/such/file.csv").validate()
    with pytest.raises(ConfigError):
        replace(cfg, variant="nope").validate()
    with pytest.raises(ConfigError):
        ex.ExperimentConfig.load(tmp_path / "missing.json")
    assert cfg.pca_components == cfg.modes


def test_sig6_formatting():
    assert ex.sig6(0.123456789) == 0.123457
    assert ex.sig6({"a": [1.0 / 3, 2]}) == {"a": [0.333333, 2]}


def test_fingerprints_deterministic_and_scheduling_free(tmp_path, digits_splits):
    cfg = small_config(tmp_path)
    prep = ex.prepare(cfg, digits_splits)
    rows = np.arange(len(prep.pool))
    a = ex.fingerprints_for(prep, rows, tmp_path / "a.qorcftr")
    b = ex.fingerprints_for(prep, rows, tmp_path / "b.qorcftr")
    assert a.counts.shape == (1797, 220)
    assert (tmp_path / "a.qorcftr").read_bytes() == (tmp_path / "b.qorcftr").read_bytes()
    # image i's histogram does not depend on which other images are sampled
    sub = np.array([3, 10, 500])
    c = ex.fingerprints_for(prep, sub, None)
    np.testing.assert_array_equal(c.counts[:3], a.counts[sub])
    np.testing.assert_array_equal(c.counts[3:], a.counts[len(prep.pool):])
    assert np.all(a.counts.sum(axis=1) + a.discarded == cfg.samples_per_image)


def test_parallel_workers_match_serial(tmp_path, digits_splits):
    cfg = small_config(tmp_path)
    prep = ex.prepare(cfg, digits_splits)
    rows = np.arange(40)
    serial = ex.fingerprints_for(prep, rows, None)
    par = ex.fingerprints_for(replace(prep, cfg=replace(cfg, workers=2)), rows, None)
    np.testing.assert_array_equal(serial.counts, par.counts)


def test_sampling_resumes_partial_cache(tmp_path, digits_splits):
    cfg = small_config(tmp_path)
    prep = ex.prepare(cfg, digits_splits)
    rows = np.arange(30)
    full = tmp_path / "full.qorcftr"
    ex.fingerprints_for(prep, rows, full)
    part = tmp_path / "part.qorcftr"
    header_size = ex.cache_header(cfg, prep.circuit, prep.phases_for(rows)).size
    part.write_bytes(full.read_bytes()[: header_size + 7 * 221 * 4 + 5])
    ex.fingerprints_for(prep, rows, part)
    assert part.read_bytes() == full.read_bytes()


def test_cache_mismatch_is_detected(tmp_path, digits_splits):
    cfg = small_config(tmp_path)
    prep = ex.prepare(cfg, digits_splits)
    rows = np.arange(20)
    p = tmp_path / "c.qorcftr"
    ex.fingerprints_for(prep, rows, p)
    other = ex.prepare(replace(cfg, seeds=replace(cfg.seeds, unitary=5)), digits_splits)
    with pytest.raises(CacheIncompatibleError) as info:
        ex.fingerprints_for(other, rows, p)
    assert "unitary_seed" in info.value.differences


def test_training_report_and_empty_cache(tmp_path, digits_splits):
    cfg = small_config(tmp_path, variant="qorc")
    prep = ex.prepare(cfg, digits_splits)
    rows = np.arange(len(prep.pool))
    cache = ex.fingerprints_for(prep, rows, None)
    rep = ex.run_training(prep, rows, cache, track_epochs=True)
    assert rep.n_features == 64 + 220
    assert len(rep.traces["test_accuracy"]) == 3
    rep.write(tmp_path, "r")
    loaded = json.loads((tmp_path / "r.json").read_text())
    assert loaded["test"]["accuracy"] == ex.sig6(rep.test.accuracy)
    assert "test_accuracy" in (tmp_path / "r.csv").read_text().splitlines()[0]
    empty = replace(cache, counts=cache.counts[:0], discarded=cache.discarded[:0])
    with pytest.raises(DataError):
        ex.run_training(prep, rows, empty)
    with pytest.raises(DataError):
        ex.run_training(prep, rows, None)


def test_variants_without_reservoir_skip_sampling(tmp_path, digits_splits):
    for variant, width in (("original", 64), ("original_plus_pca", 64 + 12)):
        rep = ex.run_pipeline(small_config(tmp_path, variant=variant), None, digits_splits)
        assert rep.n_features == width


def test_compare_cache_with_itself_and_oracle_band(tmp_path):
    from oracles import multinomial_tvd_band

    from qorc.cache import FeatureCache
    from qorc.photonics import exact_distribution, sample_histogram

    cfg = small_config(tmp_path)
    circuit = ex.build_circuit(cfg)
    phases = np.linspace(0.1, 1.4, 12)
    dist = exact_distribution(circuit, phases)
    clicks = dist.clicks()
    n_img, n_s = 40, 30000
    caches = []
    for seed in (1, 2):
        hs = [sample_histogram(dist, n_s, seed, index=i) for i in range(n_img)]
        header = ex.cache_header(replace(cfg, samples_per_image=n_s), circuit, np.tile(phases, (n_img, 1)))
        caches.append(FeatureCache(header, np.array([h.counts for h in hs], dtype=np.uint32),
                                   np.array([h.discarded_collisions for h in hs], dtype=np.uint32)))
    same = ex.compare_caches(caches[0], caches[0], pooled_ks=True)
    assert same["tvd_mean"] == 0 and same["ks_mean"] == 0 and same["ks_p_value_mean"] == 1
    diff = ex.compare_caches(caches[0], caches[1])
    full = np.append(clicks.probabilities, clicks.collision_mass)
    band = multinomial_tvd_band(full[:-1] / full[:-1].sum(), int(n_s * (1 - clicks.collision_mass)), 500, seed=9)
    assert abs(diff["tvd_mean"] - band.mean()) < 4 * band.std() / math.sqrt(n_img)
    exact = ex.compare_count_matrices(caches[0].counts.astype(float), np.tile(clicks.probabilities, (n_img, 1)))
    assert exact["tvd_mean"] < diff["tvd_mean"]


def test_compare_shape_mismatch(tmp_path, digits_splits):
    cfg = small_config(tmp_path)
    prep = ex.prepare(cfg, digits_splits)
    a = ex.fingerprints_for(prep, np.arange(3), None)
    b = ex.fingerprints_for(prep, np.arange(4), None)
    with pytest.raises(DataError):
        ex.compare_caches(a, b)


def test_sweeps(tmp_path, digits_splits):
    cfg = small_config(tmp_path, sweep=ex.SweepSpec("train_size", [100, 200], repeats=2))
    rows, errors = ex.sweep(cfg)
    assert not errors
    per_run = [r for r in rows if r["repeat"] != "mean+-std"]
    assert len(per_run) == 4 and all("config_hash" in r for r in rows)
    assert {r["n_train"] for r in per_run} == {100, 200}
    assert len([r for r in rows if r["repeat"] == "mean+-std"]) == 2

    cfg = small_config(tmp_path, sweep=ex.SweepSpec("epochs", [1, 2, 3]))
    rows, errors = ex.sweep(cfg)
    assert [r["value"] for r in rows] == [1, 2, 3] and not errors

    cfg = small_config(tmp_path, sweep=ex.SweepSpec("indistinguishability", [0.0, 1.0]))
    rows, errors = ex.sweep(cfg)
    assert len(rows) == 2 and not errors

    # a failing run is recorded and the sweep continues
    cfg = small_config(tmp_path, sweep=ex.SweepSpec("train_size", [100, 10**6]))
    rows, errors = ex.sweep(cfg)
    assert len(errors) == 1 and any("error" in r for r in rows)


@pytest.mark.filterwarnings(r"ignore:M=20 <= N\^2")
def test_photon_number_sweep_column(tmp_path):
    from qorc.data import subset, write_raw

    small = subset(load_digits(), 40, balanced=True, seed=0)
    raw = tmp_path / "small.qorcdat"
    write_raw(small, raw)
    cfg = small_config(tmp_path, dataset=f"raw:{raw}", modes=20, samples_per_image=50,
                       sweep=ex.SweepSpec("photon_number", [1, 2, 3, 4, 5]))
    rows, errors = ex.sweep(cfg.validate())
    assert not errors
    assert [r["added_inputs"] for r in rows] == [20, 190, 1140, 4845, 15504]
    assert [r["n_features"] for r in rows] == [64 + c for c in (20, 190, 1140, 4845, 15504)]


def test_reproducibility_argument_checks(tmp_path, digits_splits):
    cfg = small_config(tmp_path)
    with pytest.raises(ConfigError):
        ex.reproducibility(cfg, 1, "unitary", digits_splits)
    with pytest.raises(ConfigError):
        ex.reproducibility(cfg, 2, "phase", digits_splits)
    out = ex.reproducibility(cfg, 2, "input_state", digits_splits)
    assert out["trials"] == 2 and len(out["runs"]) == 2


def test_input_state_seed_only_changes_input_modes(tmp_path):
    cfg = small_config(tmp_path)
    a = ex.build_circuit(replace(cfg, seeds=replace(cfg.seeds, input_state=1)))
    b = ex.build_circuit(replace(cfg, seeds=replace(cfg.seeds, input_state=2)))
    np.testing.assert_array_equal(a.u_res, b.u_res)
    assert a.input_modes != b.input_modes
