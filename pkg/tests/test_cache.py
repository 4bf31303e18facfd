import math

import numpy as np
import pytest

from qorc.cache import CacheHeader, CacheWriter, FeatureCache, phase_digest, read_cache, write_cache
from qorc.errors import CacheIncompatibleError, ParseError


def header(**kw):
    base = dict(
        modes=12, photons=3, n_images=5, samples_per_image=100, indistinguishability=1.0, g2=0.0,
        transmission=1.0, unitary_seed=1, sampling_seed=2, distinct_pre=False, input_modes=(0, 4, 8),
        digest=phase_digest(np.zeros((5, 12))),
    )
    base.update(kw)
    return CacheHeader(**base)


def rows(h, seed=0):
    rng = np.random.default_rng(seed)
    counts = rng.integers(0, 5, (h.n_images, h.n_patterns)).astype(np.uint32)
    return counts, (h.samples_per_image - counts.sum(axis=1) % 50).astype(np.uint32)


def test_roundtrip_is_bit_identical(tmp_path):
    h = header()
    counts, disc = rows(h)
    p = tmp_path / "c.qorcftr"
    write_cache(p, h, counts, disc)
    raw = p.read_bytes()
    assert raw[:8] == b"QORCFTR1"
    assert len(raw) == h.size + h.n_images * 4 * (math.comb(12, 3) + 1)
    back = read_cache(p)
    assert back.header == h and back.complete
    np.testing.assert_array_equal(back.counts, counts)
    np.testing.assert_array_equal(back.discarded, disc)
    q = tmp_path / "d.qorcftr"
    write_cache(q, back.header, back.counts, back.discarded)
    assert q.read_bytes() == raw


def test_header_arithmetic_checked(tmp_path):
    h = header()
    counts, disc = rows(h)
    p = tmp_path / "c.qorcftr"
    write_cache(p, h, counts, disc)
    p.write_bytes(p.read_bytes()[:-4])
    with pytest.raises(ParseError):
        read_cache(p)
    partial = read_cache(p, require_complete=False)
    assert partial.counts.shape[0] == 4 and not partial.complete
    p.write_bytes(b"QORCXXXX" + bytes(200))
    with pytest.raises(ParseError):
        read_cache(p)
    with pytest.raises(ValueError):
        write_cache(p, h, counts[:2], disc[:2])


@pytest.mark.parametrize(
    "field,value",
    [("modes", 20), ("photons", 2), ("indistinguishability", 0.5), ("g2", 0.02), ("transmission", 0.9),
     ("unitary_seed", 7), ("sampling_seed", 3), ("samples_per_image", 30000), ("distinct_pre", True),
     ("input_modes", (1, 2, 3)), ("digest", phase_digest(np.ones((5, 12)))), ("n_images", 6)],
)
def test_incompatibility_lists_fields(field, value):
    h = header()
    cache = FeatureCache(h, *rows(h))
    with pytest.raises(CacheIncompatibleError) as info:
        cache.check_compatible(header(**{field: value}))
    assert field in info.value.differences


def test_writer_resumes_partial_file(tmp_path):
    h = header()
    counts, disc = rows(h)
    p = tmp_path / "c.qorcftr"
    with CacheWriter(p, h) as w:
        for r in range(3):
            w.append(counts[r], disc[r])
    # simulate a crash in the middle of row 4
    with open(p, "ab") as fh:
        fh.write(b"\x01\x02\x03")
    w = CacheWriter(p, h)
    assert w.done == 3
    for r in range(3, 5):
        w.append(counts[r], disc[r])
    w.close()
    ref = tmp_path / "ref.qorcftr"
    write_cache(ref, h, counts, disc)
    assert p.read_bytes() == ref.read_bytes()
    with pytest.raises(CacheIncompatibleError):
        CacheWriter(p, header(unitary_seed=99))
