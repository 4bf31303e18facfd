"""Dataset ingestion, deterministic splits and subsets, class-imbalance generators."""

from __future__ import annotations

import gzip
import importlib.util
import math
import os
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InsufficientDataError, ParseError
from .rng import make_rng

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801
RAW_MAGIC = b"QORCDAT1"
RAW_VERSION = 1


class BadMagicError(ParseError):
    pass


class TruncatedFileError(ParseError):
    pass


class CountMismatchError(ParseError):
    pass


@dataclass
class LabeledDataset:
    images: np.ndarray  # (rows, features), float
    labels: np.ndarray  # (rows,), int
    n_classes: int
    name: str = ""
    image_shape: tuple = field(default=())

    def __post_init__(self):
        self.images = np.asarray(self.images)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.images.ndim != 2:
            raise ValueError(f"images must be a 2-D feature matrix, got shape {self.images.shape}")
        if self.images.shape[0] != self.labels.shape[0]:
            raise ValueError(f"{self.images.shape[0]} image rows but {self.labels.shape[0]} labels")
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= self.n_classes):
            raise ValueError(f"labels must lie in [0, {self.n_classes})")
        if not self.image_shape:
            self.image_shape = (self.images.shape[1],)

    def __len__(self):
        return self.labels.shape[0]

    def take(self, index, name=None) -> LabeledDataset:
        index = np.asarray(index, dtype=np.int64)
        return LabeledDataset(self.images[index], self.labels[index], self.n_classes, name or self.name, self.image_shape)

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.n_classes)


def _read_bytes(path) -> bytes:
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw[:2] == b"\x1f\x8b":
        raw = gzip.decompress(raw)
    return raw


def _idx_header(raw: bytes, magic: int, ndim: int, path) -> tuple:
    size = 4 + 4 * ndim
    if len(raw) < size:
        raise TruncatedFileError(f"{path}: header ends at byte {len(raw)}, expected {size} bytes")
    got = struct.unpack_from(">I", raw, 0)[0]
    if got != magic:
        raise BadMagicError(f"{path}: magic 0x{got:08x} at byte 0, expected 0x{magic:08x}")
    return struct.unpack_from(f">{ndim}I", raw, 4)


def load_idx(images_path, labels_path, n_classes: int = 10, name: str = "mnist") -> LabeledDataset:
    """Read an IDX image/label pair (optionally gzipped); pixels become byte / 255."""
    img_raw = _read_bytes(images_path)
    lab_raw = _read_bytes(labels_path)
    n_img, rows, cols = _idx_header(img_raw, IDX_IMAGES_MAGIC, 3, images_path)
    (n_lab,) = _idx_header(lab_raw, IDX_LABELS_MAGIC, 1, labels_path)
    if n_img != n_lab:
        raise CountMismatchError(f"{images_path} holds {n_img} images but {labels_path} holds {n_lab} labels")
    need = 16 + n_img * rows * cols
    if len(img_raw) < need:
        raise TruncatedFileError(f"{images_path}: data ends at byte offset {len(img_raw)}, expected {need}")
    if len(lab_raw) < 8 + n_lab:
        raise TruncatedFileError(f"{labels_path}: data ends at byte offset {len(lab_raw)}, expected {8 + n_lab}")
    pixels = np.frombuffer(img_raw, dtype=np.uint8, count=n_img * rows * cols, offset=16)
    labels = np.frombuffer(lab_raw, dtype=np.uint8, count=n_lab, offset=8).astype(np.int64)
    if labels.size and labels.max() >= n_classes:
        raise ParseError(f"{labels_path}: label {labels.max()} outside [0, {n_classes})")
    images = pixels.reshape(n_img, rows * cols).astype(np.float64) / 255.0
    return LabeledDataset(images, labels, n_classes, name, (rows, cols))


def write_idx(ds: LabeledDataset, images_path, labels_path):
    """Write pixels (assumed in [0, 1]) back to IDX bytes; used by tests and converters."""
    rows, cols = ds.image_shape if len(ds.image_shape) == 2 else (1, ds.images.shape[1])
    pixels = np.rint(np.clip(ds.images, 0, 1) * 255).astype(np.uint8)
    Path(images_path).write_bytes(struct.pack(">IIII", IDX_IMAGES_MAGIC, len(ds), rows, cols) + pixels.tobytes())
    Path(labels_path).write_bytes(struct.pack(">II", IDX_LABELS_MAGIC, len(ds)) + ds.labels.astype(np.uint8).tobytes())


def load_csv(path, n_classes: int | None = None, name: str | None = None, scale: float | None = None) -> LabeledDataset:
    """Comma-separated rows of feature values with the integer label last.

    Features are divided by ``scale`` (default: the largest feature value in the
    file, 16 for DIGITS) so they land in [0, 1].
    """
    text = _read_bytes(path).decode("utf-8")
    rows = []
    width = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        cells = line.split(",")
        if width is None:
            width = len(cells)
            if width < 2:
                raise ParseError(f"{path}:{lineno}: need at least one feature and a label")
        elif len(cells) != width:
            raise ParseError(f"{path}:{lineno}: {len(cells)} cells, expected {width} (ragged row)")
        try:
            rows.append([float(c) for c in cells])
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: non-numeric cell ({exc})") from None
    if not rows:
        raise ParseError(f"{path}: no data rows")
    table = np.array(rows)
    labels = table[:, -1]
    if np.any(labels != np.round(labels)) or labels.min() < 0:
        raise ParseError(f"{path}: labels must be non-negative integers")
    labels = labels.astype(np.int64)
    feats = table[:, :-1]
    top = float(feats.max()) if scale is None else float(scale)
    if top > 0:
        feats = feats / top
    n_classes = int(labels.max()) + 1 if n_classes is None else n_classes
    return LabeledDataset(feats, labels, n_classes, name or Path(path).stem)


def digits_path() -> Path:
    """DIGITS CSV: ``$QORC_DIGITS_PATH`` or the copy bundled with scikit-learn."""
    env = os.environ.get("QORC_DIGITS_PATH")
    if env:
        return Path(env)
    spec = importlib.util.find_spec("sklearn")
    if spec is None or spec.origin is None:
        raise FileNotFoundError("DIGITS data not found: set QORC_DIGITS_PATH or install scikit-learn")
    return Path(spec.origin).parent / "datasets" / "data" / "digits.csv.gz"


def load_digits() -> LabeledDataset:
    ds = load_csv(digits_path(), n_classes=10, name="digits", scale=16.0)
    ds.image_shape = (8, 8)
    return ds


def mnist_dir() -> Path:
    return Path(os.environ.get("QORC_MNIST_DIR", "data/mnist"))


def _find(directory: Path, stem: str) -> Path:
    for candidate in (stem, stem + ".gz", stem.replace("-idx", ".idx"), stem.replace("-idx", ".idx") + ".gz"):
        if (directory / candidate).exists():
            return directory / candidate
    raise FileNotFoundError(f"{stem}[.gz] not found in {directory}")


def load_mnist(directory=None) -> tuple[LabeledDataset, LabeledDataset]:
    """MNIST train/test splits from the four standard IDX files."""
    d = Path(directory) if directory else mnist_dir()
    train = load_idx(_find(d, "train-images-idx3-ubyte"), _find(d, "train-labels-idx1-ubyte"), name="mnist-train")
    test = load_idx(_find(d, "t10k-images-idx3-ubyte"), _find(d, "t10k-labels-idx1-ubyte"), name="mnist-test")
    return train, test


def write_raw(ds: LabeledDataset, path):
    """Little-endian container: magic, version, rows, ndim, dims, classes, f32 features, u16 labels."""
    dims = tuple(int(d) for d in ds.image_shape)
    if math.prod(dims) != ds.images.shape[1]:
        dims = (ds.images.shape[1],)
    header = RAW_MAGIC + struct.pack(f"<III{len(dims)}II", RAW_VERSION, len(ds), len(dims), *dims, ds.n_classes)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(ds.images, dtype="<f4").tobytes())
        fh.write(np.ascontiguousarray(ds.labels, dtype="<u2").tobytes())


def read_raw(path, name: str | None = None) -> LabeledDataset:
    raw = Path(path).read_bytes()
    if raw[:8] != RAW_MAGIC:
        raise BadMagicError(f"{path}: expected magic {RAW_MAGIC!r} at byte 0")
    if len(raw) < 20:
        raise TruncatedFileError(f"{path}: header ends at byte {len(raw)}")
    version, n_rows, ndim = struct.unpack_from("<III", raw, 8)
    if version != RAW_VERSION:
        raise ParseError(f"{path}: unsupported container version {version}")
    pos = 20
    if len(raw) < pos + 4 * ndim + 4:
        raise TruncatedFileError(f"{path}: header ends at byte {len(raw)}")
    dims = struct.unpack_from(f"<{ndim}I", raw, pos)
    pos += 4 * ndim
    (n_classes,) = struct.unpack_from("<I", raw, pos)
    pos += 4
    width = math.prod(dims)
    need = pos + n_rows * width * 4 + n_rows * 2
    if len(raw) < need:
        raise TruncatedFileError(f"{path}: data ends at byte offset {len(raw)}, expected {need}")
    feats = np.frombuffer(raw, dtype="<f4", count=n_rows * width, offset=pos).reshape(n_rows, width)
    labels = np.frombuffer(raw, dtype="<u2", count=n_rows, offset=pos + n_rows * width * 4)
    return LabeledDataset(feats.astype(np.float64), labels.astype(np.int64), n_classes, name or Path(path).stem, dims)


def train_test_split(ds: LabeledDataset, test_fraction: float, seed: int) -> tuple[LabeledDataset, LabeledDataset]:
    """Shuffled split; the training part gets ``floor(rows * (1 - test_fraction))`` rows."""
    n_train = int(math.floor(len(ds) * (1.0 - test_fraction) + 1e-9))
    order = make_rng(seed).permutation(len(ds))
    return ds.take(np.sort(order[:n_train]), ds.name + "-train"), ds.take(np.sort(order[n_train:]), ds.name + "-test")


def _pick(rng, pool: np.ndarray, k: int, label: int) -> np.ndarray:
    if k > pool.size:
        raise InsufficientDataError(f"class {label} needs {k} rows but only {pool.size} are available")
    return pool[rng.permutation(pool.size)[:k]]


def subset(ds: LabeledDataset, n: int, balanced: bool, seed: int) -> LabeledDataset:
    """Random ``n``-row subset, rows kept in their original order.

    With ``balanced`` every class gets ``n // C`` rows and the remainder goes to
    the lowest class indices.
    """
    if n > len(ds):
        raise InsufficientDataError(f"asked for {n} rows from a dataset of {len(ds)}")
    rng = make_rng(seed)
    if not balanced:
        return ds.take(np.sort(rng.permutation(len(ds))[:n]))
    quotas = np.full(ds.n_classes, n // ds.n_classes)
    quotas[: n % ds.n_classes] += 1
    picked = [_pick(rng, np.flatnonzero(ds.labels == c), int(q), c) for c, q in enumerate(quotas)]
    return ds.take(np.sort(np.concatenate(picked)))


GAUSSIAN_PERCENTAGES = (1.2, 3.5, 7.9, 13.8, 18.8, 20.0, 16.6, 10.7, 5.4, 2.1)
SEVERE_PERCENTAGES = (64.3, 9.7, 8.0, 6.4, 3.9, 3.2, 1.6, 1.3, 1.0, 0.6)


@dataclass(frozen=True)
class ImbalanceSpec:
    kind: str
    class_percentages: tuple
    shuffle_seed: int = 0

    def __post_init__(self):
        if self.kind not in ("balanced", "gaussian", "severe", "custom"):
            raise ValueError(f"unknown imbalance kind {self.kind!r}")
        pct = np.asarray(self.class_percentages, dtype=np.float64)
        if np.any(pct < 0) or abs(pct.sum() - 100.0) > 0.1:
            raise ValueError(f"class percentages must be non-negative and sum to 100, got {pct.sum():.3f}")

    @classmethod
    def preset(cls, kind: str, n_classes: int = 10, shuffle_seed: int = 0) -> ImbalanceSpec:
        if kind == "balanced":
            return cls(kind, tuple([100.0 / n_classes] * n_classes), shuffle_seed)
        table = {"gaussian": GAUSSIAN_PERCENTAGES, "severe": SEVERE_PERCENTAGES}
        if kind not in table:
            raise ValueError(f"no preset for {kind!r}")
        if n_classes != 10:
            raise ValueError(f"the {kind} preset is tabulated for 10 classes")
        return cls(kind, table[kind], shuffle_seed)

    def percentages(self) -> np.ndarray:
        """Per-class percentages; the severe kind is shuffled onto the classes by ``shuffle_seed``."""
        pct = np.asarray(self.class_percentages, dtype=np.float64)
        if self.kind == "severe":
            pct = pct[make_rng(self.shuffle_seed).permutation(pct.size)]
        return pct

    def class_counts(self, total: int) -> np.ndarray:
        return np.rint(total * self.percentages() / 100.0).astype(np.int64)


def apply_imbalance(ds: LabeledDataset, spec: ImbalanceSpec, total: int, seed: int) -> LabeledDataset:
    """Draw ``round(total * pct_k / 100)`` rows of class k without replacement."""
    counts = spec.class_counts(total)
    if counts.size != ds.n_classes:
        raise ValueError(f"spec has {counts.size} classes, dataset has {ds.n_classes}")
    rng = make_rng(seed)
    picked = [_pick(rng, np.flatnonzero(ds.labels == c), int(k), c) for c, k in enumerate(counts)]
    return ds.take(np.sort(np.concatenate(picked)), f"{ds.name}-{spec.kind}")
