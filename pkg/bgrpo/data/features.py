"""
Feature Files
==============

Pre-extracted, pooled utterance features. The encoder that produced them is
frozen and out of our hands; we only ever see one vector per utterance.

File format (text, line-oriented)::

    # dim=<D> classes=<N> name=<string>
    <id>\t<label or ->\t<v1> <v2> ... <vD>

Teacher prediction format::

    # classes=<N>
    <id>\t<p1> ... <pN>
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np
from numpy.typing import NDArray
from sklearn.model_selection import train_test_split

from bgrpo.errors import DimensionError, FeatureFormatError, LabelError, TeacherCoverageError, TeacherFormatError

logger = logging.getLogger(__name__)

DEFAULT_NUM_CLASSES = 6
EMOTIONS = ("neutral", "angry", "surprise", "sad", "happy", "fear")

# Teacher rows within this distance of unit mass are renormalized, others rejected.
TEACHER_SUM_TOLERANCE = 1e-6


# ── Domain types ─────────────────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class UtteranceSample:
    """One input q_i."""
    id: str
    features: NDArray[np.float64]
    label: int | None = None
    corpus: str = ""


@dataclass(eq=False)
class Dataset:
    """An ordered collection of samples sharing one feature dimensionality."""

    samples: list[UtteranceSample]
    dim: int
    num_classes: int = DEFAULT_NUM_CLASSES
    name: str = ""
    _matrix: NDArray[np.float64] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for s in self.samples:
            if s.id in seen:
                raise ValueError(f"Duplicate sample id {s.id!r} in dataset {self.name!r}")
            seen.add(s.id)
            if s.features.shape != (self.dim,):
                raise DimensionError(
                    f"Sample {s.id!r} has {s.features.shape[0]} features, dataset declares {self.dim}"
                )
            if s.label is not None and not 0 <= s.label < self.num_classes:
                raise LabelError(f"Sample {s.id!r} label {s.label} outside 0..{self.num_classes - 1}")
        if self.samples:
            self._matrix = np.stack([s.features for s in self.samples]).astype(np.float64)
        else:
            self._matrix = np.zeros((0, self.dim), dtype=np.float64)
        self._matrix.setflags(write=False)

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self) -> Iterator[UtteranceSample]:
        return iter(self.samples)

    @property
    def features(self) -> NDArray[np.float64]:
        """Read-only (n, D) feature matrix in sample order."""
        return self._matrix

    @property
    def ids(self) -> list[str]:
        return [s.id for s in self.samples]

    @property
    def is_labeled(self) -> bool:
        return all(s.label is not None for s in self.samples)

    def labels(self) -> NDArray[np.int64]:
        """Gold labels as an array. Raises LabelError if any are missing."""
        missing = [s.id for s in self.samples if s.label is None]
        if missing:
            raise LabelError(
                f"Dataset {self.name!r} has {len(missing)} unlabeled sample(s), e.g. {missing[0]!r}"
            )
        return np.array([s.label for s in self.samples], dtype=np.int64)

    def subset(self, indices: Sequence[int] | NDArray[np.int64], name: str | None = None) -> Dataset:
        return Dataset(
            samples=[self.samples[int(i)] for i in indices],
            dim=self.dim,
            num_classes=self.num_classes,
            name=self.name if name is None else name,
        )

    def without_labels(self) -> Dataset:
        """Label-masked view. The B-GRPO stage only ever receives this."""
        return Dataset(
            samples=[replace(s, label=None) for s in self.samples],
            dim=self.dim,
            num_classes=self.num_classes,
            name=self.name,
        )

    def concat(self, other: Dataset, name: str | None = None) -> Dataset:
        if other.dim != self.dim or other.num_classes != self.num_classes:
            raise ValueError(f"Cannot concatenate {self.name!r} and {other.name!r}: shapes differ")
        return Dataset(
            samples=self.samples + other.samples,
            dim=self.dim,
            num_classes=self.num_classes,
            name=name or self.name,
        )


class TeacherPredictionTable:
    """Map from sample id to the teacher's distribution p_t(n|q_i)."""

    def __init__(self, rows: dict[str, NDArray[np.float64]], num_classes: int):
        self.num_classes = num_classes
        self._rows = rows

    def __len__(self) -> int:
        return len(self._rows)

    def __contains__(self, sample_id: str) -> bool:
        return sample_id in self._rows

    def __getitem__(self, sample_id: str) -> NDArray[np.float64]:
        try:
            return self._rows[sample_id]
        except KeyError:
            raise TeacherCoverageError(f"No teacher prediction for sample {sample_id!r}") from None

    def lookup(self, ids: Sequence[str]) -> NDArray[np.float64]:
        """Stack the distributions for ``ids`` into an (len(ids), N) array."""
        if not ids:
            return np.zeros((0, self.num_classes), dtype=np.float64)
        return np.stack([self[i] for i in ids])

    def items(self):
        return self._rows.items()


# ── Parsing ──────────────────────────────────────────────────────────────

def _read_lines(path: Path, error_cls) -> list[str]:
    lines: list[str] = []
    for lineno, raw in enumerate(path.read_bytes().splitlines(), start=1):
        try:
            lines.append(raw.decode("utf-8"))
        except UnicodeDecodeError as e:
            raise error_cls(path, lineno, f"not valid UTF-8 at byte {e.start}") from None
    return lines


def _parse_header(line: str, path: Path, required: tuple[str, ...], error_cls) -> dict[str, str]:
    if not line.startswith("#"):
        raise error_cls(path, 1, "missing header line starting with '#'")
    fields: dict[str, str] = {}
    for token in line[1:].split():
        if "=" not in token:
            raise error_cls(path, 1, f"malformed header token {token!r}")
        key, value = token.split("=", 1)
        fields[key] = value
    for key in required:
        if key not in fields:
            raise error_cls(path, 1, f"header missing '{key}='")
    return fields


def _parse_positive_int(value: str, key: str, path: Path, error_cls) -> int:
    try:
        n = int(value)
    except ValueError:
        raise error_cls(path, 1, f"header {key}={value!r} is not an integer") from None
    if n < 1:
        raise error_cls(path, 1, f"header {key} must be >= 1, got {n}")
    return n


def _parse_floats(text: str, width: int, path: Path, lineno: int, error_cls) -> NDArray[np.float64]:
    parts = text.split()
    if len(parts) != width:
        raise error_cls(path, lineno, f"expected {width} values, found {len(parts)}")
    try:
        values = np.array([float(p) for p in parts], dtype=np.float64)
    except ValueError as e:
        raise error_cls(path, lineno, f"bad number: {e}") from None
    if not np.all(np.isfinite(values)):
        raise error_cls(path, lineno, "non-finite value")
    return values


def load_feature_file(path: str | Path) -> Dataset:
    """Parse a feature file into a Dataset.

    Every failure raises FeatureFormatError naming the offending line.
    """
    path = Path(path)
    lines = _read_lines(path, FeatureFormatError)
    if not lines:
        raise FeatureFormatError(path, 1, "empty file")

    header = _parse_header(lines[0], path, ("dim",), FeatureFormatError)
    dim = _parse_positive_int(header["dim"], "dim", path, FeatureFormatError)
    num_classes = _parse_positive_int(
        header.get("classes", str(DEFAULT_NUM_CLASSES)), "classes", path, FeatureFormatError
    )
    name = header.get("name", path.stem)

    samples: list[UtteranceSample] = []
    seen: set[str] = set()
    for lineno, raw in enumerate(lines[1:], start=2):
        if not raw.strip() or raw.startswith("#"):
            continue
        cols = raw.split("\t")
        if len(cols) != 3:
            raise FeatureFormatError(path, lineno, f"expected 3 tab-separated columns, found {len(cols)}")
        sample_id, label_text, values_text = cols
        sample_id = sample_id.strip()
        if not sample_id:
            raise FeatureFormatError(path, lineno, "empty sample id")
        if sample_id in seen:
            raise FeatureFormatError(path, lineno, f"duplicate sample id {sample_id!r}")
        seen.add(sample_id)

        label_text = label_text.strip()
        label: int | None
        if label_text == "-":
            label = None
        else:
            try:
                label = int(label_text)
            except ValueError:
                raise FeatureFormatError(path, lineno, f"bad label {label_text!r}") from None
            if not 0 <= label < num_classes:
                raise FeatureFormatError(
                    path, lineno, f"label {label} outside 0..{num_classes - 1}"
                )

        features = _parse_floats(values_text, dim, path, lineno, FeatureFormatError)
        samples.append(UtteranceSample(id=sample_id, features=features, label=label, corpus=name))

    logger.info("Loaded %d samples (D=%d, N=%d) from %s", len(samples), dim, num_classes, path)
    return Dataset(samples=samples, dim=dim, num_classes=num_classes, name=name)


def write_feature_file(dataset: Dataset, path: str | Path) -> Path:
    """Write a dataset in the feature file format. Floats round-trip exactly."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# dim={dataset.dim} classes={dataset.num_classes} name={dataset.name or path.stem}"]
    for s in dataset.samples:
        label = "-" if s.label is None else str(s.label)
        lines.append(f"{s.id}\t{label}\t{' '.join(repr(float(v)) for v in s.features)}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def load_teacher_predictions(path: str | Path) -> TeacherPredictionTable:
    """Parse a teacher prediction file.

    Rows within TEACHER_SUM_TOLERANCE of unit mass are renormalized; anything
    further off, or with a negative entry, is rejected with the row id.
    """
    path = Path(path)
    lines = _read_lines(path, TeacherFormatError)
    if not lines:
        raise TeacherFormatError(path, 1, "empty file")
    header = _parse_header(lines[0], path, ("classes",), TeacherFormatError)
    num_classes = _parse_positive_int(header["classes"], "classes", path, TeacherFormatError)

    rows: dict[str, NDArray[np.float64]] = {}
    for lineno, raw in enumerate(lines[1:], start=2):
        if not raw.strip() or raw.startswith("#"):
            continue
        cols = raw.split("\t")
        if len(cols) != 2:
            raise TeacherFormatError(path, lineno, f"expected 2 tab-separated columns, found {len(cols)}")
        sample_id = cols[0].strip()
        if sample_id in rows:
            raise TeacherFormatError(path, lineno, f"duplicate sample id {sample_id!r}")
        probs = _parse_floats(cols[1], num_classes, path, lineno, TeacherFormatError)
        if np.any(probs < 0):
            raise TeacherFormatError(path, lineno, f"row {sample_id!r} has a negative probability")
        total = float(probs.sum())
        if abs(total - 1.0) > TEACHER_SUM_TOLERANCE:
            raise TeacherFormatError(
                path, lineno, f"row {sample_id!r} sums to {total!r}, not 1"
            )
        rows[sample_id] = probs / total

    logger.info("Loaded %d teacher predictions (N=%d) from %s", len(rows), num_classes, path)
    return TeacherPredictionTable(rows, num_classes)


def write_teacher_predictions(
    ids: Sequence[str], probs: NDArray[np.float64], path: str | Path
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    probs = np.asarray(probs, dtype=np.float64)
    lines = [f"# classes={probs.shape[1]}"]
    for sample_id, row in zip(ids, probs):
        lines.append(f"{sample_id}\t{' '.join(repr(float(p)) for p in row)}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


# ── Splitting and batching ───────────────────────────────────────────────

def split_half(dataset: Dataset, fraction: float = 0.5, seed: int = 0) -> tuple[Dataset, Dataset]:
    """Deterministic two-way split, stratified by label when every sample has one.

    The first part gets round(fraction * n) samples. Both parts keep the
    original sample order.
    """
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"split fraction must be in (0, 1), got {fraction}")
    n = len(dataset)
    if n == 0:
        raise ValueError(f"Cannot split empty dataset {dataset.name!r}")

    n_first = int(round(fraction * n))
    indices = np.arange(n)

    if 0 < n_first < n and _can_stratify(dataset, n_first):
        first, _ = train_test_split(
            indices,
            train_size=n_first,
            stratify=dataset.labels(),
            random_state=seed,
            shuffle=True,
        )
    else:
        rng = np.random.default_rng(seed)
        first = rng.permutation(n)[:n_first]

    mask = np.zeros(n, dtype=bool)
    mask[first] = True
    first_idx = np.flatnonzero(mask)
    second_idx = np.flatnonzero(~mask)
    logger.debug("Split %s into %d/%d (seed=%d)", dataset.name, len(first_idx), len(second_idx), seed)
    return (
        dataset.subset(first_idx, name=f"{dataset.name}.a"),
        dataset.subset(second_idx, name=f"{dataset.name}.b"),
    )


def _can_stratify(dataset: Dataset, n_first: int) -> bool:
    if not dataset.is_labeled:
        return False
    counts = np.bincount(dataset.labels())
    counts = counts[counts > 0]
    n = len(dataset)
    # stratified shuffling needs two members per class and room for every class on both sides
    return bool(counts.min() >= 2 and len(counts) <= min(n_first, n - n_first))


def epoch_rng(seed: int, epoch: int, *salt: int) -> np.random.Generator:
    """Generator seeded from (seed, epoch, *salt)."""
    return np.random.default_rng([seed, epoch, *salt])


def make_batches(dataset: Dataset | int, batch_size: int, seed: int, epoch: int) -> list[NDArray[np.int64]]:
    """Shuffle indices for one epoch and cut them into batches.

    A trailing remainder of two or more is kept; a singleton is dropped since
    one sample has no group statistics.
    """
    if batch_size < 2:
        raise ValueError(f"batch size must be >= 2, got {batch_size}")
    n = dataset if isinstance(dataset, int) else len(dataset)
    order = epoch_rng(seed, epoch).permutation(n)
    batches = [order[i:i + batch_size] for i in range(0, n, batch_size)]
    if batches and len(batches[-1]) < 2:
        batches.pop()
    return batches


def class_counts(dataset: Dataset) -> NDArray[np.int64]:
    return np.bincount(dataset.labels(), minlength=dataset.num_classes)

