"""Dataset split construction, nested subset bookkeeping, verification.

Splits are sets of sample ids per role (train/validation/test).  The test
role is label-disjoint from the rest: no label string of a test sample
appears in train or validation.  Subset k (k in {0, 25, 50, 75}) of a full
split takes prefixes of one seeded permutation of the full train and
validation lists, so subsets nest: 0 within 25 within 50 within 75 within
100.  Subset sizes use exact round-half-to-even of k% of the full size;
subset 0 is pinned to an explicit sample count (the size of the real
dataset it mirrors) and its validation share scales by the same ratio.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

from .errors import SplitError
from .prng import derive_seed, permutation

ROLES = ("train", "validation", "test")
SUBSET_IDS = (0, 25, 50, 75, 100)
SPLIT_HEADER = "platesynth-split 1"

_TRAIN_TAG = 0x545241
_VALIDATION_TAG = 0x56414C
_TEST_TAG = 0x544553


@dataclass(frozen=True)
class DatasetSplit:
    """Sample id membership for one data type and subset."""

    data_type: str
    subset_id: int | None
    train: tuple[str, ...]
    validation: tuple[str, ...]
    test: tuple[str, ...]
    seed: int

    def __post_init__(self) -> None:
        if self.subset_id is not None and self.subset_id not in SUBSET_IDS:
            raise SplitError(f"subset_id must be one of {SUBSET_IDS} or None")
        for role in ROLES:
            ids = getattr(self, role)
            if len(set(ids)) != len(ids):
                raise SplitError(f"{role} members contain duplicate ids")

    @property
    def members(self) -> dict[str, tuple[str, ...]]:
        return {role: getattr(self, role) for role in ROLES}


def round_half_even_ratio(numerator: int, denominator: int) -> int:
    """Exact integer round-half-to-even of numerator/denominator."""
    if denominator <= 0:
        raise SplitError(f"denominator must be positive, got {denominator}")
    q, r = divmod(numerator, denominator)
    double = 2 * r
    if double < denominator:
        return q
    if double > denominator:
        return q + 1
    return q if q % 2 == 0 else q + 1


def make_split(
    samples: Mapping[str, str],
    data_type: str,
    seed: int,
    test_fraction: float = 0.1,
    validation_fraction: float = 0.1,
) -> DatasetSplit:
    """Partition samples (id -> label) into a label-disjoint full split.

    Whole label groups go to test until the test fraction is reached, so
    no test label leaks into train or validation; the remainder splits
    into train and validation by sample count.
    """
    if not samples:
        raise SplitError("cannot split an empty sample set")
    if not (0.0 < test_fraction < 1.0 and 0.0 < validation_fraction < 1.0):
        raise SplitError("fractions must lie strictly between 0 and 1")
    if test_fraction + validation_fraction >= 1.0:
        raise SplitError("test and validation fractions leave no training data")

    by_label: dict[str, list[str]] = {}
    for sample_id in sorted(samples):
        by_label.setdefault(samples[sample_id], []).append(sample_id)

    labels = sorted(by_label)
    label_order = permutation(derive_seed(seed, _TEST_TAG), len(labels))
    target_test = round(test_fraction * len(samples))
    test: list[str] = []
    test_labels = set()
    for idx in label_order:
        if len(test) >= target_test:
            break
        label = labels[int(idx)]
        test_labels.add(label)
        test.extend(by_label[label])

    rest = sorted(sid for sid, label in samples.items() if label not in test_labels)
    if not rest:
        raise SplitError("test fraction consumed every sample")
    rest_order = permutation(derive_seed(seed, _VALIDATION_TAG), len(rest))
    n_val = round(validation_fraction * len(samples))
    n_val = min(n_val, len(rest) - 1)
    shuffled = [rest[int(i)] for i in rest_order]
    validation = shuffled[:n_val]
    train = shuffled[n_val:]

    return DatasetSplit(
        data_type=data_type,
        subset_id=100,
        train=tuple(sorted(train)),
        validation=tuple(sorted(validation)),
        test=tuple(sorted(test)),
        seed=seed,
    )


def build_subsets(
    full_split: DatasetSplit,
    fractions: tuple[int, ...] = (25, 50, 75),
    pinned_size_for_0: int | None = None,
    seed: int | None = None,
) -> dict[int, DatasetSplit]:
    """Nested subsets of a full split, keyed by subset id.

    All subsets share the full split's test set.  Train and validation
    memberships are prefixes of one permutation each, so smaller subsets
    are contained in larger ones (subset 0 inside subset 25).
    """
    for fraction in fractions:
        if fraction not in (25, 50, 75):
            raise SplitError(f"unsupported fraction {fraction}")
    seed = full_split.seed if seed is None else seed
    n_train = len(full_split.train)
    n_val = len(full_split.validation)
    if pinned_size_for_0 is not None and pinned_size_for_0 > n_train:
        raise SplitError(
            f"pinned subset-0 size {pinned_size_for_0} exceeds full train size {n_train}"
        )

    train_order = permutation(derive_seed(seed, _TRAIN_TAG), n_train)
    val_order = permutation(derive_seed(seed, _VALIDATION_TAG), n_val)
    train_shuffled = [full_split.train[int(i)] for i in train_order]
    val_shuffled = [full_split.validation[int(i)] for i in val_order]

    def subset(subset_id: int, train_size: int, val_size: int) -> DatasetSplit:
        return DatasetSplit(
            data_type=full_split.data_type,
            subset_id=subset_id,
            train=tuple(sorted(train_shuffled[:train_size])),
            validation=tuple(sorted(val_shuffled[:val_size])),
            test=full_split.test,
            seed=seed,
        )

    subsets: dict[int, DatasetSplit] = {100: full_split}
    for fraction in sorted(fractions):
        train_size = round_half_even_ratio(fraction * n_train, 100)
        val_size = round_half_even_ratio(fraction * n_val, 100)
        subsets[fraction] = subset(fraction, train_size, val_size)
    if pinned_size_for_0 is not None:
        val_size = round_half_even_ratio(pinned_size_for_0 * n_val, n_train)
        subsets[0] = subset(0, pinned_size_for_0, val_size)
    return subsets


def verify_split(split: DatasetSplit, annotations: Mapping[str, str]) -> tuple[bool, list[str]]:
    """Check all membership invariants against a sample-id -> label map."""
    violations: list[str] = []
    seen: dict[str, str] = {}
    for role in ROLES:
        for sample_id in getattr(split, role):
            if sample_id in seen and seen[sample_id] != role:
                violations.append(
                    f"sample {sample_id} appears in both {seen[sample_id]} and {role}"
                )
            seen[sample_id] = role
            if sample_id not in annotations:
                violations.append(f"sample {sample_id} ({role}) has no annotation")

    train_val_labels = {
        annotations[sid]
        for role in ("train", "validation")
        for sid in getattr(split, role)
        if sid in annotations
    }
    for sample_id in split.test:
        label = annotations.get(sample_id)
        if label is not None and label in train_val_labels:
            violations.append(
                f"test sample {sample_id} label {label!r} also appears in train/validation"
            )
    return (not violations, violations)


def verify_nesting(subsets: Mapping[int, DatasetSplit]) -> tuple[bool, list[str]]:
    """Check that train/validation members grow monotonically with subset id."""
    violations: list[str] = []
    ordered = sorted(subsets)
    for smaller, larger in zip(ordered[:-1], ordered[1:]):
        for role in ("train", "validation"):
            small = set(getattr(subsets[smaller], role))
            large = set(getattr(subsets[larger], role))
            if not small <= large:
                violations.append(
                    f"subset {smaller} {role} is not contained in subset {larger}"
                )
        if subsets[smaller].test != subsets[larger].test:
            violations.append(
                f"subset {smaller} and {larger} disagree on the test set"
            )
    return (not violations, violations)


def format_ratio(part: int, whole: int) -> str:
    """Percentage with one decimal, as quoted in subset-size summaries."""
    if whole <= 0:
        raise SplitError(f"whole must be positive, got {whole}")
    return f"{part / whole * 100:.1f}%"


def _role_path(directory: Path, role: str) -> Path:
    return directory / f"{role}.txt"


def write_split(split: DatasetSplit, directory) -> None:
    """Write one membership file per role, each with a metadata header."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    subset_text = "none" if split.subset_id is None else str(split.subset_id)
    for role in ROLES:
        ids = getattr(split, role)
        with open(_role_path(directory, role), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(f"# {SPLIT_HEADER}\n")
            fh.write(f"# data_type: {split.data_type}\n")
            fh.write(f"# subset: {subset_text}\n")
            fh.write(f"# role: {role}\n")
            fh.write(f"# seed: {split.seed}\n")
            fh.write(f"# count: {len(ids)}\n")
            for sample_id in ids:
                fh.write(f"{sample_id}\n")


def read_split(directory) -> DatasetSplit:
    directory = Path(directory)
    meta: dict[str, str] = {}
    members: dict[str, tuple[str, ...]] = {}
    for role in ROLES:
        path = _role_path(directory, role)
        if not path.exists():
            raise SplitError(f"missing membership file {path}")
        header: dict[str, str] = {}
        ids: list[str] = []
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.rstrip("\n")
                if line.startswith("# "):
                    text = line[2:]
                    if text == SPLIT_HEADER:
                        header["format"] = text
                    elif ": " in text:
                        key, value = text.split(": ", 1)
                        header[key] = value
                elif line:
                    ids.append(line)
        if header.get("format") != SPLIT_HEADER:
            raise SplitError(f"{path} is not a split membership file")
        if int(header.get("count", "-1")) != len(ids):
            raise SplitError(f"{path} count header does not match {len(ids)} ids")
        members[role] = tuple(ids)
        for key in ("data_type", "subset", "seed"):
            if key in meta and meta[key] != header.get(key):
                raise SplitError(f"membership files disagree on {key}")
            meta[key] = header.get(key, "")
    subset_id = None if meta["subset"] == "none" else int(meta["subset"])
    return DatasetSplit(
        data_type=meta["data_type"],
        subset_id=subset_id,
        train=members["train"],
        validation=members["validation"],
        test=members["test"],
        seed=int(meta["seed"]),
    )
