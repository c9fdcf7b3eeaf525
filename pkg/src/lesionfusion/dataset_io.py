"""CSV readers and writers for ground truth, metadata and score tables.

All files are UTF-8, comma separated, with a header row. CRLF and LF line
endings are accepted on read; LF is always written.
"""

from __future__ import annotations

import csv
import enum
import math
import warnings
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

from .errors import (
    AgeOutOfRange,
    BothFlagsSet,
    DuplicateId,
    IoFailure,
    MalformedHeader,
    MissingScores,
    NegativeAge,
    ScoreOutOfRange,
    UnknownSexToken,
    UnparseableCell,
)

GROUND_TRUTH_HEADER = ["image_id", "melanoma", "seborrheic_keratosis"]
METADATA_HEADER = ["image_id", "age_approximate", "sex"]
SCORES_HEADER = ["image_id", "score"]

MAX_AGE = 130


class Label(str, enum.Enum):
    MM = "MM"
    SK = "SK"
    NCN = "NCN"

    def __str__(self) -> str:
        return self.value


class Sex(str, enum.Enum):
    male = "male"
    female = "female"

    def __str__(self) -> str:
        return self.value


TASKS = (Label.MM, Label.SK)

# Class tallies of the ISIC 2017 training set and of the external archive
# subset used alongside it.
ISIC2017_TRAINING_COUNTS = {Label.MM: 374, Label.SK: 254, Label.NCN: 1372}
EXTERNAL_ARCHIVE_COUNTS = {Label.MM: 409, Label.SK: 66, Label.NCN: 969}


def as_task(task) -> Label:
    """Coerce ``task`` ("MM"/"SK", any case, or a Label) to a task label."""
    try:
        label = task if isinstance(task, Label) else Label(str(task).upper())
    except ValueError:
        raise ValueError(f"unknown task {task!r}; expected MM or SK") from None
    if label not in TASKS:
        raise ValueError("NCN is not a classification task")
    return label


@dataclass(frozen=True)
class GroundTruthRecord:
    id: str
    label: Label


@dataclass(frozen=True)
class MetadataRecord:
    id: str
    age: Optional[int] = None
    sex: Optional[Sex] = None


@dataclass
class ScoreTable:
    """Per-lesion prediction scores for one binary task.

    ``entries`` maps lesion id to a score in [0, 1]. Construction validates
    the range; duplicate ids are impossible in a dict and are rejected at
    load time instead.
    """

    task: Label
    entries: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        self.task = as_task(self.task)
        for id_, s in self.entries.items():
            if not (0.0 <= s <= 1.0):
                raise ScoreOutOfRange(f"score {s!r} for id {id_!r} outside [0, 1]")

    def __len__(self) -> int:
        return len(self.entries)

    def ids(self) -> list[str]:
        return sorted(self.entries)


@dataclass
class ClassCountReport:
    counts: dict[Label, int]
    expected: Optional[dict[Label, int]] = None
    match: bool = True

    @property
    def total(self) -> int:
        return sum(self.counts.values())


def _read_rows(path, header: Sequence[str]):
    """Yield (line number, row) for each data row after checking the header."""
    path = Path(path)
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"{path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        first = next(reader, None)
        if first is None or [c.strip() for c in first] != list(header):
            raise MalformedHeader(
                f"{path}: expected header {','.join(header)!r}, got {first!r}"
            )
        for row in reader:
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise UnparseableCell(
                    f"{path}: row {reader.line_num} has {len(row)} cells, "
                    f"expected {len(header)}"
                )
            yield reader.line_num, [c.strip() for c in row]


def _flag(cell: str, path, line: int, column: str) -> bool:
    try:
        value = float(cell)
    except ValueError:
        raise UnparseableCell(f"{path}: row {line}: {column}={cell!r}") from None
    if value == 1.0:
        return True
    if value == 0.0:
        return False
    raise UnparseableCell(f"{path}: row {line}: {column}={cell!r} is not 0 or 1")


def load_ground_truth(path) -> list[GroundTruthRecord]:
    """Read a challenge ground-truth file.

    Parameters
    ----------
    path : str or Path
        CSV with header ``image_id,melanoma,seborrheic_keratosis`` and
        0.0/1.0 flags.

    Returns
    -------
    list of GroundTruthRecord
        One record per data row, in file order. MM if the melanoma flag is
        set, SK if the keratosis flag is set, NCN otherwise.
    """
    records = []
    seen: dict[str, int] = {}
    for line, (id_, mel, sk) in _read_rows(path, GROUND_TRUTH_HEADER):
        if not id_:
            raise UnparseableCell(f"{path}: row {line}: empty image_id")
        if id_ in seen:
            raise DuplicateId(f"{path}: row {line}: id {id_!r} already on row {seen[id_]}")
        seen[id_] = line
        is_mm = _flag(mel, path, line, "melanoma")
        is_sk = _flag(sk, path, line, "seborrheic_keratosis")
        if is_mm and is_sk:
            raise BothFlagsSet(f"{path}: row {line}: id {id_!r} flags both MM and SK")
        label = Label.MM if is_mm else Label.SK if is_sk else Label.NCN
        records.append(GroundTruthRecord(id_, label))
    return records


def write_ground_truth(records: Iterable[GroundTruthRecord], path) -> None:
    rows = [
        [r.id, "1.0" if r.label is Label.MM else "0.0", "1.0" if r.label is Label.SK else "0.0"]
        for r in sorted(records, key=lambda r: r.id)
    ]
    _write_rows(path, GROUND_TRUTH_HEADER, rows)


_UNKNOWN_TOKENS = {"", "unknown"}


def load_metadata(path) -> list[MetadataRecord]:
    """Read ``image_id,age_approximate,sex``; empty or "unknown" cells are absent."""
    records = []
    seen = set()
    for line, (id_, age_cell, sex_cell) in _read_rows(path, METADATA_HEADER):
        if id_ in seen:
            raise DuplicateId(f"{path}: row {line}: id {id_!r} repeated")
        seen.add(id_)

        age = None
        if age_cell.lower() not in _UNKNOWN_TOKENS:
            try:
                age_f = float(age_cell)
            except ValueError:
                raise UnparseableCell(f"{path}: row {line}: age={age_cell!r}") from None
            if not math.isfinite(age_f) or age_f != int(age_f):
                raise UnparseableCell(f"{path}: row {line}: age={age_cell!r} is not an integer")
            age = int(age_f)
            if age < 0:
                raise NegativeAge(f"{path}: row {line}: age {age} < 0")
            if age > MAX_AGE:
                raise AgeOutOfRange(f"{path}: row {line}: age {age} > {MAX_AGE}")

        sex = None
        token = sex_cell.lower()
        if token not in _UNKNOWN_TOKENS:
            try:
                sex = Sex(token)
            except ValueError:
                raise UnknownSexToken(f"{path}: row {line}: sex={sex_cell!r}") from None
        records.append(MetadataRecord(id_, age, sex))
    return records


def write_metadata(records: Iterable[MetadataRecord], path) -> None:
    rows = [
        [r.id, "" if r.age is None else str(r.age), "" if r.sex is None else r.sex.value]
        for r in sorted(records, key=lambda r: r.id)
    ]
    _write_rows(path, METADATA_HEADER, rows)


def load_scores(path, task) -> ScoreTable:
    """Read an ``image_id,score`` file into a :class:`ScoreTable` for ``task``."""
    entries: dict[str, float] = {}
    for line, (id_, cell) in _read_rows(path, SCORES_HEADER):
        if id_ in entries:
            raise DuplicateId(f"{path}: row {line}: id {id_!r} repeated")
        try:
            score = float(cell)
        except ValueError:
            raise UnparseableCell(f"{path}: row {line}: score={cell!r}") from None
        if not (0.0 <= score <= 1.0):
            raise ScoreOutOfRange(f"{path}: row {line}: score {cell} outside [0, 1]")
        entries[id_] = score
    return ScoreTable(task, entries)


def write_scores(table: ScoreTable, path) -> None:
    """Write ``table`` sorted by id.

    Scores use ``repr`` (shortest round-tripping form), so reading the file
    back reproduces every float exactly.
    """
    rows = [[id_, repr(float(table.entries[id_]))] for id_ in table.ids()]
    _write_rows(path, SCORES_HEADER, rows)


def _write_rows(path, header, rows) -> None:
    path = Path(path)
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
    except OSError as exc:
        raise IoFailure(f"{path}: {exc}") from exc


def validate_class_counts(
    records: Iterable[GroundTruthRecord],
    expected: Optional[Mapping] = None,
) -> ClassCountReport:
    """Tally records per class and compare against ``expected`` counts."""
    tally = Counter(r.label for r in records)
    counts = {label: tally.get(label, 0) for label in Label}
    if expected is None:
        return ClassCountReport(counts)
    exp = {Label(str(k)): int(v) for k, v in expected.items()}
    match = all(counts[label] == exp.get(label, 0) for label in Label)
    return ClassCountReport(counts, exp, match)


def align(
    scores: ScoreTable,
    truth: Iterable[GroundTruthRecord],
    strict: bool = True,
) -> list[tuple[float, Label]]:
    """Join a score table with ground truth on lesion id.

    Returns ``(score, label)`` pairs for ids present on both sides, ordered by
    id. Ids present on only one side raise :class:`MissingScores` when
    ``strict`` is true; otherwise a warning lists them and they are dropped.
    """
    labels = {r.id: r.label for r in truth}
    no_score = sorted(set(labels) - set(scores.entries))
    no_truth = sorted(set(scores.entries) - set(labels))
    if no_score or no_truth:
        msg = []
        if no_score:
            msg.append(f"{len(no_score)} truth ids without score: {_preview(no_score)}")
        if no_truth:
            msg.append(f"{len(no_truth)} scored ids without truth: {_preview(no_truth)}")
        msg = "; ".join(msg)
        if strict:
            raise MissingScores(msg)
        warnings.warn(msg, stacklevel=2)
    common = sorted(set(labels) & set(scores.entries))
    return [(scores.entries[i], labels[i]) for i in common]


def _preview(ids, n=5):
    head = ", ".join(ids[:n])
    return head + (", ..." if len(ids) > n else "")


def to_binary(pairs: Iterable[tuple[float, Label]], task) -> list[tuple[float, bool]]:
    """Map ``(score, label)`` pairs to ``(score, label == task)``."""
    task = as_task(task)
    return [(s, label == task) for s, label in pairs]
