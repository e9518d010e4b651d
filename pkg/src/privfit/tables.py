"""Frequency tables and their perturbed / post-processed variants, plus CSV I/O."""

from __future__ import annotations

import csv
from dataclasses import dataclass

from .errors import ValidationError


@dataclass(frozen=True)
class FrequencyTable:
    """Raw cell counts (a_1, ..., a_k) with total n."""

    counts: tuple[int, ...]

    def __post_init__(self):
        if len(self.counts) < 2:
            raise ValidationError("a frequency table needs at least 2 cells")
        if any(c < 0 for c in self.counts):
            raise ValidationError("cell counts must be nonnegative")
        if self.n < 1:
            raise ValidationError("total count must be positive")

    @property
    def n(self) -> int:
        return sum(self.counts)

    @property
    def k(self) -> int:
        return len(self.counts)


@dataclass(frozen=True)
class PerturbedTable:
    """Noisy counts (b_1, ..., b_k); the first k-1 may be negative, b_k = n - |b|."""

    values: tuple[int, ...]
    n: int

    def __post_init__(self):
        if len(self.values) < 2:
            raise ValidationError("a perturbed table needs at least 2 cells")
        if sum(self.values) != self.n:
            raise ValidationError("perturbed cells must sum to n")

    @property
    def k(self) -> int:
        return len(self.values)

    @classmethod
    def from_free_cells(cls, free: tuple[int, ...], n: int) -> "PerturbedTable":
        return cls(tuple(free) + (n - sum(free),), n)


@dataclass(frozen=True)
class PostProcessedTable:
    """Nonnegative counts (b_1^+, ..., b_k^+); the total n_plus may differ from n."""

    values: tuple[int, ...]

    def __post_init__(self):
        if len(self.values) < 2:
            raise ValidationError("a post-processed table needs at least 2 cells")
        if any(v < 0 for v in self.values):
            raise ValidationError("post-processed cells must be nonnegative")

    @property
    def n_plus(self) -> int:
        return sum(self.values)

    @property
    def k(self) -> int:
        return len(self.values)


def read_counts_csv(path) -> FrequencyTable:
    """Read a raw table from a CSV with header ``cell,count``."""
    return FrequencyTable(tuple(_read_column(path, "count")))


def read_values_csv(path) -> PerturbedTable:
    """Read a perturbed table from a CSV with header ``cell,value``."""
    values = tuple(_read_column(path, "value"))
    return PerturbedTable(values, sum(values))


def _read_column(path, column: str) -> list[int]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or column not in reader.fieldnames:
            raise ValidationError(f"{path}: expected a CSV header with a '{column}' column")
        out = []
        for lineno, row in enumerate(reader, start=2):
            try:
                out.append(int(row[column]))
            except (TypeError, ValueError):
                raise ValidationError(f"{path}:{lineno}: '{row.get(column)}' is not an integer")
    if not out:
        raise ValidationError(f"{path}: no data rows")
    return out


def write_counts_csv(path, table: FrequencyTable) -> None:
    _write_column(path, "count", table.counts)


def write_values_csv(path, table: PerturbedTable | PostProcessedTable) -> None:
    _write_column(path, "value", table.values)


def _write_column(path, column: str, cells) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["cell", column])
        for i, v in enumerate(cells, start=1):
            writer.writerow([i, v])
