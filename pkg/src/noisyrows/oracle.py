"""Entry-query oracle: the only channel through which the completion
algorithm sees the observed matrix.

Repeated queries of a cell are free; the unique-observation count is the
number of distinct cells revealed so far. The random row draw lives here,
seeded separately from the instance, so a whole trial replays from the pair
(instance seed, oracle seed).
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .instances import GroundTruthInstance
from .linalg import as_matrix


@dataclass
class QueryLog:
    """Ordered record of queries with the running unique-observation count."""

    entries: list[tuple[str, int | None, int | None, int]] = field(default_factory=list)

    def append(self, kind: str, i: int | None, j: int | None, count: int) -> None:
        self.entries.append((kind, i, j, count))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as f:
            w = csv.writer(f)
            w.writerow(["kind", "i", "j", "unique_count"])
            for kind, i, j, count in self.entries:
                w.writerow([kind, "" if i is None else i, "" if j is None else j, count])


class QueryOracle:
    """Mediates and counts access to entries of the observed matrix."""

    def __init__(self, source: GroundTruthInstance | np.ndarray, rng_seed: int = 0):
        if isinstance(source, GroundTruthInstance):
            values = source.n_observed
        else:
            values = as_matrix(source)
        self._values = values
        self._mask = np.zeros(values.shape, dtype=bool)
        self._count = 0
        self._rng = np.random.default_rng(rng_seed)
        self.rng_seed = rng_seed
        self.log = QueryLog()

    @property
    def shape(self) -> tuple[int, int]:
        return self._values.shape

    @property
    def unique_query_count(self) -> int:
        return self._count

    @property
    def observed_mask(self) -> np.ndarray:
        return self._mask.copy()

    def _check_row(self, i: int) -> None:
        if not (0 <= i < self._values.shape[0]):
            raise IndexError(f"row index {i} out of range")

    def _check_col(self, j: int) -> None:
        if not (0 <= j < self._values.shape[1]):
            raise IndexError(f"column index {j} out of range")

    def query_entry(self, i: int, j: int) -> float:
        self._check_row(i)
        self._check_col(j)
        if not self._mask[i, j]:
            self._mask[i, j] = True
            self._count += 1
        self.log.append("entry", i, j, self._count)
        return float(self._values[i, j])

    def query_row(self, i: int) -> np.ndarray:
        self._check_row(i)
        fresh = np.count_nonzero(~self._mask[i, :])
        if fresh:
            self._mask[i, :] = True
            self._count += fresh
        self.log.append("row", i, None, self._count)
        return self._values[i, :].copy()

    def query_column(self, j: int) -> np.ndarray:
        self._check_col(j)
        fresh = np.count_nonzero(~self._mask[:, j])
        if fresh:
            self._mask[:, j] = True
            self._count += fresh
        self.log.append("column", None, j, self._count)
        return self._values[:, j].copy()

    def draw_random_row(self) -> int:
        """Uniform row index from the oracle-owned generator; not a query."""
        return int(self._rng.integers(self._values.shape[0]))
