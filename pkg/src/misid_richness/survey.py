"""Incidence survey data model and the reduction to frequency counts."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Sequence

import numpy as np


class SurveyValidationError(ValueError):
    """Raised when an incidence matrix violates its structural invariants."""


@dataclass(frozen=True)
class IncidenceMatrix:
    """Binary species x sampling-unit detection records.

    Rows are species, columns are sampling units. A species that was never
    detected does not belong in the matrix and is rejected.
    """

    species_labels: tuple
    detections: np.ndarray
    T: int = field(init=False)

    def __init__(self, species_labels: Sequence[Hashable], detections, T: int | None = None):
        labels = tuple(species_labels)
        arr = np.asarray(detections)
        if arr.size == 0:
            if T is None:
                T = arr.shape[1] if arr.ndim == 2 else 0
            arr = np.zeros((0, T), dtype=np.uint8)
        if arr.ndim != 2:
            raise SurveyValidationError(f"detections must be 2-D, got shape {arr.shape}")
        if T is None:
            T = arr.shape[1]
        if arr.shape[1] != T:
            raise SurveyValidationError(f"T={T} but detections have {arr.shape[1]} columns")
        if T < 1:
            raise SurveyValidationError("T must be at least 1")
        if len(labels) != arr.shape[0]:
            raise SurveyValidationError(
                f"{len(labels)} labels for {arr.shape[0]} detection rows"
            )
        bad = np.argwhere((arr != 0) & (arr != 1))
        if bad.size:
            i, j = bad[0]
            raise SurveyValidationError(
                f"non-binary cell {arr[i, j]!r} at species {labels[i]!r}, unit {j}"
            )
        seen = set()
        for lab in labels:
            if lab in seen:
                raise SurveyValidationError(f"duplicate species label {lab!r}")
            seen.add(lab)
        arr = arr.astype(np.uint8)
        empty = np.flatnonzero(arr.sum(axis=1) == 0)
        if empty.size:
            raise SurveyValidationError(
                f"species {labels[empty[0]]!r} has no detections"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "species_labels", labels)
        object.__setattr__(self, "detections", arr)
        object.__setattr__(self, "T", int(T))

    @property
    def n_species(self) -> int:
        return len(self.species_labels)

    def row_sums(self) -> np.ndarray:
        return self.detections.sum(axis=1).astype(np.int64)

    def __eq__(self, other):
        if not isinstance(other, IncidenceMatrix):
            return NotImplemented
        return (
            self.T == other.T
            and self.species_labels == other.species_labels
            and np.array_equal(self.detections, other.detections)
        )

    __hash__ = None


@dataclass(frozen=True)
class FrequencyCounts:
    """Observed richness and the incidence-frequency spectrum.

    ``Q[k - 1]`` is the number of species detected in exactly ``k`` of the
    ``T`` sampling units, stored densely for ``k = 1..T``.
    """

    S_obs: int
    Q: tuple
    T: int

    def __post_init__(self):
        if len(self.Q) != self.T:
            raise SurveyValidationError(f"Q must have T={self.T} entries, got {len(self.Q)}")
        if any(q < 0 for q in self.Q) or self.S_obs < 0:
            raise SurveyValidationError("counts must be nonnegative")
        if sum(self.Q) != self.S_obs:
            raise SurveyValidationError(f"sum(Q)={sum(self.Q)} != S_obs={self.S_obs}")

    def q(self, k: int) -> int:
        """Number of species detected in exactly ``k`` units (0 for k > T)."""
        if k < 1:
            raise ValueError("k must be >= 1")
        return self.Q[k - 1] if k <= self.T else 0

    @property
    def Q1(self) -> int:
        return self.q(1)

    @property
    def Q2(self) -> int:
        return self.q(2)

    def as_dict(self) -> dict[int, int]:
        return {k: self.Q[k - 1] for k in range(1, self.T + 1)}


def tally_frequencies(m: IncidenceMatrix) -> FrequencyCounts:
    """Reduce an incidence matrix to its frequency counts."""
    sums = m.row_sums()
    q = np.bincount(sums, minlength=m.T + 1)[1:]
    return FrequencyCounts(S_obs=m.n_species, Q=tuple(int(v) for v in q), T=m.T)


def matrix_from_frequencies(counts: Sequence[int], label_prefix: str = "sp") -> IncidenceMatrix:
    """Build a deterministic incidence matrix realizing a frequency spectrum.

    ``counts[k - 1]`` species are placed in exactly ``k`` units; the occupied
    units rotate cyclically so that every unit gets used. Handy for
    reconstructing a survey when only its frequency counts were published.
    """
    T = len(counts)
    rows = []
    start = 0
    for k, n in enumerate(counts, start=1):
        for _ in range(n):
            row = np.zeros(T, dtype=np.uint8)
            row[(start + np.arange(k)) % T] = 1
            rows.append(row)
            start = (start + 1) % T
    labels = [f"{label_prefix}{i + 1:03d}" for i in range(len(rows))]
    det = np.vstack(rows) if rows else np.zeros((0, T), dtype=np.uint8)
    return IncidenceMatrix(labels, det, T=T)
