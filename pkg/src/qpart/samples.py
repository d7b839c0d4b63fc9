"""Binary samples and energy-sorted, deduplicated sample sets."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np


@dataclass(frozen=True, eq=False)
class Sample:
    """A binary assignment, its energy and how many times it was found."""

    bits: np.ndarray
    energy: float
    num_occurrences: int = 1

    def __post_init__(self) -> None:
        bits = np.asarray(self.bits, dtype=np.uint8)
        if bits.ndim != 1:
            raise ValueError("sample bits must be one-dimensional")
        if bits.size and bits.max() > 1:
            raise ValueError("sample bits must be 0 or 1")
        if bits is self.bits and bits.flags.writeable:
            bits = bits.copy()
        bits.flags.writeable = False
        object.__setattr__(self, "bits", bits)
        object.__setattr__(self, "energy", float(self.energy))

    @property
    def key(self) -> bytes:
        return self.bits.tobytes()

    def __len__(self) -> int:
        return self.bits.size

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Sample):
            return NotImplemented
        return (
            self.key == other.key
            and self.energy == other.energy
            and self.num_occurrences == other.num_occurrences
        )

    def __hash__(self) -> int:
        return hash((self.key, self.energy, self.num_occurrences))

    def __repr__(self) -> str:
        shown = "".join(map(str, self.bits[:32].tolist()))
        if self.bits.size > 32:
            shown += "..."
        return f"Sample({shown}, energy={self.energy:g}, x{self.num_occurrences})"


def _order(s: Sample) -> tuple[float, bytes]:
    return s.energy, s.key


class SampleSet(Sequence[Sample]):
    """Samples sorted ascending by energy, unique by bit vector.

    Ties in energy are ordered by the raw bit bytes so the ordering is total
    and independent of insertion order.
    """

    __slots__ = ("_samples",)

    def __init__(self, samples: Iterable[Sample] = ()) -> None:
        merged: dict[bytes, Sample] = {}
        for s in samples:
            prev = merged.get(s.key)
            if prev is None:
                merged[s.key] = s
            else:
                merged[s.key] = Sample(
                    prev.bits, min(prev.energy, s.energy), prev.num_occurrences + s.num_occurrences
                )
        self._samples: tuple[Sample, ...] = tuple(sorted(merged.values(), key=_order))

    @classmethod
    def from_samples(cls, samples: Iterable[Sample], cap: int | None = None) -> "SampleSet":
        ss = cls(samples)
        return ss if cap is None else ss.truncate(cap)

    def truncate(self, cap: int) -> "SampleSet":
        if cap < 1:
            raise ValueError("cap must be at least 1")
        if len(self._samples) <= cap:
            return self
        out = SampleSet.__new__(SampleSet)
        out._samples = self._samples[:cap]
        return out

    def __getitem__(self, i):  # type: ignore[override]
        return self._samples[i]

    def __len__(self) -> int:
        return len(self._samples)

    def __iter__(self) -> Iterator[Sample]:
        return iter(self._samples)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SampleSet):
            return NotImplemented
        return self._samples == other._samples

    def __repr__(self) -> str:
        return f"SampleSet({list(self._samples)!r})"

    @property
    def first(self) -> Sample:
        if not self._samples:
            raise ValueError("empty sample set")
        return self._samples[0]

    @property
    def energies(self) -> np.ndarray:
        return np.array([s.energy for s in self._samples], dtype=np.float64)

    def bits_matrix(self) -> np.ndarray:
        if not self._samples:
            return np.zeros((0, 0), dtype=np.uint8)
        return np.vstack([s.bits for s in self._samples])


def dedup_insert(sample_set: SampleSet, sample: Sample, cap: int) -> SampleSet:
    """Insert ``sample``; exact duplicates only bump the multiplicity.

    The result keeps at most ``cap`` lowest-energy samples.
    """
    return SampleSet.from_samples([*sample_set, sample], cap=cap)
