"""Three-term progressions in finite sets and the cyclic Roth average.

On ``Z/N`` with the shift ``x -> x + 1`` and normalized counting measure, the
Roth average at ``N`` counts triples ``x, x + i, x + 2i`` inside ``S`` over all
differences ``i`` including ``0``:

    N^2 * cyclic_roth_average(S) = count_3aps(S, "cyclic") + |S|.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np

from .errors import DomainError
from .measure_algebra import IntervalSet, normalize

MODES = ("integer-line", "cyclic")


@dataclass(frozen=True)
class DensitySet:
    """Subset of ``{0, ..., N-1}`` stored as a bitmask string of ``'0'``/``'1'``."""

    modulus: int
    bits: str

    def __post_init__(self):
        if self.modulus < 1:
            raise DomainError("modulus must be at least 1")
        if len(self.bits) != self.modulus or set(self.bits) - {"0", "1"}:
            raise DomainError("bits must be a 0/1 string of length modulus")

    @classmethod
    def from_members(cls, modulus: int, members: Iterable[int]) -> "DensitySet":
        arr = ["0"] * modulus
        for k in members:
            if not 0 <= k < modulus:
                raise DomainError(f"member {k} outside 0..{modulus - 1}")
            arr[k] = "1"
        return cls(modulus, "".join(arr))

    @classmethod
    def full(cls, modulus: int) -> "DensitySet":
        return cls(modulus, "1" * modulus)

    @classmethod
    def random(cls, modulus: int, density: float, rng: np.random.Generator) -> "DensitySet":
        mask = rng.random(modulus) < density
        return cls(modulus, "".join("1" if b else "0" for b in mask))

    @property
    def mask(self) -> np.ndarray:
        return np.frombuffer(self.bits.encode(), dtype=np.uint8) == ord("1")

    @property
    def members(self) -> list[int]:
        return [k for k, b in enumerate(self.bits) if b == "1"]

    @property
    def size(self) -> int:
        return self.bits.count("1")

    @property
    def density(self) -> Fraction:
        return Fraction(self.size, self.modulus)

    def __len__(self):
        return self.size

    def __contains__(self, k: int) -> bool:
        return 0 <= k < self.modulus and self.bits[k] == "1"

    def __or__(self, other: "DensitySet") -> "DensitySet":
        if other.modulus != self.modulus:
            raise DomainError("moduli differ")
        return DensitySet(self.modulus, "".join("1" if "1" in (a, b) else "0" for a, b in zip(self.bits, other.bits)))

    def as_interval_set(self) -> IntervalSet:
        """``A_S``: the union of cells ``[k/N, (k+1)/N)`` for ``k`` in ``S``."""
        n = self.modulus
        return normalize((Fraction(a, n), Fraction(b, n)) for a, b in self.runs())

    def runs(self) -> list[tuple[int, int]]:
        """Maximal runs of members as half-open ``(start, stop)`` pairs."""
        out = []
        start = None
        for k, b in enumerate(self.bits + "0"):
            if b == "1" and start is None:
                start = k
            elif b == "0" and start is not None:
                out.append((start, k))
                start = None
        return out

    def to_json(self) -> dict:
        return {"kind": "density_set", "modulus": self.modulus,
                "runs": [[a, b - a] for a, b in self.runs()]}

    @classmethod
    def from_json(cls, data) -> "DensitySet":
        if isinstance(data, str):
            return cls(len(data), data)
        if "bits" in data:
            return cls(int(data.get("modulus", len(data["bits"]))), data["bits"])
        n = int(data["modulus"])
        members = []
        for start, length in data.get("runs", []):
            if length < 0:
                raise DomainError("run lengths must be non-negative")
            members.extend(range(start, start + length))
        return cls.from_members(n, members)

    def __str__(self):
        return self.bits


def count_3aps(s: DensitySet, mode: str = "integer-line") -> int:
    """Number of pairs ``(a, d)``, ``d >= 1``, with ``a, a+d, a+2d`` in ``s``.

    ``"integer-line"`` requires ``a + 2d <= N - 1``; ``"cyclic"`` reads the
    progression modulo ``N`` with ``1 <= d <= N - 1``.
    """
    if mode not in MODES:
        raise DomainError(f"mode must be one of {MODES}, got {mode!r}")
    x = s.mask
    n = s.modulus
    total = 0
    if mode == "integer-line":
        for d in range(1, (n - 1) // 2 + 1):
            total += int(np.count_nonzero(x[: n - 2 * d] & x[d: n - d] & x[2 * d:]))
        return total
    idx = np.arange(n)
    for d in range(1, n):
        total += int(np.count_nonzero(x & x[(idx + d) % n] & x[(idx + 2 * d) % n]))
    return total


def cyclic_roth_average(s: DensitySet) -> Fraction:
    """``(1/N^2) sum_{i=0}^{N-1} |S & (S - i) & (S - 2i)|`` with shifts mod ``N``."""
    x = s.mask
    n = s.modulus
    total = 0
    for i in range(n):
        total += int(np.count_nonzero(x & np.roll(x, -i) & np.roll(x, -2 * i)))
    return Fraction(total, n * n)
