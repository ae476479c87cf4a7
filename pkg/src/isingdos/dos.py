"""Energy histograms and density-of-states estimates.

A histogram of sampled energies, normalized so the total state count is
2^N, is the density-of-states estimate behind every partition function
estimator in this package: ln Z*(beta) = ln sum_E g(E) exp(-beta E).
Zero-count energies simply stay absent (g = 0); no smoothing is applied.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .enumeration import ENERGY_DECIMALS, ExactSpectrum, log_partition_from_dos

__all__ = [
    "EnergyHistogram",
    "DosEstimate",
    "accumulate",
    "dos_from_histogram",
    "estimate_partition",
    "histogram_from_spectrum",
]


def _norm_key(e):
    """Canonical histogram key: ints stay ints, reals round to 1e-9."""
    if isinstance(e, (int, np.integer)):
        return int(e)
    e = float(e)
    if e.is_integer():
        return int(e)
    return round(e, ENERGY_DECIMALS)


@dataclass(frozen=True)
class EnergyHistogram:
    """Map energy level -> nonnegative sample count."""

    counts: dict = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for e, c in self.counts.items():
            c = int(c)
            if c < 0:
                raise ValueError(f"negative count {c} at energy {e}")
            if c:
                clean[_norm_key(e)] = clean.get(_norm_key(e), 0) + c
        object.__setattr__(self, "counts", clean)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def merge(self, other: "EnergyHistogram") -> "EnergyHistogram":
        """Per-key sum of two histograms (associative and commutative)."""
        merged = dict(self.counts)
        for e, c in other.counts.items():
            merged[e] = merged.get(e, 0) + c
        return EnergyHistogram(merged)

    def __add__(self, other: "EnergyHistogram") -> "EnergyHistogram":
        return self.merge(other)

    @classmethod
    def from_energies(cls, energies) -> "EnergyHistogram":
        return accumulate(cls(), energies)

    # -- CSV interface: header "energy,count", rows sorted by energy ---------

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["energy", "count"])
            for e in sorted(self.counts):
                w.writerow([e, self.counts[e]])

    @classmethod
    def from_csv(cls, path: str | Path) -> "EnergyHistogram":
        counts = {}
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                counts[_norm_key(float(row["energy"]))] = int(row["count"])
        return cls(counts)


def accumulate(hist: EnergyHistogram, energies) -> EnergyHistogram:
    """New histogram with ``energies`` added to ``hist``."""
    counts = dict(hist.counts)
    energies = np.atleast_1d(np.asarray(energies, dtype=np.float64))
    if len(energies):
        levels, c = np.unique(np.round(energies, ENERGY_DECIMALS), return_counts=True)
        for e, v in zip(levels, c):
            k = _norm_key(e)
            counts[k] = counts.get(k, 0) + int(v)
    return EnergyHistogram(counts)


@dataclass(frozen=True)
class DosEstimate:
    """Estimated number of configurations per energy level.

    Normalized so that sum_E g(E) = 2^n_spins.
    """

    g: dict
    n_spins: int

    def __post_init__(self):
        object.__setattr__(
            self, "g", {_norm_key(e): float(v) for e, v in self.g.items() if v > 0}
        )
        if not self.g:
            raise ValueError("empty density of states")
        mass = sum(self.g.values())
        target = 2.0**self.n_spins
        if abs(mass - target) / target > 1e-9:
            raise ValueError(
                f"DoS mass {mass} is not 2^{self.n_spins} = {target}"
            )

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        keys = sorted(self.g)
        return (
            np.array(keys, dtype=np.float64),
            np.array([self.g[k] for k in keys]),
        )

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["energy", "g"])
            for e in sorted(self.g):
                w.writerow([e, repr(self.g[e])])


def dos_from_histogram(hist: EnergyHistogram, n_spins: int) -> DosEstimate:
    """Rescale counts to a DoS: g(E) = 2^N count(E) / total."""
    total = hist.total
    if total == 0:
        raise ValueError("cannot build a DoS from an empty histogram")
    scale = 2.0**n_spins / total
    return DosEstimate(
        g={e: c * scale for e, c in hist.counts.items()}, n_spins=n_spins
    )


def estimate_partition(dos: DosEstimate, beta: float) -> float:
    """ln Z* from a DoS estimate at inverse temperature ``beta``."""
    e, g = dos.arrays()
    return log_partition_from_dos(e, g, beta)


def histogram_from_spectrum(spectrum: ExactSpectrum) -> EnergyHistogram:
    """Exact spectrum reinterpreted as a (perfectly converged) histogram."""
    return EnergyHistogram(dict(spectrum.dos))
