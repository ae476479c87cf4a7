"""Ising models, spin configurations, and energy evaluation.

Conventions used throughout the package: spins take values in {+1, -1},
the energy of a configuration ``s`` is

    E(s) = sum_i h_i s_i + sum_{(i,j)} J_ij s_i s_j

(no leading minus sign; couplings are quoted exactly as programmed), and
temperatures are in natural units with k_B = 1, so beta = 1/T.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from importlib import resources
from pathlib import Path

import numpy as np

__all__ = [
    "IsingModel",
    "random_configuration",
    "random_pm_j_model",
    "shipped_instance",
    "SHIPPED_INSTANCE_SEED",
]

# Seed used to generate the packaged 25-spin +-J instance (see
# random_pm_j_model and data/instance_25.json metadata).
SHIPPED_INSTANCE_SEED = 20250815


@dataclass(frozen=True)
class IsingModel:
    """Sparse Ising model over ``num_spins`` binary spins.

    Parameters
    ----------
    num_spins : int
        Number of spins N (> 0).
    fields : dict[int, float]
        Local field h_i per spin index; absent indices mean h_i = 0.
    couplings : dict[tuple[int, int], float]
        Coupling J_ij per unordered pair, keyed with i < j.  Each pair
        appears at most once and self-couplings are rejected.
    """

    num_spins: int
    fields: dict[int, float] = field(default_factory=dict)
    couplings: dict[tuple[int, int], float] = field(default_factory=dict)

    def __post_init__(self):
        if self.num_spins <= 0:
            raise ValueError(f"num_spins must be positive, got {self.num_spins}")
        for i in self.fields:
            if not 0 <= i < self.num_spins:
                raise ValueError(f"field index {i} outside [0, {self.num_spins})")
        normalized = {}
        for (i, j), v in self.couplings.items():
            if i == j:
                raise ValueError(f"self-coupling on spin {i}")
            if not (0 <= i < self.num_spins and 0 <= j < self.num_spins):
                raise ValueError(f"coupling ({i}, {j}) outside [0, {self.num_spins})")
            key = (i, j) if i < j else (j, i)
            if key in normalized:
                raise ValueError(f"duplicate coupling for pair {key}")
            normalized[key] = float(v)
        object.__setattr__(self, "couplings", normalized)
        object.__setattr__(
            self, "fields", {int(i): float(v) for i, v in self.fields.items()}
        )

    # -- derived arrays (cached, used by the numeric kernels) ---------------

    @cached_property
    def h_vector(self) -> np.ndarray:
        """Dense field vector of shape (N,)."""
        h = np.zeros(self.num_spins)
        for i, v in self.fields.items():
            h[i] = v
        h.setflags(write=False)
        return h

    @cached_property
    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Coupling triplets as arrays (i, j, J_ij), sorted by pair."""
        pairs = sorted(self.couplings)
        ei = np.array([p[0] for p in pairs], dtype=np.int32)
        ej = np.array([p[1] for p in pairs], dtype=np.int32)
        ev = np.array([self.couplings[p] for p in pairs])
        for a in (ei, ej, ev):
            a.setflags(write=False)
        return ei, ej, ev

    @cached_property
    def adjacency(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """CSR-style adjacency: (indptr, neighbor index, coupling value)."""
        ei, ej, ev = self.edge_arrays
        deg = np.zeros(self.num_spins, dtype=np.int64)
        for a, b in zip(ei, ej):
            deg[a] += 1
            deg[b] += 1
        indptr = np.zeros(self.num_spins + 1, dtype=np.int64)
        np.cumsum(deg, out=indptr[1:])
        nbr = np.zeros(2 * len(ei), dtype=np.int32)
        nbw = np.zeros(2 * len(ei))
        fill = indptr[:-1].copy()
        for a, b, w in zip(ei, ej, ev):
            nbr[fill[a]], nbw[fill[a]] = b, w
            fill[a] += 1
            nbr[fill[b]], nbw[fill[b]] = a, w
            fill[b] += 1
        for a in (indptr, nbr, nbw):
            a.setflags(write=False)
        return indptr, nbr, nbw

    @property
    def num_couplings(self) -> int:
        return len(self.couplings)

    @cached_property
    def is_pm_j(self) -> bool:
        """True for the +-J instance class: all J in {+1, -1}, all h = 0."""
        if any(v != 0.0 for v in self.fields.values()):
            return False
        return all(v in (1.0, -1.0) for v in self.couplings.values())

    @cached_property
    def has_integer_energies(self) -> bool:
        """True when every h and J is integral, so all energies are ints."""
        vals = list(self.fields.values()) + list(self.couplings.values())
        return all(float(v).is_integer() for v in vals)

    # -- energy --------------------------------------------------------------

    def energy(self, config: np.ndarray) -> float:
        """Energy of a single spin configuration.

        Raises ValueError if the configuration length does not match N or
        contains values other than +-1.
        """
        config = _check_config(config, self.num_spins)
        ei, ej, ev = self.edge_arrays
        e = float(self.h_vector @ config)
        if len(ev):
            e += float(ev @ (config[ei] * config[ej]))
        return e

    def energies(self, configs: np.ndarray) -> np.ndarray:
        """Vectorized energies for configurations of shape (batch, N)."""
        configs = np.asarray(configs)
        if configs.ndim != 2 or configs.shape[1] != self.num_spins:
            raise ValueError(
                f"expected shape (batch, {self.num_spins}), got {configs.shape}"
            )
        ei, ej, ev = self.edge_arrays
        e = configs.astype(np.float64) @ self.h_vector
        if len(ev):
            e += (configs[:, ei] * configs[:, ej]).astype(np.float64) @ ev
        return e

    # -- serialization --------------------------------------------------------

    def to_dict(self, metadata: dict | None = None) -> dict:
        d = {
            "num_spins": self.num_spins,
            "h": {str(i): v for i, v in sorted(self.fields.items())},
            "j": [[int(i), int(j), v] for (i, j), v in sorted(self.couplings.items())],
        }
        if metadata is not None:
            d["metadata"] = metadata
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "IsingModel":
        try:
            n = int(d["num_spins"])
        except KeyError:
            raise ValueError("model file missing required key 'num_spins'") from None
        h_raw = d.get("h", {})
        if not isinstance(h_raw, dict):
            raise ValueError("model key 'h' must be a mapping of index to field")
        fields = {int(i): float(v) for i, v in h_raw.items()}
        j_raw = d.get("j", [])
        if not isinstance(j_raw, list):
            raise ValueError("model key 'j' must be a list of [i, j, value] triplets")
        couplings = {}
        for entry in j_raw:
            if len(entry) != 3:
                raise ValueError(f"coupling entry {entry!r} is not an [i, j, value] triplet")
            i, j, v = int(entry[0]), int(entry[1]), float(entry[2])
            key = (i, j) if i < j else (j, i)
            if key in couplings:
                raise ValueError(f"duplicate coupling for pair {key}")
            couplings[key] = v
        return cls(num_spins=n, fields=fields, couplings=couplings)

    def save(self, path: str | Path, metadata: dict | None = None) -> None:
        Path(path).write_text(json.dumps(self.to_dict(metadata), indent=2) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "IsingModel":
        return cls.from_dict(json.loads(Path(path).read_text()))


def _check_config(config: np.ndarray, num_spins: int) -> np.ndarray:
    config = np.asarray(config)
    if config.ndim != 1 or len(config) != num_spins:
        raise ValueError(
            f"configuration length {config.shape} does not match N = {num_spins}"
        )
    if not np.all(np.abs(config) == 1):
        raise ValueError("spins must take values in {+1, -1}")
    return config


def random_configuration(num_spins: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform random spin configuration (each spin +-1 with p = 1/2)."""
    return rng.choice(np.array([-1, 1], dtype=np.int8), size=num_spins)


def random_pm_j_model(
    num_spins: int, num_couplings: int, seed: int
) -> IsingModel:
    """Random connected +-J instance with zero fields.

    The topology is a uniformly-permuted spanning path plus random extra
    edges up to ``num_couplings`` total, which keeps the graph connected at
    a hardware-subgraph-like average degree.  Couplings are +-1 with equal
    probability.  Fully determined by ``seed``.
    """
    if num_couplings < num_spins - 1:
        raise ValueError("need at least num_spins - 1 couplings for connectivity")
    max_edges = num_spins * (num_spins - 1) // 2
    if num_couplings > max_edges:
        raise ValueError(f"num_couplings {num_couplings} exceeds {max_edges}")
    rng = np.random.default_rng(seed)
    order = rng.permutation(num_spins)
    edges = set()
    for a, b in zip(order[:-1], order[1:]):
        edges.add((min(a, b), max(a, b)))
    while len(edges) < num_couplings:
        i, j = rng.integers(0, num_spins, size=2)
        if i != j:
            edges.add((min(i, j), max(i, j)))
    signs = rng.choice([-1.0, 1.0], size=num_couplings)
    couplings = {
        (int(i), int(j)): float(s) for (i, j), s in zip(sorted(edges), signs)
    }
    return IsingModel(num_spins=num_spins, couplings=couplings)


def shipped_instance() -> IsingModel:
    """The packaged 25-spin +-J benchmark instance.

    Regenerable from its recorded seed via ``random_pm_j_model``; ground
    truth for it is always derived by exact enumeration, never hard-coded.
    """
    text = resources.files("isingdos").joinpath("data/instance_25.json").read_text()
    return IsingModel.from_dict(json.loads(text))


def shipped_instance_path() -> Path:
    """Filesystem path of the packaged instance (for CLI examples)."""
    with resources.as_file(
        resources.files("isingdos").joinpath("data/instance_25.json")
    ) as p:
        return Path(p)
