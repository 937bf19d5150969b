"""Seeded synthetic datasets with a planted link between follow ratio and tie locality.

Users are spread evenly over regions.  Each non-isolated user initiates a
log-normally distributed number of ties; each tie stays inside the user's
region with probability

    p_local(u) = clamp(locality_base * logistic(intercept - slope * x_u), 0, 1)

where ``x_u`` is ``ln(follow ratio)`` (or the centred ``ln(#friends + 1)``
when ``coupled_attribute == "friends"``).  Partners are drawn uniformly from
the non-isolated users inside, or outside, the region.  With ``slope = 0``
locality is unrelated to any attribute.
"""

import json
import os
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Optional

import numpy as np

from .attributes import AttributeTable, write_attributes
from .errors import GenerationError
from .estimator import write_labels
from .graph import SocialGraph, write_edges

FORMAT_VERSION = 1
EDGES_FILE = "edges.tsv"
LABELS_FILE = "labels.tsv"
ATTRIBUTES_FILE = "attributes.tsv"
MANIFEST_FILE = "manifest.json"


@dataclass(frozen=True)
class SynthConfig:
    n_users: int = 20000
    n_regions: int = 20
    # log-normal law of the number of ties a user initiates
    degree_mu: float = 1.2
    degree_sigma: float = 0.8
    max_degree: Optional[int] = None  # default: min(200, active users per region - 1)
    # log-normal law of #friends; ln(follow ratio) ~ Normal(ratio_mu, ratio_sigma)
    friends_mu: float = 5.0
    friends_sigma: float = 1.5
    ratio_mu: float = 0.0
    ratio_sigma: float = 1.0
    # locality coupling
    coupling_slope: float = 0.0
    coupling_intercept: float = 0.0
    locality_base: float = 0.9
    coupled_attribute: str = "ratio"
    isolated_fraction: float = 0.3
    seed: int = 0

    def validate(self):
        if self.n_users < 2:
            raise GenerationError("n_users must be at least 2")
        if self.n_regions < 2:
            raise GenerationError("n_regions must be at least 2")
        if self.n_regions > self.n_users:
            raise GenerationError("more regions than users")
        if not 0.0 < self.locality_base < 1.0:
            raise GenerationError("locality_base must lie in (0, 1)")
        if self.coupling_slope < 0:
            raise GenerationError("coupling_slope must be non-negative")
        if not 0.0 <= self.isolated_fraction < 1.0:
            raise GenerationError("isolated_fraction must lie in [0, 1)")
        if self.coupled_attribute not in ("ratio", "friends"):
            raise GenerationError(f"unknown coupled_attribute {self.coupled_attribute!r}")
        if self.degree_sigma < 0 or self.friends_sigma < 0 or self.ratio_sigma < 0:
            raise GenerationError("degree and attribute laws need non-negative scales")
        if not 0 <= self.seed < 2**64:
            raise GenerationError("seed must be a 64-bit non-negative integer")
        if self.max_degree is not None and self.max_degree < 1:
            raise GenerationError("max_degree must be at least 1")
        active = self.active_per_region()
        if active < 2:
            raise GenerationError(f"regions hold about {active} active users; at least 2 are needed")
        if self.max_degree is not None and active - 1 < self.max_degree:
            raise GenerationError(
                f"regions hold about {active} active users, too few for max_degree={self.max_degree}")

    def active_per_region(self):
        smallest_region = self.n_users // self.n_regions
        return int(round(smallest_region * (1.0 - self.isolated_fraction)))

    def degree_cap(self):
        if self.max_degree is not None:
            return self.max_degree
        return min(200, self.active_per_region() - 1)

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise GenerationError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def to_dict(self):
        return asdict(self)


@dataclass
class SynthDataset:
    graph: SocialGraph
    labels: dict
    attributes: AttributeTable
    config: SynthConfig

    def manifest(self):
        return {
            "format_version": FORMAT_VERSION,
            "seed": self.config.seed,
            "config": self.config.to_dict(),
            "files": {"edges": EDGES_FILE, "labels": LABELS_FILE, "attributes": ATTRIBUTES_FILE},
        }


def region_label(r, n_regions):
    return f"R{r:0{len(str(n_regions - 1))}d}"


def logistic(x):
    return 1.0 / (1.0 + np.exp(-x))


class _PartnerSampler:
    """Uniform partner draws among active users, inside or outside a region."""

    def __init__(self, rng, region, active, n_regions):
        pools = [np.flatnonzero(active & (region == r)) for r in range(n_regions)]
        self.rng = rng
        self.sizes = np.array([p.size for p in pools])
        self.starts = np.r_[0, np.cumsum(self.sizes)[:-1]]
        self.pool = np.concatenate(pools)  # active users grouped by region

    def inside(self, owner, owner_region):
        size, start = self.sizes[owner_region], self.starts[owner_region]
        # uniform over the region minus the owner: the owner's slot maps to the last one
        k = (self.rng.random(owner.size) * (size - 1)).astype(np.int64)
        cand = self.pool[start + k]
        return np.where(cand == owner, self.pool[start + size - 1], cand)

    def outside(self, owner_region):
        size, start = self.sizes[owner_region], self.starts[owner_region]
        k = (self.rng.random(owner_region.size) * (self.pool.size - size)).astype(np.int64)
        return self.pool[np.where(k >= start, k + size, k)]


def generate(cfg):
    """Build a :class:`SynthDataset`; a pure function of ``cfg`` (seed included)."""
    cfg.validate()
    rng = np.random.default_rng(cfg.seed)
    n, R = cfg.n_users, cfg.n_regions

    region = rng.permutation(np.arange(n) % R)

    friends = np.floor(rng.lognormal(cfg.friends_mu, cfg.friends_sigma, n)).astype(np.int64)
    log_ratio = rng.normal(cfg.ratio_mu, cfg.ratio_sigma, n)
    followers = np.maximum(0, np.rint((friends + 1) / np.exp(log_ratio) - 1)).astype(np.int64)
    attrs = AttributeTable(np.arange(n), friends, followers)

    if cfg.coupled_attribute == "ratio":
        x = np.log(attrs.ratio)
    else:
        x = np.log(friends + 1.0) - cfg.friends_mu
    p_local = np.clip(cfg.locality_base * logistic(cfg.coupling_intercept - cfg.coupling_slope * x), 0.0, 1.0)

    active = np.ones(n, dtype=bool)
    n_isolated = int(round(cfg.isolated_fraction * n))
    if n_isolated:
        active[rng.choice(n, size=n_isolated, replace=False)] = False

    stubs = np.rint(rng.lognormal(cfg.degree_mu, cfg.degree_sigma, n)).astype(np.int64)
    stubs = np.clip(stubs, 1, cfg.degree_cap())
    stubs[~active] = 0

    owner = np.repeat(np.arange(n), stubs)
    local = rng.random(owner.size) < p_local[owner]
    sampler = _PartnerSampler(rng, region, active, R)
    owner_region = region[owner]
    partner = np.empty(owner.size, dtype=np.int64)
    partner[local] = sampler.inside(owner[local], owner_region[local])
    partner[~local] = sampler.outside(owner_region[~local])

    graph = SocialGraph.from_pairs(owner, partner, users=np.arange(n))
    labels = {u: region_label(r, R) for u, r in enumerate(region.tolist())}
    return SynthDataset(graph, labels, attrs, cfg)


def emit(ds, directory):
    """Write edges, labels, attributes and manifest into ``directory``."""
    out = Path(directory)
    try:
        out.mkdir(parents=True, exist_ok=True)
        with open(out / EDGES_FILE, "w", encoding="utf-8", newline="\n") as fh:
            write_edges(ds.graph, fh)
        with open(out / LABELS_FILE, "w", encoding="utf-8", newline="\n") as fh:
            write_labels(ds.labels, fh)
        with open(out / ATTRIBUTES_FILE, "w", encoding="utf-8", newline="\n") as fh:
            write_attributes(ds.attributes, fh)
        with open(out / MANIFEST_FILE, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(ds.manifest(), fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise OSError(f"cannot write synthetic dataset to {os.fspath(out)}: {exc}") from exc
    return [out / name for name in (EDGES_FILE, LABELS_FILE, ATTRIBUTES_FILE, MANIFEST_FILE)]


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if "config" in data and "format_version" in data:
        data = data["config"]
    return SynthConfig.from_dict(data)
