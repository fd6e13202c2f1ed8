"""Run configuration, stored as YAML with nested sections.

Every key is optional. Defaults::

    seed: 1
    bounds: {lower: [0.0], upper: [1.0]}
    design:
      n_train: 20            # unique training locations
      r_train: 20            # runs per training location
      n_val: null            # validation locations; null -> 10 per input dimension
      r_val: 4               # runs per validation location
      lhs_restarts: 1000
    simulator: {name: toy-normal, workdir: .}
    emulator: {kind: het, n_starts: 10, mean: constant, max_iter: 20, tol: 1.0e-4}
    tolerance: {sd: [0.8, 1.2], skew: 0.5, kurt: 0.5, shape: uniform}
    diagnostics: {n_mc_mean: 10000, n_mc_variance: 10000, n_reference: 10000,
                  propagate_mean: true, ddof: 1}
    ingest: {grouping_tol: 0.0}
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field

import yaml

from .diagnostics import DiagnosticConfig, ToleranceSpec
from .emulator import FitConfig, HetConfig
from .exceptions import DomainError

DEFAULTS = {
    "seed": 1,
    "bounds": {"lower": [0.0], "upper": [1.0]},
    "design": {"n_train": 20, "r_train": 20, "n_val": None, "r_val": 4, "lhs_restarts": 1000},
    "simulator": {"name": "toy-normal", "workdir": "."},
    "emulator": {"kind": "het", "n_starts": 10, "mean": "constant", "max_iter": 20, "tol": 1e-4},
    "tolerance": {"sd": [0.8, 1.2], "skew": 0.5, "kurt": 0.5, "shape": "uniform"},
    "diagnostics": {"n_mc_mean": 10_000, "n_mc_variance": 10_000, "n_reference": 10_000,
                    "propagate_mean": True, "ddof": 1},
    "ingest": {"grouping_tol": 0.0},
}


def _merge(base, override, path=""):
    out = copy.deepcopy(base)
    for k, v in (override or {}).items():
        if k not in base:
            raise DomainError(f"unknown config key {path + k!r}")
        if isinstance(base[k], dict):
            if not isinstance(v, dict):
                raise DomainError(f"config key {path + k!r} must be a section")
            out[k] = _merge(base[k], v, path + k + ".")
        else:
            out[k] = v
    return out


@dataclass
class RunConfig:
    values: dict = field(default_factory=lambda: copy.deepcopy(DEFAULTS))

    def __post_init__(self):
        self.values = _merge(DEFAULTS, self.values)
        self.validate()

    @classmethod
    def load(cls, path=None, **overrides) -> "RunConfig":
        values = {}
        if path is not None:
            with open(path, encoding="utf-8") as fh:
                values = yaml.safe_load(fh) or {}
            if not isinstance(values, dict):
                raise DomainError("config file must hold a mapping")
        cfg = cls(values)
        for dotted, v in overrides.items():
            if v is not None:
                cfg.set(dotted, v)
        return cfg

    def set(self, dotted: str, value):
        *head, last = dotted.split(".")
        node = self.values
        for k in head:
            node = node[k]
        if last not in node:
            raise DomainError(f"unknown config key {dotted!r}")
        node[last] = value
        self.validate()

    def dump(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            yaml.safe_dump(self.values, fh, sort_keys=False)

    def __getitem__(self, key):
        return self.values[key]

    # ---- derived views --------------------------------------------------

    @property
    def seed(self) -> int:
        return int(self.values["seed"])

    @property
    def dim(self) -> int:
        return len(self.values["bounds"]["lower"])

    @property
    def lower(self):
        return [float(v) for v in self.values["bounds"]["lower"]]

    @property
    def upper(self):
        return [float(v) for v in self.values["bounds"]["upper"]]

    @property
    def n_val(self) -> int:
        n = self.values["design"]["n_val"]
        return 10 * self.dim if n is None else int(n)

    def tolerance(self) -> ToleranceSpec:
        return ToleranceSpec.from_dict(self.values["tolerance"])

    def diagnostics(self) -> DiagnosticConfig:
        return DiagnosticConfig(**self.values["diagnostics"])

    def fit_config(self):
        e = self.values["emulator"]
        base = FitConfig(n_starts=int(e["n_starts"]), mean=e["mean"])
        if e["kind"] == "hom":
            return base
        return HetConfig(mean_fit=base, max_iter=int(e["max_iter"]), tol=float(e["tol"]))

    def validate(self):
        v = self.values
        if len(v["bounds"]["lower"]) != len(v["bounds"]["upper"]):
            raise DomainError("bounds.lower and bounds.upper differ in length")
        if any(not lo < hi for lo, hi in zip(v["bounds"]["lower"], v["bounds"]["upper"])):
            raise DomainError("every lower bound must be below its upper bound")
        d = v["design"]
        for k in ("n_train", "r_train", "r_val", "lhs_restarts"):
            if int(d[k]) < 1:
                raise DomainError(f"design.{k} must be positive")
        if d["n_val"] is not None and int(d["n_val"]) < 1:
            raise DomainError("design.n_val must be positive")
        if v["emulator"]["kind"] not in ("het", "hom"):
            raise DomainError("emulator.kind must be 'het' or 'hom'")
        for k in ("n_mc_mean", "n_mc_variance", "n_reference"):
            if int(v["diagnostics"][k]) < 1:
                raise DomainError(f"diagnostics.{k} must be positive")
        self.tolerance()
