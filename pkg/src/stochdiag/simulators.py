"""Toy stochastic simulators with known moments, and external-simulator adapters."""

from __future__ import annotations

import csv
import math
import shlex
import subprocess
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .exceptions import DomainError, IngestionError
from .rng import RngStream

__all__ = [
    "trend",
    "ToySimulator",
    "SimulationBatch",
    "toy_normal_run",
    "toy_gamma_run",
    "TableAdapter",
    "ExecAdapter",
    "external_simulate",
    "get_simulator",
]


def trend(x):
    """Deterministic part shared by both toy simulators."""
    x = np.asarray(x, dtype=float)
    return np.sin(16 * x) + np.cos(24 * x) + 8 * x


def _check_unit(x):
    x = np.asarray(x, dtype=float)
    if np.any((x < 0) | (x > 1)) or not np.all(np.isfinite(x)):
        raise DomainError("toy simulator inputs must lie in [0, 1]")
    return x


@dataclass(frozen=True)
class SimulationBatch:
    inputs: np.ndarray
    outputs: np.ndarray
    simulator: str = ""
    seed: Optional[int] = None

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.inputs, dtype=float))
        if X.shape[0] == 1 and np.ndim(self.inputs) == 1:
            X = X.T
        y = np.asarray(self.outputs, dtype=float).ravel()
        if X.shape[0] != y.shape[0]:
            raise DomainError("inputs and outputs must have the same number of rows")
        object.__setattr__(self, "inputs", X)
        object.__setattr__(self, "outputs", y)


@dataclass(frozen=True)
class ToySimulator:
    """One-dimensional toy simulator ``trend(x) + noise``.

    ``noise_family`` is ``"normal"`` (sd ``0.1 + 0.9 x``) or ``"gamma"``
    (``Gamma(shape, rate)`` added without centring, so the mean sits above the
    trend by ``shape / rate``).
    """

    noise_family: str = "normal"
    gamma_shape: float = 1.0
    gamma_rate: float = 1.0

    def __post_init__(self):
        if self.noise_family not in ("normal", "gamma"):
            raise DomainError(f"unknown noise family {self.noise_family!r}")

    @property
    def name(self) -> str:
        return "toy-normal" if self.noise_family == "normal" else "toy-gamma"

    def noise_sd(self, x):
        x = np.asarray(x, dtype=float)
        if self.noise_family == "normal":
            return 0.1 + 0.9 * x
        return np.full_like(x, math.sqrt(self.gamma_shape) / self.gamma_rate)

    def mean(self, x):
        m = trend(x)
        if self.noise_family == "gamma":
            m = m + self.gamma_shape / self.gamma_rate
        return m

    def variance(self, x):
        return self.noise_sd(x) ** 2

    def skewness(self, x):
        x = np.asarray(x, dtype=float)
        if self.noise_family == "normal":
            return np.zeros_like(x)
        return np.full_like(x, 2.0 / math.sqrt(self.gamma_shape))

    def excess_kurtosis(self, x):
        x = np.asarray(x, dtype=float)
        if self.noise_family == "normal":
            return np.zeros_like(x)
        return np.full_like(x, 6.0 / self.gamma_shape)

    def run(self, x, rng: RngStream):
        """Simulate once at each entry of ``x`` (scalar or 1-d / n-by-1 array)."""
        x = _check_unit(x)
        shape = np.shape(x)
        flat = x.reshape(-1)
        if self.noise_family == "normal":
            eps = rng.normal(size=flat.shape) * (0.1 + 0.9 * flat)
        else:
            eps = rng.gamma(self.gamma_shape, 1.0 / self.gamma_rate, size=flat.shape)
        out = (trend(flat) + eps).reshape(shape)
        return float(out) if out.ndim == 0 else out

    def simulate(self, inputs, rng: RngStream) -> SimulationBatch:
        X = np.asarray(inputs, dtype=float)
        X = X.reshape(-1, 1) if X.ndim == 1 else X
        if X.shape[1] != 1:
            raise DomainError("toy simulators take a single input column")
        y = self.run(X[:, 0], rng)
        return SimulationBatch(X, y, simulator=self.name, seed=rng.seed)


def toy_normal_run(x, rng: RngStream):
    """One run of the heteroscedastic normal toy simulator."""
    return ToySimulator("normal").run(x, rng)


def toy_gamma_run(x, rng: RngStream):
    """One run of the gamma-noise toy simulator."""
    return ToySimulator("gamma").run(x, rng)


# ---------------------------------------------------------------------------
# External simulators
# ---------------------------------------------------------------------------


def _read_run_table(path):
    from .io import read_runs

    X, y = read_runs(path)
    return X, y


@dataclass
class TableAdapter:
    """Looks up outputs in a precomputed run table (CSV ``x1..xd,y``).

    Rows that share an input are consumed in file order, so a design with
    replicated rows pulls successive stored replicates.
    """

    path: str
    atol: float = 0.0
    name: str = field(default="table", init=False)

    def simulate(self, inputs, rng: Optional[RngStream] = None) -> SimulationBatch:
        X_tab, y_tab = _read_run_table(self.path)
        X = np.atleast_2d(np.asarray(inputs, dtype=float))
        if X.shape[1] != X_tab.shape[1]:
            raise IngestionError(
                f"run table has {X_tab.shape[1]} input columns, design has {X.shape[1]}"
            )
        used = np.zeros(len(y_tab), dtype=bool)
        out = np.empty(X.shape[0])
        for i, row in enumerate(X):
            if self.atol > 0:
                match = np.all(np.abs(X_tab - row) <= self.atol, axis=1)
            else:
                match = np.all(X_tab == row, axis=1)
            idx = np.flatnonzero(match & ~used)
            if idx.size == 0:
                raise IngestionError(f"no stored run for input row {i}: {row.tolist()}", row=i)
            used[idx[0]] = True
            out[i] = y_tab[idx[0]]
        return SimulationBatch(X, out, simulator=f"table:{self.path}")


@dataclass
class ExecAdapter:
    """Runs an external command once per batch, exchanging CSV files.

    The adapter writes ``inputs.csv`` (header ``x1..xd``) into ``workdir``,
    runs ``command`` there, and reads ``outputs.csv`` (header ``y``, one row
    per input row).
    """

    command: str
    workdir: str = "."
    timeout: Optional[float] = None
    name: str = field(default="exec", init=False)

    def simulate(self, inputs, rng: Optional[RngStream] = None) -> SimulationBatch:
        X = np.atleast_2d(np.asarray(inputs, dtype=float))
        wd = Path(self.workdir)
        wd.mkdir(parents=True, exist_ok=True)
        with open(wd / "inputs.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"x{j + 1}" for j in range(X.shape[1])])
            for row in X:
                w.writerow([repr(float(v)) for v in row])
        proc = subprocess.run(
            shlex.split(self.command), cwd=wd, capture_output=True, text=True, timeout=self.timeout
        )
        if proc.returncode != 0:
            raise IngestionError(
                f"simulator command exited with status {proc.returncode}: {proc.stderr.strip()}"
            )
        out_path = wd / "outputs.csv"
        if not out_path.exists():
            raise IngestionError("simulator command did not write outputs.csv")
        with open(out_path, newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows or [c.strip() for c in rows[0]] != ["y"]:
            raise IngestionError("outputs.csv must start with the header 'y'", row=0)
        body = rows[1:]
        if len(body) != X.shape[0]:
            missing = min(len(body), X.shape[0])
            raise IngestionError(
                f"outputs.csv has {len(body)} rows for {X.shape[0]} inputs; first unmatched row {missing}",
                row=missing,
            )
        y = np.empty(X.shape[0])
        for i, cells in enumerate(body):
            try:
                if len(cells) != 1:
                    raise ValueError
                y[i] = float(cells[0])
            except ValueError:
                raise IngestionError(f"malformed output in row {i}: {cells!r}", row=i) from None
            if not math.isfinite(y[i]):
                raise IngestionError(f"non-finite output in row {i}", row=i)
        return SimulationBatch(X, y, simulator=f"exec:{self.command}")


def external_simulate(adapter, inputs) -> SimulationBatch:
    """Evaluate an external adapter (:class:`TableAdapter` or :class:`ExecAdapter`)."""
    return adapter.simulate(inputs)


def get_simulator(spec: str, workdir: str = "."):
    """Resolve a ``--simulator`` string: ``toy-normal``, ``toy-gamma``,
    ``table:<path>`` or ``exec:<cmd>``."""
    if spec == "toy-normal":
        return ToySimulator("normal")
    if spec == "toy-gamma":
        return ToySimulator("gamma")
    if spec.startswith("table:"):
        return TableAdapter(spec[len("table:"):])
    if spec.startswith("exec:"):
        return ExecAdapter(spec[len("exec:"):], workdir=workdir)
    raise DomainError(f"unknown simulator {spec!r}")
