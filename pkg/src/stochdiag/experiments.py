"""End-to-end toy experiments: design, simulate, fit, validate."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .data import ReplicatedDataset
from .design import expand_replicates, maximin_lhs
from .diagnostics import DiagnosticConfig, DiagnosticReport, ToleranceSpec, run_all
from .emulator import FitConfig, HetConfig, fit_hetgp, fit_homgp
from .rng import RngStream
from .simulators import ToySimulator

# substream keys under the experiment seed
_TRAIN_DESIGN, _TRAIN_RUNS, _FIT, _VAL_DESIGN, _VAL_RUNS, _DIAG = range(6)


@dataclass(frozen=True)
class ToyExperiment:
    """One toy validation study.

    The defaults give the well-trained setup: 20 training locations run 20
    times each, a heteroscedastic fit, and 10 validation locations run 5
    times each, every design a maximin Latin hypercube.
    """

    simulator: str = "normal"
    n_train: int = 20
    r_train: int = 20
    n_val: int = 10
    r_val: int = 5
    emulator: str = "het"
    lhs_restarts: int = 1000
    tolerance: ToleranceSpec = field(default_factory=ToleranceSpec)
    diagnostics: DiagnosticConfig = field(default_factory=DiagnosticConfig)
    fit: Optional[object] = None
    label: str = ""

    def run(self, seed: int):
        """Returns ``(model, training, validation, report)``."""
        root = RngStream(seed)
        sim = ToySimulator(self.simulator)
        train_design = maximin_lhs(self.n_train, 1, root.substream(_TRAIN_DESIGN),
                                   self.lhs_restarts, replicates=self.r_train)
        X = expand_replicates(train_design)
        y = sim.simulate(X, root.substream(_TRAIN_RUNS)).outputs
        if self.emulator == "het":
            model = fit_hetgp(X, y, self.fit or HetConfig(), root.substream(_FIT))
        else:
            model = fit_homgp(X, y, self.fit or FitConfig(), root.substream(_FIT))
        val_design = maximin_lhs(self.n_val, 1, root.substream(_VAL_DESIGN),
                                 self.lhs_restarts, replicates=self.r_val)
        Xv = expand_replicates(val_design)
        yv = sim.simulate(Xv, root.substream(_VAL_RUNS)).outputs
        validation = ReplicatedDataset.from_runs(Xv, yv)
        report = run_all(model, validation, self.tolerance, self.diagnostics,
                         root.substream(_DIAG), label=self.label)
        return model, ReplicatedDataset.from_runs(X, y), validation, report


def good_emulator(**kw) -> ToyExperiment:
    kw.setdefault("label", "good emulator (normal toy simulator)")
    return ToyExperiment(simulator="normal", **kw)


def small_data_emulator(**kw) -> ToyExperiment:
    """An under-trained emulator: 20 unreplicated runs.

    Without replicates the fit cannot separate mean structure from noise, so
    it oversmooths the mean and inflates the intrinsic variance.
    """
    kw.setdefault("label", "small-data emulator (normal toy simulator)")
    kw.setdefault("n_train", 20)
    kw.setdefault("r_train", 1)
    return ToyExperiment(simulator="normal", **kw)


def gamma_emulator(**kw) -> ToyExperiment:
    kw.setdefault("label", "gamma-noise toy simulator")
    return ToyExperiment(simulator="gamma", **kw)


def repeat(experiment: ToyExperiment, seeds, summarise=None):
    """Run ``experiment`` for each seed, mapping each report through ``summarise``."""
    out = []
    for s in seeds:
        _, _, _, report = experiment.run(int(s))
        out.append(summarise(report) if summarise else report)
    return out


def u_array(report: DiagnosticReport, kind: str) -> np.ndarray:
    return report.u_values(kind)[1]
