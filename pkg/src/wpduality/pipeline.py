"""Ideal and end-to-end runs: simulate counts, fit a GPT, build secondary states, report."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import gpt
from .errors import SingularMap, ValidationError
from .interferometer import (
    CountsTable, NoiseModel, PrepSettings, apply_noise, orbit_settings, prepare,
    rotated_measurement, sample_counts, which_phase, which_way,
)
from .orbit import OrbitQuadruple
from .secondary import SecondaryQuadruple, WitnessReport, find_secondary_quadruple, quadruple_report, witness_report
from .tomography import TomographyFit, fit_gpt, gauge_align

ORBIT_IDS = ("psi1", "psi2", "psi3", "psi4")
# fiducials make the design overcomplete so that rank selection has spare cells
FIDUCIALS = (("L", PrepSettings(0.0)), ("R", PrepSettings(1.0)),
             ("plus", PrepSettings(0.5, 0.0)), ("minus", PrepSettings(0.5, math.pi)))


def ideal_report(r: float, p: float = 0.0) -> WitnessReport:
    """Witness report for the reflectivity-r orbit, optionally depolarized."""
    noise = NoiseModel(p=p)
    states = tuple(apply_noise(prepare(s), noise) for s in orbit_settings(r))
    return quadruple_report(OrbitQuadruple(states, which_way(), which_phase()))


def experiment(r: float, p: float = 0.0, eps: float = 0.0):
    """Plane-fragment preparations and measurements of the simulated experiment."""
    noise = NoiseModel(p=p, eps=eps)
    settings = list(zip(ORBIT_IDS, orbit_settings(r))) + list(FIDUCIALS)
    ids = tuple(k for k, _ in settings)
    states = [apply_noise(prepare(s, dim=3), noise) for _, s in settings]
    meas = [which_way(3), which_phase(3),
            rotated_measurement(math.pi / 4, 3, "D"), rotated_measurement(3 * math.pi / 4, 3, "A")]
    return ids, states, [apply_noise(m, noise) for m in meas]


@dataclass(frozen=True, eq=False)
class PipelineResult:
    counts: CountsTable
    fit: TomographyFit
    secondary: SecondaryQuadruple
    report: WitnessReport
    recovery_error: float
    ideal_witness: float

    def report_json(self) -> dict:
        out = self.report.to_json()
        out["ideal_V_plus_P"] = self.ideal_witness
        out["recovery_error"] = self.recovery_error
        out["rank"] = self.fit.rank
        out["sector"] = list(self.secondary.sector)
        return out

    def artifacts(self) -> dict[str, str]:
        return {"counts.csv": self.counts.to_csv(),
                "fit.json": self.fit.dumps() + "\n",
                "report.json": json.dumps(self.report_json(), indent=2) + "\n"}


def secondary_from_fit(fit: TomographyFit, m_label: str = "Z", mp_label: str = "X",
                       prep_ids=None) -> SecondaryQuadruple:
    M, Mp = fit.measurement(m_label), fit.measurement(mp_label)
    if prep_ids is None:
        states = list(fit.states)
    else:
        idx = [fit.prep_ids.index(p) for p in prep_ids]
        states = [fit.states[i] for i in idx]
    return find_secondary_quadruple(states, M, Mp)


def run_pipeline(r: float = 0.75, shots: int = 100_000, p: float = 0.05, seed: int = 0,
                 eps: float = 0.0, restarts: int = 2) -> PipelineResult:
    if shots < 1:
        raise ValidationError("shots must be positive")
    ids, states, meas = experiment(r, p, eps)
    counts = sample_counts(states, meas, shots, seed, ids)
    fit = fit_gpt(counts, seed=seed, restarts=restarts)
    truth_p = np.array([[gpt.probability(s, m.plus) for m in meas] for s in states])
    recovery = float(np.max(np.abs(fit.predicted() - truth_p)) * 2)  # in expectation units
    if fit.rank == 3:
        try:
            fit = gauge_align(fit, states)
        except SingularMap:
            pass
    sq = secondary_from_fit(fit)
    ideal = ideal_report(r).witness
    return PipelineResult(counts, fit, sq, witness_report(sq), recovery, ideal)
