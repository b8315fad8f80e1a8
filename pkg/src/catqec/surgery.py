"""Lattice-surgery merges: timelike-error simulation and ansatz fitting.

The merged region between two patches is simulated in isolation: its data
qubits start in |0>, all X stabilizers are measured d_m times, and the
merge outcome is the parity of the round-1 X-stabilizer readings.  The
outermost qubits are ideal ("frozen") so spacelike logical errors cannot
terminate, isolating the timelike failure mode.  Matching runs on the
space-time graph whose single virtual boundary plays the role of both time
boundaries; matched edges incident to round-1 readings flip them before
the parity is taken.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .codes import build_repetition, build_surface, prep_first_round
from .decoder.graph import build_graphs
from .decoder.mwpm import decode
from .noise import NoiseParams
from .pauli_sim import CircuitPlan, GateNoise, diff_layers, run_plan, shot_rng

__all__ = ["SurgeryConfig", "TimelikeExperiment", "run_timelike_shot",
           "FitResult", "fit_ansatz"]


@dataclass(frozen=True)
class SurgeryConfig:
    kind: str  # "repetition" or "surface"
    d: int  # strip distance (repetition) or d_x (surface)
    d_m: int  # merge rounds (measurement distance)
    ell: int | None = None  # merged-region width; default d_m - 1

    def __post_init__(self):
        if self.d_m < 1:
            raise ValueError("d_m must be >= 1")
        if self.ell is not None and self.ell < 1:
            raise ValueError("ell must be >= 1")


def _strip(cfg: SurgeryConfig):
    if cfg.kind == "repetition":
        layout, schedule = build_repetition(cfg.d)
        frozen = (1 << 0) | (1 << (cfg.d - 1))
    elif cfg.kind == "surface":
        ell = cfg.ell if cfg.ell is not None else cfg.d_m - 1
        cols = ell + 2
        if cols % 2 == 0:
            cols += 1
        layout, schedule = build_surface(cfg.d, cols)
        dz = layout.params["dz"]
        frozen = 0
        for r in range(cfg.d):
            frozen |= 1 << (r * dz)
            frozen |= 1 << (r * dz + dz - 1)
    else:
        raise ValueError(f"unknown surgery code kind {cfg.kind!r}")
    return layout, schedule, frozen


class TimelikeExperiment:
    """Monte Carlo for the merge-window timelike failure rate."""

    def __init__(self, cfg: SurgeryConfig, params: NoiseParams,
                 meas_flip_prob: float | None = None):
        self.cfg = cfg
        code_kind = "repetition" if cfg.kind == "repetition" else "surface"
        self.noise = GateNoise(params, code_kind, meas_flip_prob=meas_flip_prob)
        layout, schedule, frozen = _strip(cfg)
        self.layout = layout
        first = prep_first_round(layout, schedule)
        self.x_slots = [i for i, s in enumerate(layout.stabilizers)
                        if s.kind == "X"]
        self.x_slot_mask = sum(1 << s for s in self.x_slots)
        self.plan = CircuitPlan(
            layout=layout, noise=self.noise,
            rounds=[(first, True)] + [(schedule, True)] * (cfg.d_m - 1),
            reference_slots=(1 << len(layout.stabilizers)) - 1,
            frozen=frozen,
        )
        self.graph = build_graphs(self.plan)["X"]

    def run_shot(self, master_seed: int, shot: int) -> dict:
        rng = shot_rng(master_seed, shot)
        return self.decode_record(run_plan(self.plan, rng))

    def run_injected(self, inject: dict) -> dict:
        """Noiseless run with explicit injected faults (figure reproductions)."""
        return self.decode_record(run_plan(self.plan, rng=None, inject=inject))

    def decode_record(self, rec) -> dict:
        dets = []
        for li, bits in enumerate(diff_layers(rec.syndrome_history,
                                              self.plan.reference_slots)):
            for slot in self.x_slots:
                if (bits >> slot) & 1:
                    dets.append((slot, 1 + li))
        _, round1_flips, _ = decode(self.graph, dets)
        v1 = rec.syndrome_history[0] & self.x_slot_mask
        v_tilde = v1 ^ round1_flips
        reported = bin(v_tilde).count("1") % 2
        return {"reported_parity": reported, "true_parity": 0,
                "failures": int(reported != 0)}

    def meas_flip_injection(self, slot: int, round_index: int):
        """Injection key flipping the reading of stabilizer `slot` in the
        given round (0-based)."""
        schedule = self.plan.rounds[round_index][0]
        meas_step = len(schedule.timesteps) - 1
        step = schedule.timesteps[meas_step]
        anc = self.layout.stabilizers[slot].ancilla
        for i, op in enumerate(step.ops):
            if op.kind.startswith("meas") and op.qubits[0] == anc:
                return (round_index, meas_step, i), ("flip",)
        raise LookupError(f"no measurement of slot {slot} found")


def run_timelike_shot(cfg: SurgeryConfig, params: NoiseParams, seed: int) -> dict:
    """One-off convenience wrapper (builds the graph each call)."""
    return TimelikeExperiment(cfg, params).run_shot(seed, 0)


# -- ansatz fitting ----------------------------------------------------------


@dataclass
class FitResult:
    a: float
    b: float
    c: float
    residual: float
    degenerate: bool = False

    def evaluate(self, prefactor: float, d: int, loss_ratio: float) -> float:
        return prefactor * self.a * (self.b * loss_ratio) ** (self.c * d)


def fit_ansatz(points: list[tuple[int, float, float]],
               prefactors: list[float] | None = None) -> FitResult:
    """Fit rate = prefactor * a * (b * r)^(c * d) by linear least squares in
    log space.

    points: (d, r, rate) triples; prefactors: the d_x*t (memory) or
    ell*d_x (timelike) normalisation per point, default 1.
    """
    if prefactors is None:
        prefactors = [1.0] * len(points)
    distinct = {(d, r) for d, r, _ in points}
    if len(distinct) < 3:
        raise ValueError("need at least 3 distinct (d, r) points to fit")
    rows = []
    ys = []
    for (d, r, rate), pref in zip(points, prefactors):
        if rate <= 0.0 or r <= 0.0:
            raise ValueError("rates and loss ratios must be positive")
        rows.append([1.0, float(d), d * math.log(r)])
        ys.append(math.log(rate / pref))
    A = np.array(rows)
    y = np.array(ys)
    coef, res, rank, _ = np.linalg.lstsq(A, y, rcond=None)
    alpha, beta, gam = coef
    residual = float(res[0]) if len(res) else 0.0
    if abs(gam) < 1e-12:
        return FitResult(a=math.exp(alpha), b=1.0, c=0.0,
                         residual=residual, degenerate=True)
    return FitResult(a=math.exp(alpha), b=math.exp(beta / gam), c=float(gam),
                     residual=residual)
