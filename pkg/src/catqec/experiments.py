"""Monte Carlo experiment runners: logical memory and statistics helpers.

Shots use counter-based per-shot RNG streams, so the same (config, seed)
produces identical counts for any worker layout; parallel execution is
plain process-level fan-out over shot ranges.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .codes import build_repetition, build_surface
from .decoder.graph import build_graphs
from .decoder.mwpm import decide_failure, decode
from .noise import NoiseParams, crosstalk_rates
from .pauli_sim import (
    FrameWalker,
    GateNoise,
    diff_layers,
    memory_plan,
    run_plan,
    shot_rng,
)
from .stop import StopState

__all__ = ["MCResult", "wilson", "MemoryRepExperiment", "MemorySurfaceExperiment",
           "run_experiment"]


@dataclass
class MCResult:
    shots: int
    failures: int
    extra: dict = field(default_factory=dict)

    @property
    def rate(self) -> float:
        return self.failures / self.shots if self.shots else 0.0

    @property
    def stderr(self) -> float:
        lo, hi = wilson(self.failures, self.shots)
        return (hi - lo) / 2.0

    def merge(self, other: "MCResult") -> "MCResult":
        extra = dict(self.extra)
        for k, v in other.extra.items():
            extra[k] = extra.get(k, 0) + v
        return MCResult(self.shots + other.shots,
                        self.failures + other.failures, extra)


def wilson(k: int, n: int, z: float = 1.0) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion (z=1: ~68%)."""
    if n == 0:
        return 0.0, 1.0
    p = k / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return max(0.0, center - half), min(1.0, center + half)


class MemoryRepExperiment:
    """Repetition-code logical-Z memory: STOP-terminated rounds followed by
    one noiseless round, full-history MWPM."""

    def __init__(self, d: int, params: NoiseParams,
                 meas_flip_prob: float | None = None):
        self.d = d
        self.params = params
        self.layout, self.schedule = build_repetition(d)
        self.noise = GateNoise(params, "repetition", meas_flip_prob=meas_flip_prob)
        self._graphs: dict[int, object] = {}

    def graph(self, rounds: int):
        if rounds not in self._graphs:
            plan = memory_plan(self.layout, self.schedule, rounds, self.noise,
                               perfect_final_round=True)
            self._graphs[rounds] = build_graphs(plan)["X"]
        return self._graphs[rounds]

    def run_shot(self, master_seed: int, shot: int) -> dict:
        rng = shot_rng(master_seed, shot)
        walker = FrameWalker(self.layout.n_qubits, self.noise, rng)
        state = StopState(t=(self.d - 1) // 2)
        ancillas = [s.ancilla for s in self.layout.stabilizers]
        history: list[int] = []
        while True:
            readings = walker.run_schedule(self.schedule, noisy=True)
            packed = _pack(readings, ancillas)
            history.append(packed)
            if state.consume(packed):
                break
        readings = walker.run_schedule(self.schedule, noisy=False)
        history.append(_pack(readings, ancillas))
        rounds = len(history) - 1
        graph = self.graph(rounds)
        dets = _detectors(history, 0, self.layout, "X")
        correction, _, _ = decode(graph, dets)
        fail = decide_failure(self.layout, graph, correction, walker.frame.z)
        return {"failures": int(fail), "rounds": rounds}


class MemorySurfaceExperiment:
    """Thin-surface-code memory: d_z noisy rounds plus one noiseless round,
    independent MWPM on the X- and Z-stabilizer graphs."""

    def __init__(self, dx: int, dz: int, params: NoiseParams,
                 rounds: int | None = None,
                 g2_mhz: float | None = None,
                 meas_flip_prob: float | None = None,
                 track_x_failures: bool = False):
        self.dx, self.dz = dx, dz
        self.rounds = rounds if rounds is not None else dz
        self.params = params
        self.track_x = track_x_failures
        self.layout, self.schedule = build_surface(dx, dz)
        self.noise = GateNoise(params, "surface", meas_flip_prob=meas_flip_prob)
        crosstalk = None
        if g2_mhz is not None:
            crosstalk = crosstalk_rates(g2_mhz, params.alpha_sq)
        self.plan = memory_plan(self.layout, self.schedule, self.rounds,
                                self.noise, perfect_final_round=True,
                                crosstalk=crosstalk)
        graphs = build_graphs(self.plan)
        self.graph_x = graphs["X"]
        self.graph_z = graphs["Z"]

    def run_shot(self, master_seed: int, shot: int) -> dict:
        rng = shot_rng(master_seed, shot)
        rec = run_plan(self.plan, rng)
        dets = _detectors(rec.syndrome_history, 0, self.layout, "X")
        correction, _, _ = decode(self.graph_x, dets)
        fail_z = decide_failure(self.layout, self.graph_x, correction,
                                rec.final_frame.z)
        out = {"failures": int(fail_z)}
        if self.track_x:
            dets = _detectors(rec.syndrome_history, 0, self.layout, "Z")
            correction, _, _ = decode(self.graph_z, dets)
            out["x_failures"] = int(decide_failure(
                self.layout, self.graph_z, correction, rec.final_frame.x))
        return out


def _pack(readings: dict[int, int], ancillas: list[int]) -> int:
    bits = 0
    for slot, anc in enumerate(ancillas):
        if readings.get(anc, 0):
            bits |= 1 << slot
    return bits


def _detectors(history, reference_slots, layout, kind):
    slots = [i for i, s in enumerate(layout.stabilizers) if s.kind == kind]
    dets = []
    for li, bits in enumerate(diff_layers(history, reference_slots)):
        for slot in slots:
            if (bits >> slot) & 1:
                dets.append((slot, 1 + li))
    return dets


# -- parallel driver ---------------------------------------------------------

_WORKER_EXP = None


def _worker_init(factory, kwargs):
    global _WORKER_EXP
    _WORKER_EXP = factory(**kwargs)


def _worker_chunk(args):
    master_seed, start, count = args
    failures = 0
    extra: dict = {}
    for shot in range(start, start + count):
        out = _WORKER_EXP.run_shot(master_seed, shot)
        failures += out.pop("failures")
        for k, v in out.items():
            extra[k] = extra.get(k, 0) + v
    return failures, extra


def run_experiment(factory, kwargs: dict, shots: int, master_seed: int,
                   threads: int = 0) -> MCResult:
    """Run `shots` independent shots of factory(**kwargs), fanning out over
    processes.  Results are identical for any thread count."""
    if threads <= 0:
        threads = min(os.cpu_count() or 1, 8)
    if threads == 1 or shots < 256:
        _worker_init(factory, kwargs)
        failures, extra = _worker_chunk((master_seed, 0, shots))
        return MCResult(shots, failures, extra)
    chunk = max(64, shots // (threads * 8))
    ranges = [(master_seed, start, min(chunk, shots - start))
              for start in range(0, shots, chunk)]
    failures = 0
    extra: dict = {}
    with ProcessPoolExecutor(max_workers=threads, initializer=_worker_init,
                             initargs=(factory, kwargs)) as pool:
        for f, e in pool.map(_worker_chunk, ranges):
            failures += f
            for k, v in e.items():
                extra[k] = extra.get(k, 0) + v
    return MCResult(shots, failures, extra)
