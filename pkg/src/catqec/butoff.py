"""Bottom-up fault-tolerant |TOF> preparation on repetition-code blocks.

Pipeline per shot: prepare |1>_L (block A) and |0>_L (block C) with
stabilizer-measurement preparation terminated by the adaptive rule and
decoded over the full history, prepare |+>^d (block B) just in time,
apply the transversal CNOT B->C, then measure g_A = X_A CNOT_{B,C} with a
GHZ ancilla register: once projectively (a -1 reading triggers the Z_A
fix), then (d-1)/2 more times, each repeat followed by one round of error
detection on all three blocks.  Any nontrivial error-detection outcome or
inconsistent repeat reading aborts the shot.  Z errors sitting on block C
ahead of the Toffoli rungs are handled by the twirling rule; all readings
here are in the gauge where the noiseless protocol reads +1 everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .codes import CircuitSchedule, Op, Timestep, build_repetition, prep_first_round
from .decoder.graph import build_graphs
from .decoder.mwpm import decode
from .noise import NoiseParams
from .pauli_sim import (
    CircuitPlan,
    FrameWalker,
    GateNoise,
    apply_toffoli_twirl,
    diff_layers,
    run_plan,
    shot_rng,
)
from .stop import StopState

__all__ = ["TofStateRecord", "ButoffExperiment", "prepare_basis_state",
           "run_butoff", "grow", "logical_z_class", "PATTERN_NAMES"]

PATTERN_NAMES = ["I", "Z_A", "Z_B", "Z_AB", "Z_C", "Z_AC", "Z_BC", "Z_ABC"]


@dataclass
class TofStateRecord:
    accepted: bool
    pattern: int  # logical-Z triple e = (A | B<<1 | C<<2); valid iff accepted
    residual_z: tuple[int, int, int]  # physical Z masks per block (d bits each)
    rounds_used: int
    aborted_at: str | None = None
    aux: dict = field(default_factory=dict)


def logical_z_class(mask: int, d: int) -> bool:
    """Ideal decoding of a Z residual on one repetition block: the residual
    is logical iff its minimum-weight completion is the complement chain."""
    w = bin(mask & ((1 << d) - 1)).count("1")
    return w > d - w


class _PrepMachine:
    """Scheme-2 computational-basis preparation on a standalone strip,
    reusable for the new-block stage of the growing protocol.

    graph_noise lets fault-injection tests run a noiseless circuit while
    decoding with physically weighted graphs."""

    def __init__(self, d: int, noise: GateNoise, stop_budget: int | None = None,
                 graph_noise: GateNoise | None = None):
        self.d = d
        self.noise = noise
        self.graph_noise = graph_noise or noise
        self.layout, base = build_repetition(d)
        self.first = prep_first_round(self.layout, base)
        self.bulk = base
        self.t = stop_budget if stop_budget is not None else (d - 1) // 2
        self.chains = {slot: (1 << (slot + 1)) - 1
                       for slot in range(len(self.layout.stabilizers))}
        self._graphs: dict[int, object] = {}

    def graph(self, rounds: int):
        if rounds not in self._graphs:
            plan = CircuitPlan(
                layout=self.layout, noise=self.graph_noise,
                rounds=[(self.first, True)] + [(self.bulk, True)] * (rounds - 1),
                reference_slots=(1 << len(self.layout.stabilizers)) - 1,
                sign_fix_chains=self.chains,
            )
            self._graphs[rounds] = build_graphs(plan)["X"]
        return self._graphs[rounds]

    def run(self, rng: np.random.Generator, forced: dict | None = None,
            trace: list | None = None) -> tuple[int, int]:
        """One preparation; returns (residual z mask on data, rounds used).

        The returned residual is already decoded and corrected: the sign
        fix from the round-1 readings and the full-history MWPM correction
        are both applied.  No noiseless round is appended; whatever the
        trusted final syndrome could not see is the caller's problem.
        """
        walker = FrameWalker(self.layout.n_qubits, self.noise, rng)
        walker.forced = forced
        walker.trace = trace
        state = StopState(t=self.t)
        ancillas = [s.ancilla for s in self.layout.stabilizers]
        history: list[int] = []
        schedule = self.first
        while True:
            readings = walker.run_schedule(schedule, noisy=True)
            packed = 0
            for slot, anc in enumerate(ancillas):
                if readings.get(anc, 0):
                    packed |= 1 << slot
            history.append(packed)
            if state.consume(packed):
                break
            schedule = self.bulk
        rounds = len(history)
        for slot, chain in self.chains.items():
            if (history[0] >> slot) & 1:
                walker.inject(0, chain)
        ref = (1 << len(self.layout.stabilizers)) - 1
        dets = []
        for li, bits in enumerate(diff_layers(history, ref)):
            for slot in range(len(ancillas)):
                if (bits >> slot) & 1:
                    dets.append((slot, 1 + li))
        correction = 0
        if dets:
            # Edge supports already carry the sign-fix chains for matched
            # round-1 reading flips; no further adjustment is needed.
            correction, _, _ = decode(self.graph(rounds), dets)
        mask = (walker.frame.z ^ correction) & ((1 << self.d) - 1)
        # A logical-Z component is gauge on a computational basis state
        # (Z^d fixes |0>_L and |1>_L up to global phase): keep the
        # minimum-weight coset representative.
        if logical_z_class(mask, self.d):
            mask ^= (1 << self.d) - 1
        return mask, rounds


def prepare_basis_state(d: int, target: str, noise: GateNoise,
                        rng: np.random.Generator) -> tuple[int, int]:
    """Prepare |0>_L or |1>_L; returns (residual Z mask, rounds used).

    The logical value itself is classical bookkeeping (|1>_L differs by a
    frame X on the logical-X qubit and carries no extra Z noise); only the
    residual Z errors matter downstream.
    """
    if target not in ("zero", "one"):
        raise ValueError("target must be 'zero' or 'one'")
    return _PrepMachine(d, noise).run(rng)


class ButoffExperiment:
    """Monte Carlo for the full preparation protocol at distance d."""

    def __init__(self, d: int, params: NoiseParams,
                 meas_flip_prob: float | None = None):
        if d < 3 or d % 2 == 0:
            raise ValueError("d must be odd and >= 3")
        self.d = d
        self.params = params
        self.noise = GateNoise(params, "repetition", meas_flip_prob=meas_flip_prob)
        self.prep = _PrepMachine(d, self.noise)

        # Global register: data blocks A, B, C; per-block ancillas; GHZ.
        d_ = d
        self.block = {"A": list(range(0, d_)),
                      "B": list(range(d_, 2 * d_)),
                      "C": list(range(2 * d_, 3 * d_))}
        anc0 = 3 * d_
        self.anc = {"A": list(range(anc0, anc0 + d_ - 1)),
                    "B": list(range(anc0 + d_ - 1, anc0 + 2 * (d_ - 1))),
                    "C": list(range(anc0 + 2 * (d_ - 1), anc0 + 3 * (d_ - 1)))}
        self.ghz = list(range(anc0 + 3 * (d_ - 1), anc0 + 3 * (d_ - 1) + d_))
        self.n_qubits = self.ghz[-1] + 1
        self._ed_schedule = self._build_ed_schedule()
        self._ghz_schedule = self._build_ghz_schedule()
        self._plus_prep = Timestep("prep", [Op("prep_plus", (q,))
                                            for q in self.block["B"]])
        self._transversal = Timestep("cnot", [
            Op("cnot", (b, c)) for b, c in zip(self.block["B"], self.block["C"])
        ] + [Op("idle", (q,)) for q in self.block["A"]])

    # -- circuit pieces ------------------------------------------------------

    def _build_ed_schedule(self) -> CircuitSchedule:
        """One round of stabilizer measurement on all three blocks at once."""
        steps = []
        for kind, dur in (("prep", "prep"), ("c1", "cnot"),
                          ("c2", "cnot"), ("meas", "meas")):
            ops = []
            for blk in "ABC":
                data, anc = self.block[blk], self.anc[blk]
                for k, a in enumerate(anc):
                    if kind == "prep":
                        ops.append(Op("prep_plus", (a,)))
                    elif kind == "c1":
                        ops.append(Op("cnot", (a, data[k])))
                    elif kind == "c2":
                        ops.append(Op("cnot", (a, data[k + 1])))
                    else:
                        ops.append(Op("meas_x", (a,)))
                if kind in ("prep", "meas"):
                    ops += [Op("idle", (q,)) for q in data]
                elif kind == "c1":
                    ops.append(Op("idle", (data[-1],)))
                else:
                    ops.append(Op("idle", (data[0],)))
            steps.append(Timestep("prep" if kind == "prep" else
                                  "meas" if kind == "meas" else "cnot", ops))
        sched = CircuitSchedule(self.n_qubits, steps)
        sched.validate()
        return sched

    def _build_ghz_schedule(self) -> CircuitSchedule:
        """Controlled-g_A via a GHZ register: one GHZ qubit per Toffoli rung,
        entangle, rungs, the X_A CNOT, disentangle, measure the seed qubit.
        All waiting data qubits idle every timestep."""
        d = self.d
        g = self.ghz
        data_all = self.block["A"] + self.block["B"] + self.block["C"]
        steps = []

        def with_idles(ops: list[Op], busy: set[int], dur: str) -> Timestep:
            ops = ops + [Op("idle", (q,))
                         for q in data_all + g if q not in busy]
            return Timestep(dur, ops)

        steps.append(with_idles(
            [Op("prep_plus", (g[0],))] + [Op("prep_zero", (q,)) for q in g[1:]],
            set(g), "prep"))
        for e in range(d - 1):
            steps.append(with_idles([Op("cnot", (g[e], g[e + 1]))],
                                    {g[e], g[e + 1]}, "cnot"))
        rungs = [Op("toffoli", (g[i], self.block["B"][i], self.block["C"][i]))
                 for i in range(d)]
        steps.append(with_idles(
            rungs, set(g) | set(self.block["B"]) | set(self.block["C"]), "cnot"))
        steps.append(with_idles([Op("cnot", (g[0], self.block["A"][0]))],
                                {g[0], self.block["A"][0]}, "cnot"))
        for e in range(d - 2, -1, -1):
            steps.append(with_idles([Op("cnot", (g[e], g[e + 1]))],
                                    {g[e], g[e + 1]}, "cnot"))
        steps.append(with_idles([Op("meas_x", (g[0],))], {g[0]}, "meas"))
        sched = CircuitSchedule(self.n_qubits, steps)
        sched.validate()
        return sched

    # -- protocol ------------------------------------------------------------

    def _idle_block(self, walker, qubits, n_rounds, rng):
        """Idle-fill a block for whole stabilizer rounds of waiting."""
        for _ in range(n_rounds):
            for dur in ("prep", "cnot", "cnot", "meas"):
                step = Timestep(dur, [Op("idle", (q,)) for q in qubits])
                walker.run_timestep(step, noisy=True)

    def run_shot(self, master_seed: int, shot: int) -> dict:
        rec = self.run_record(shot_rng(master_seed, shot))
        out = {"failures": 0, "accepted": int(rec.accepted),
               "rounds": rec.rounds_used}
        for i, name in enumerate(PATTERN_NAMES):
            out[f"n_{name}"] = int(rec.accepted and rec.pattern == i)
        return out

    def run_record(self, rng: np.random.Generator,
                   forced: dict | None = None,
                   trace: dict | None = None) -> TofStateRecord:
        d = self.d
        forced = forced or {}
        walker = FrameWalker(self.n_qubits, self.noise, rng)
        walker.forced = forced.get("main")
        if trace is not None:
            for key in ("prep_a", "prep_c", "main"):
                trace.setdefault(key, [])
            walker.trace = trace["main"]

        # Stage 1: block preparations (standalone strips, then placed).
        mask_a, rounds_a = self.prep.run(
            rng, forced.get("prep_a"),
            trace["prep_a"] if trace is not None else None)
        mask_c, rounds_c = self.prep.run(
            rng, forced.get("prep_c"),
            trace["prep_c"] if trace is not None else None)
        for i in range(d):
            if (mask_a >> i) & 1:
                walker.frame.z ^= 1 << self.block["A"][i]
            if (mask_c >> i) & 1:
                walker.frame.z ^= 1 << self.block["C"][i]
        # The slower preparation sets the clock; the other block idles.
        wait = abs(rounds_a - rounds_c)
        if wait:
            slower_is_a = rounds_a < rounds_c
            qubits = self.block["A"] if slower_is_a else self.block["C"]
            self._idle_block(walker, qubits, wait, rng)
        # Block B is a product |+> state, prepared just in time.
        walker.run_timestep(self._plus_prep, noisy=True)

        # Stage 2: transversal CNOT B -> C.
        walker.run_timestep(self._transversal, noisy=True)

        rounds_used = max(rounds_a, rounds_c)
        # (d-1)/2 measurements of g_A, each followed by one round of error
        # detection; the first reading projects (a -1 outcome takes the Z_A
        # fix), later readings must agree with the tracked frame.  All
        # (d-1)/2 readings flipped is the documented accepted-Z_A channel.
        n_meas = (d - 1) // 2
        for j in range(n_meas):
            reading = self._measure_ga(walker, rng)
            if j == 0:
                if reading:  # Z_A fix on a -1 outcome
                    for q in self.block["A"]:
                        walker.frame.z ^= 1 << q
            elif reading:
                return self._abort(walker, rounds_used, f"ga_repeat_{j}")
            if not self._error_detection_round(walker, rng):
                return self._abort(walker, rounds_used, f"ed_{j}")

        residual = self._residuals(walker)
        pattern = sum(int(logical_z_class(residual[i], d)) << i
                      for i in range(3))
        return TofStateRecord(accepted=True, pattern=pattern,
                              residual_z=residual, rounds_used=rounds_used)

    def _measure_ga(self, walker, rng) -> int:
        """One g_A measurement; returns the reading in the quiet gauge."""
        twirled, flip = apply_toffoli_twirl(
            walker.frame, self.block["A"], self.block["C"], self.d, rng)
        walker.frame = twirled
        readings = walker.run_schedule(self._ghz_schedule, noisy=True)
        return readings[self.ghz[0]] ^ int(flip)

    def _error_detection_round(self, walker, rng) -> bool:
        """One detect-only stabilizer round on all blocks; True iff quiet."""
        readings = walker.run_schedule(self._ed_schedule, noisy=True)
        return not any(readings.values())

    def _residuals(self, walker) -> tuple[int, int, int]:
        out = []
        for blk in "ABC":
            mask = 0
            for i, q in enumerate(self.block[blk]):
                if (walker.frame.z >> q) & 1:
                    mask |= 1 << i
            out.append(mask)
        return tuple(out)

    def _abort(self, walker, rounds_used, where) -> TofStateRecord:
        return TofStateRecord(accepted=False, pattern=0,
                              residual_z=self._residuals(walker),
                              rounds_used=rounds_used, aborted_at=where)


def run_butoff(d: int, params: NoiseParams, rng_or_seed) -> TofStateRecord:
    """One shot of the preparation protocol."""
    rng = (rng_or_seed if isinstance(rng_or_seed, np.random.Generator)
           else shot_rng(int(rng_or_seed), 0))
    return ButoffExperiment(d, params).run_record(rng)


# -- growing protocol ---------------------------------------------------------


def grow(frame_z: int, d1: int, d2: int, params_or_noise, rng_or_seed,
         stop_budget: int | None = None,
         graph_noise: GateNoise | None = None) -> tuple[int, dict]:
    """Grow a distance-d1 repetition block to distance d2.

    frame_z is the input residual Z mask on the d1 data qubits.  Steps:
    initialise the d2-d1 new qubits in |0>, stabilise the new block
    (adaptive rounds + matching + sign-fix chains), then measure all
    distance-d2 stabilizers repeatedly; the boundary operator's first
    outcome is a fresh gauge whose -1 branch applies the Z chain on the
    original block.  Returns (residual Z mask on d2 qubits, info).
    """
    if not (3 <= d1 < d2) or d1 % 2 == 0 or d2 % 2 == 0:
        raise ValueError("need odd 3 <= d1 < d2")
    noise = (params_or_noise if isinstance(params_or_noise, GateNoise)
             else GateNoise(params_or_noise, "repetition"))
    graph_noise = graph_noise or noise
    rng = (rng_or_seed if isinstance(rng_or_seed, np.random.Generator)
           else shot_rng(int(rng_or_seed), 0))
    t2 = stop_budget if stop_budget is not None else (d2 - 1) // 2

    # Stage 1: prepare the new strip of d2-d1 qubits.
    new_mask, rounds_new = _prepare_strip(d2 - d1, noise, rng, t2,
                                          graph_noise)
    merged = (frame_z & ((1 << d1) - 1)) | (new_mask << d1)

    # Stage 2: merge by measuring all distance-d2 stabilizers.
    layout, schedule = build_repetition(d2)
    boundary_slot = d1 - 1  # stabilizer on qubits (d1-1, d1)
    chains = {boundary_slot: (1 << d1) - 1}
    plan = CircuitPlan(layout=layout, noise=noise,
                       rounds=[(schedule, True)],
                       reference_slots=1 << boundary_slot,
                       sign_fix_chains=chains)
    walker = FrameWalker(layout.n_qubits, noise, rng)
    walker.frame.z = merged
    state = StopState(t=t2)
    ancillas = [s.ancilla for s in layout.stabilizers]
    history: list[int] = []
    while True:
        readings = walker.run_schedule(schedule, noisy=True)
        packed = 0
        for slot, anc in enumerate(ancillas):
            if readings.get(anc, 0):
                packed |= 1 << slot
        history.append(packed)
        if state.consume(packed):
            break
    if (history[0] >> boundary_slot) & 1:
        walker.inject(0, chains[boundary_slot])
    dets = []
    for li, bits in enumerate(diff_layers(history, 1 << boundary_slot)):
        for slot in range(len(ancillas)):
            if (bits >> slot) & 1:
                dets.append((slot, 1 + li))
    correction = 0
    if dets:
        graph = _grow_graph(layout, schedule, graph_noise, len(history),
                            boundary_slot, chains)
        correction, _, _ = decode(graph, dets)
    residual = (walker.frame.z ^ correction) & ((1 << d2) - 1)
    return residual, {"rounds_new": rounds_new, "rounds_merge": len(history)}


_GROW_GRAPHS: dict = {}


def _grow_graph(layout, schedule, noise, rounds, boundary_slot, chains):
    key = (layout.params["d"], rounds, id(noise), boundary_slot)
    if key not in _GROW_GRAPHS:
        plan = CircuitPlan(layout=layout, noise=noise,
                           rounds=[(schedule, True)] * rounds,
                           reference_slots=1 << boundary_slot,
                           sign_fix_chains=chains)
        _GROW_GRAPHS[key] = build_graphs(plan)["X"]
    return _GROW_GRAPHS[key]


def _prepare_strip(n: int, noise: GateNoise, rng, stop_budget: int,
                   graph_noise: GateNoise | None = None) -> tuple[int, int]:
    """|0>^n strip preparation (n may be even; n=1 is a bare |0> qubit)."""
    if n == 1:
        # Single qubit: just a |0> preparation location.
        walker = FrameWalker(1, noise, rng)
        walker.run_timestep(Timestep("prep", [Op("prep_zero", (0,))]))
        return walker.frame.z & 1, 0
    machine = _StripPrep(n, noise, stop_budget, graph_noise)
    return machine.run(rng)


class _StripPrep(_PrepMachine):
    def __init__(self, n: int, noise: GateNoise, stop_budget: int,
                 graph_noise: GateNoise | None = None):
        from .codes import CodeLayout, Stabilizer

        self.d = n
        self.noise = noise
        self.graph_noise = graph_noise or noise
        data = list(range(n))
        stabs = [Stabilizer(ancilla=n + k, kind="X", support=(k, k + 1))
                 for k in range(n - 1)]
        self.layout = CodeLayout(
            kind="repetition", n_data=n, stabilizers=stabs,
            logical_x_support=(0,), logical_z_support=tuple(data),
            coords={q: (0.0, float(q)) for q in range(2 * n - 1)},
            params={"d": n})
        prep = Timestep("prep", [Op("prep_plus", (s.ancilla,)) for s in stabs]
                        + [Op("idle", (q,)) for q in data])
        c1 = Timestep("cnot", [Op("cnot", (s.ancilla, s.support[0]))
                               for s in stabs] + [Op("idle", (n - 1,))])
        c2 = Timestep("cnot", [Op("cnot", (s.ancilla, s.support[1]))
                               for s in stabs] + [Op("idle", (0,))])
        meas = Timestep("meas", [Op("meas_x", (s.ancilla,)) for s in stabs]
                        + [Op("idle", (q,)) for q in data])
        self.bulk = CircuitSchedule(2 * n - 1, [prep, c1, c2, meas])
        self.first = prep_first_round(self.layout, self.bulk)
        self.t = stop_budget
        self.chains = {slot: (1 << (slot + 1)) - 1
                       for slot in range(len(stabs))}
        self._graphs = {}
