"""Pauli-frame Monte Carlo engine.

Errors are tracked as x/z bit masks over the circuit qubits (Python ints,
bit q = qubit q).  Propagation through CNOT follows the Heisenberg rules
X_c -> X_c X_t, Z_t -> Z_c Z_t; measurement in a basis flips iff the
anticommuting mask bit is set.  Toffoli gates propagate Pauli frames as
the identity: the conditional-Z effect of Z errors on the target block is
restored by `apply_toffoli_twirl` at the protocol level, and X errors
reaching a Toffoli have probability < 1e-9 in every regime simulated here.

Per-shot randomness comes from counter-based Philox streams keyed by
(master_seed, shot_index), so results are independent of how shots are
distributed over workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .codes import CircuitSchedule, CodeLayout, Op, Timestep
from .noise import (
    MeasurementError,
    NoiseParams,
    PauliChannel,
    cnot_channel,
    idle_channel,
    prep_channels,
    toffoli_channel,
    x_measurement,
    x_measurement_idle_time,
    x_measurement_model,
    z_measurement,
)

__all__ = [
    "PauliFrame",
    "ShotRecord",
    "GateNoise",
    "FrameWalker",
    "shot_rng",
    "apply_toffoli_twirl",
    "inject_crosstalk",
    "run_memory_shot",
]


def shot_rng(master_seed: int, shot_index: int) -> np.random.Generator:
    """Counter-based per-shot stream; identical regardless of thread count."""
    return np.random.Generator(np.random.Philox(key=(master_seed << 20) + shot_index))


@dataclass
class PauliFrame:
    x: int = 0
    z: int = 0

    def weight_z(self, qubits) -> int:
        return sum((self.z >> q) & 1 for q in qubits)

    def copy(self) -> "PauliFrame":
        return PauliFrame(self.x, self.z)


@dataclass
class ShotRecord:
    syndrome_history: list[int]  # per executed round, reading bits by ancilla slot
    final_frame: PauliFrame
    accepted: bool = True
    rounds_used: int = 0
    aux: dict = field(default_factory=dict)


@dataclass(frozen=True)
class _Outcome:
    # Per-slot Pauli masks; slot i refers to op.qubits[i].
    x_slots: tuple[int, ...]
    z_slots: tuple[int, ...]


class GateNoise:
    """Resolves circuit operations to sampled channels and step durations."""

    def __init__(self, params: NoiseParams, code_kind: str,
                 meas_flip_prob: float | None = None, perfect: bool = False):
        self.params = params
        self.perfect = perfect
        cn, t_cnot = cnot_channel(params)
        self.t_cnot = t_cnot
        preps = prep_channels(params)
        self.durations = {
            "prep": preps["plus_time"],
            "cnot": t_cnot,
            "meas": x_measurement_idle_time(params),
        }
        if meas_flip_prob is not None:
            x_meas = MeasurementError(meas_flip_prob, self.durations["meas"])
        elif params.regime_preset is not None:
            x_meas = x_measurement(params, code_kind)
        else:
            x_meas = x_measurement_model(params, code_kind)
        self.meas_flip = {"meas_x": x_meas.flip_prob,
                          "meas_z": z_measurement(params.alpha_sq).flip_prob}
        self._channels: dict = {
            "cnot": _compile_channel(cn),
            "toffoli": _compile_channel(toffoli_channel(params)),
            "prep_plus": _compile_channel(preps["plus"]),
            "prep_zero": _compile_channel(preps["zero"]),
        }
        for kind, dur in self.durations.items():
            self._channels["idle@" + kind] = _compile_channel(
                idle_channel(params, dur))

    def channel(self, op_kind: str, step_duration: str):
        """(cumulative probabilities, outcomes) for a gate/prep/idle location."""
        if self.perfect:
            return None
        key = "idle@" + step_duration if op_kind == "idle" else op_kind
        return self._channels[key]

    def measurement_flip_prob(self, op_kind: str) -> float:
        return 0.0 if self.perfect else self.meas_flip[op_kind]


def _compile_channel(channel: PauliChannel):
    outcomes = []
    probs = []
    for x_mask, z_mask, p in channel.masks():
        if p == 0.0:
            continue
        x_slots = tuple((x_mask >> i) & 1 for i in range(channel.arity))
        z_slots = tuple((z_mask >> i) & 1 for i in range(channel.arity))
        outcomes.append(_Outcome(x_slots, z_slots))
        probs.append(p)
    return np.cumsum(probs), outcomes


class FrameWalker:
    """Stateful Pauli-frame simulator for one shot.

    Runs schedules timestep by timestep, sampling one channel outcome per
    location, and records measurement readings.  `inject` places extra
    deterministic Pauli errors before a given (timestep, op) location,
    which the oracle tests and the decoding-graph enumerator both use.
    """

    def __init__(self, n_qubits: int, noise: GateNoise,
                 rng: np.random.Generator | None = None):
        self.n_qubits = n_qubits
        self.noise = noise
        self.rng = rng
        self.frame = PauliFrame()
        # Bit q set while qubit q is in an unentangled computational-basis
        # state; Z errors there act trivially and are absorbed.
        self.computational: int = 0
        # Ideal qubits: ops touching them never sample noise.
        self.frozen: int = 0
        # Deterministic fault injection for exhaustive tests: noisy-op visit
        # counter -> ("flip",) or (x_mask, z_mask), applied at that visit.
        self.visit_counter: int = 0
        self.forced: dict[int, tuple] | None = None
        self.trace: list[tuple[str, tuple[int, ...]]] | None = None

    def _is_frozen(self, qubits: tuple[int, ...]) -> bool:
        return self.frozen != 0 and any((self.frozen >> q) & 1 for q in qubits)

    # -- elementary actions ------------------------------------------------

    def inject(self, x_add: int, z_add: int):
        self.frame.x ^= x_add
        self.frame.z ^= z_add & ~self.computational

    def _apply_outcome(self, outcome: _Outcome, qubits: tuple[int, ...]):
        for slot, q in enumerate(qubits):
            if outcome.x_slots[slot]:
                self.frame.x ^= 1 << q
            if outcome.z_slots[slot] and not (self.computational >> q) & 1:
                self.frame.z ^= 1 << q

    def _propagate(self, op: Op):
        if op.kind == "cnot":
            c, t = op.qubits
            if (self.frame.x >> c) & 1:
                self.frame.x ^= 1 << t
            if (self.frame.z >> t) & 1:
                self.frame.z ^= 1 << c
            both = (self.computational >> c) & (self.computational >> t) & 1
            if not both:
                self.computational &= ~((1 << c) | (1 << t))
        elif op.kind == "toffoli":
            # Identity on the Pauli frame (see module docstring); the state
            # stays computational only if all three inputs were.
            c1, c2, t = op.qubits
            alln = ((self.computational >> c1) & (self.computational >> c2)
                    & (self.computational >> t) & 1)
            if not alln:
                self.computational &= ~((1 << c1) | (1 << c2) | (1 << t))

    def run_timestep(self, step: Timestep, noisy: bool = True,
                     inject: dict | None = None):
        """Execute one timestep; returns {qubit: reading} for measurements.

        `inject` maps op index within this step to (x_mask, z_mask) errors
        placed immediately after that op (or, for measurements, a reading
        flip when the mask pair is ("flip", qubit)).
        """
        readings: dict[int, int] = {}
        n_ops = len(step.ops)
        u = self.rng.random(n_ops) if (noisy and self.rng is not None) else None
        for i, op in enumerate(step.ops):
            forced = None
            if noisy:
                if self.trace is not None:
                    self.trace.append((op.kind, op.qubits))
                if self.forced is not None:
                    forced = self.forced.get(self.visit_counter)
                self.visit_counter += 1
            if op.kind in ("prep_plus", "prep_zero"):
                q = op.qubits[0]
                mask = ~(1 << q)
                self.frame.x &= mask
                self.frame.z &= mask
                if op.kind == "prep_zero":
                    self.computational |= 1 << q
                else:
                    self.computational &= mask
                if noisy and u is not None and not self._is_frozen(op.qubits):
                    self._sample(op, step.duration, u[i])
            elif op.kind in ("meas_x", "meas_z"):
                q = op.qubits[0]
                bit = (self.frame.z >> q) & 1 if op.kind == "meas_x" \
                    else (self.frame.x >> q) & 1
                if noisy and u is not None and not self._is_frozen(op.qubits) \
                        and u[i] < self.noise.measurement_flip_prob(op.kind):
                    bit ^= 1
                if op.kind == "meas_x":
                    self.computational &= ~(1 << q)
                else:
                    self.computational |= 1 << q
                if inject and i in inject and inject[i][0] == "flip":
                    bit ^= 1
                if forced is not None and forced[0] == "flip":
                    bit ^= 1
                readings[q] = bit
            else:
                self._propagate(op)
                if noisy and u is not None and not self._is_frozen(op.qubits):
                    self._sample(op, step.duration, u[i])
            if inject and i in inject and inject[i][0] != "flip":
                x_add, z_add = inject[i]
                self.inject(x_add, z_add)
            if forced is not None and forced[0] != "flip":
                self.inject(forced[0], forced[1])
        return readings

    def _sample(self, op: Op, duration: str, u: float):
        compiled = self.noise.channel(op.kind, duration)
        if compiled is None:
            return
        cum, outcomes = compiled
        if len(outcomes) == 0 or u >= cum[-1]:
            return
        idx = int(np.searchsorted(cum, u, side="right"))
        self._apply_outcome(outcomes[idx], op.qubits)

    def run_schedule(self, schedule: CircuitSchedule, noisy: bool = True,
                     inject_at: dict | None = None) -> dict[int, int]:
        """Run a whole schedule; inject_at maps step index -> {op index: error}."""
        readings: dict[int, int] = {}
        for s, step in enumerate(schedule.timesteps):
            per_step = inject_at.get(s) if inject_at else None
            readings.update(self.run_timestep(step, noisy=noisy, inject=per_step))
        return readings


# -- protocol-level error processes -----------------------------------------


def apply_toffoli_twirl(frame: PauliFrame, block_a, block_c, d: int,
                        rng: np.random.Generator) -> tuple[PauliFrame, bool]:
    """Twirling rule for Z errors on the Toffoli target block.

    k = weight of the Z frame on block C before the controlled-g_A rungs.
    If k > 0 the ancilla readout acquires a random flip; for 0 < k < d the
    mirrored Z pattern lands on block A with probability 1/2; for k = d
    the logical Z lands on block A with certainty.

    Returns the updated frame and whether to flip the ancilla reading.
    """
    support = [i for i, q in enumerate(block_c) if (frame.z >> q) & 1]
    k = len(support)
    if k == 0:
        return frame, False
    if k > d:
        raise AssertionError("Z support on block C exceeds the block size")
    flip = bool(rng.random() < 0.5)
    out = frame.copy()
    if k == d:
        for q in block_a:
            out.z ^= 1 << q
    elif rng.random() < 0.5:
        for i in support:
            out.z ^= 1 << block_a[i]
    return out, flip


def inject_crosstalk(frame: PauliFrame, layout: CodeLayout, p_double: float,
                     p_triple: float, rng: np.random.Generator) -> PauliFrame:
    """One round of ATS micro-oscillation errors, applied just before readout.

    Every vertically aligned data pair picks up ZZ with probability p_double;
    every (pair, flanking X-ancilla) triple picks up ZZZ with probability
    p_triple, the ancilla part flipping the imminent X readout; boundary
    (data, X-ancilla) pairs pick up ZZ with probability p_triple.
    """
    from .codes import boundary_crosstalk_pairs, vertical_data_pairs

    if p_double == 0.0 and p_triple == 0.0:
        return frame
    out = frame.copy()
    pairs = vertical_data_pairs(layout)
    u = rng.random(2 * len(pairs))
    for i, (d1, d2, xanc) in enumerate(pairs):
        if u[2 * i] < p_double:
            out.z ^= (1 << d1) | (1 << d2)
        if xanc is not None and u[2 * i + 1] < p_triple:
            out.z ^= (1 << d1) | (1 << d2) | (1 << xanc)
    bpairs = boundary_crosstalk_pairs(layout)
    ub = rng.random(len(bpairs))
    for i, (dq, anc) in enumerate(bpairs):
        if ub[i] < p_triple:
            out.z ^= (1 << dq) | (1 << anc)
    return out


# -- circuit plans -----------------------------------------------------------


@dataclass(frozen=True)
class CrosstalkLocation:
    x_mask: int
    z_mask: int
    probability: float
    split: bool  # triples are decomposed for decoding (data part / ancilla part)
    anc_z_mask: int = 0  # ancilla part when split


@dataclass
class CircuitPlan:
    """A full multi-round experiment: schedules per round plus protocol rules.

    reference_slots: stabilizer slots whose round-1 outcome defines the
    code gauge (state preparation / lattice-surgery merges): those slots
    produce no layer-1 detectors, and sign-fix chains, if given, are
    applied from their round-1 readings.
    """

    layout: CodeLayout
    noise: GateNoise
    rounds: list[tuple[CircuitSchedule, bool]]  # (schedule, noisy)
    reference_slots: int = 0  # stabilizer-slot mask
    sign_fix_chains: dict[int, int] | None = None  # stabilizer slot -> z mask
    crosstalk: list[CrosstalkLocation] = field(default_factory=list)
    frozen: int = 0  # qubit mask with no fault locations (ideal qubits)

    @property
    def ancillas(self) -> list[int]:
        return [s.ancilla for s in self.layout.stabilizers]

    @property
    def all_slots(self) -> int:
        return (1 << len(self.layout.stabilizers)) - 1

    def n_noisy_rounds(self) -> int:
        return sum(1 for _, noisy in self.rounds if noisy)


def run_plan(plan: CircuitPlan, rng: np.random.Generator | None,
             inject: dict | None = None,
             walker: FrameWalker | None = None) -> ShotRecord:
    """Execute a plan; returns per-round packed readings and the final frame.

    inject: {(round, step, op_index): ("flip",) | (x_mask, z_mask)} placed
    after the given op, or {(round, "crosstalk", loc_index): part} with part
    in {"all", "data", "anc"} for crosstalk locations.
    """
    if walker is None:
        walker = FrameWalker(plan.layout.n_qubits, plan.noise, rng)
    walker.frozen = plan.frozen
    ancillas = plan.ancillas
    history: list[int] = []
    for k, (schedule, noisy) in enumerate(plan.rounds):
        readings: dict[int, int] = {}
        n_steps = len(schedule.timesteps)
        for s, step in enumerate(schedule.timesteps):
            if s == n_steps - 1 and noisy:
                _apply_crosstalk_locations(plan, walker, k, rng, inject)
            per_op = _collect_injections(inject, k, s, step)
            readings.update(walker.run_timestep(
                step, noisy=noisy, inject=per_op))
        history.append(_pack(readings, ancillas))
    # Sign fix: the gauge chosen by the round-1 readings is fixed once, at
    # the end, from the classical record (a Pauli-frame correction).  Fixing
    # it mid-run would silently absorb round-1 reading flips into the gauge
    # and break fault tolerance.
    apply_sign_fix(plan, history, walker)
    return ShotRecord(syndrome_history=history, final_frame=walker.frame.copy(),
                      rounds_used=plan.n_noisy_rounds())


def apply_sign_fix(plan: CircuitPlan, history: list[int], walker: FrameWalker):
    if plan.sign_fix_chains is not None and history:
        for slot, chain in plan.sign_fix_chains.items():
            if (history[0] >> slot) & 1:
                walker.inject(0, chain)


def _collect_injections(inject, k, s, step):
    if not inject:
        return None
    per_op = {}
    for i in range(len(step.ops)):
        key = (k, s, i)
        if key in inject:
            per_op[i] = inject[key]
    return per_op or None


def _apply_crosstalk_locations(plan, walker, round_idx, rng, inject):
    for j, loc in enumerate(plan.crosstalk):
        key = (round_idx, "crosstalk", j)
        part = inject.get(key) if inject else None
        if part is None:
            if rng is not None and rng.random() < loc.probability:
                walker.inject(loc.x_mask, loc.z_mask)
        elif part == "all":
            walker.inject(loc.x_mask, loc.z_mask)
        elif part == "data":
            walker.inject(loc.x_mask, loc.z_mask & ~loc.anc_z_mask)
        elif part == "anc":
            walker.inject(0, loc.anc_z_mask)


def diff_layers(history: list[int], reference_slots: int = 0) -> list[int]:
    """Detector layers: XOR of consecutive readings.  Layer 1 compares the
    first readings against the quiet reference, except on slots whose first
    outcome itself defines the gauge (those bits are masked off)."""
    out = []
    prev = 0
    for k, readings in enumerate(history):
        bits = readings ^ prev
        if k == 0:
            bits &= ~reference_slots
        out.append(bits)
        prev = readings
    return out


# -- memory shots ------------------------------------------------------------


def crosstalk_locations(layout: CodeLayout, p_double: float,
                        p_triple: float) -> list[CrosstalkLocation]:
    """Per-round correlated-error locations from the ATS geometry."""
    from .codes import boundary_crosstalk_pairs, vertical_data_pairs

    if p_double == 0.0 and p_triple == 0.0:
        return []
    locs = []
    for d1, d2, xanc in vertical_data_pairs(layout):
        pair = (1 << d1) | (1 << d2)
        if p_double > 0.0:
            locs.append(CrosstalkLocation(0, pair, p_double, split=False))
        if xanc is not None and p_triple > 0.0:
            locs.append(CrosstalkLocation(0, pair | (1 << xanc), p_triple,
                                          split=True, anc_z_mask=1 << xanc))
    if p_triple > 0.0:
        for dq, anc in boundary_crosstalk_pairs(layout):
            locs.append(CrosstalkLocation(0, (1 << dq) | (1 << anc), p_triple,
                                          split=False))
    return locs


def memory_plan(layout: CodeLayout, schedule: CircuitSchedule, rounds: int,
                noise: GateNoise, perfect_final_round: bool = True,
                crosstalk: tuple[float, float] | None = None) -> CircuitPlan:
    plan_rounds = [(schedule, True)] * rounds
    if perfect_final_round:
        plan_rounds = plan_rounds + [(schedule, False)]
    locs = (crosstalk_locations(layout, *crosstalk) if crosstalk else [])
    return CircuitPlan(layout=layout, noise=noise, rounds=plan_rounds,
                       crosstalk=locs)


def run_memory_shot(layout: CodeLayout, schedule: CircuitSchedule, rounds: int,
                    noise: GateNoise, rng_seed_or_rng,
                    perfect_final_round: bool = True,
                    crosstalk: tuple[float, float] | None = None) -> ShotRecord:
    """`rounds` noisy syndrome-measurement rounds, optionally followed by one
    noiseless round; readings are packed by stabilizer slot per round."""
    rng = (rng_seed_or_rng if isinstance(rng_seed_or_rng, np.random.Generator)
           else shot_rng(int(rng_seed_or_rng), 0))
    plan = memory_plan(layout, schedule, rounds, noise,
                       perfect_final_round, crosstalk)
    return run_plan(plan, rng)


def _pack(readings: dict[int, int], ancillas: list[int]) -> int:
    bits = 0
    for slot, anc in enumerate(ancillas):
        if readings.get(anc, 0):
            bits |= 1 << slot
    return bits
