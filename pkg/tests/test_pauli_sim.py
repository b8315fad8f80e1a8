"""Frame-engine correctness: tableau oracle, determinism, bias, twirl."""

import numpy as np
import pytest

from catqec.codes import build_repetition, build_surface, prep_first_round
from catqec.noise import NoiseParams, crosstalk_rates, regime
from catqec.pauli_sim import (
    CircuitPlan,
    FrameWalker,
    GateNoise,
    PauliFrame,
    apply_toffoli_twirl,
    diff_layers,
    inject_crosstalk,
    memory_plan,
    run_memory_shot,
    run_plan,
    shot_rng,
)
from oracle_tableau import Tableau, run_schedule_tableau

QUIET = GateNoise(regime(3), "repetition", perfect=True)


def _frame_vs_tableau(layout, schedule, rounds, injections, seed):
    """Compare per-round reading diffs between the frame walker and two
    aligned tableau runs (reference vs injected)."""
    n = layout.n_qubits
    ancillas = [s.ancilla for s in layout.stabilizers]

    def tableau_history(inject):
        tab = Tableau(n, np.random.default_rng(seed))
        history = []
        for k in range(rounds):
            per_round = {key[1:]: val for key, val in inject.items()
                         if key[0] == k}
            readings = run_schedule_tableau(tab, schedule, per_round)
            bits = 0
            for slot, anc in enumerate(ancillas):
                if readings.get(anc, 0):
                    bits |= 1 << slot
            history.append(bits)
        return history

    ref = tableau_history({})
    err = tableau_history(injections)
    tableau_flips = [a ^ b for a, b in zip(ref, err)]

    walker = FrameWalker(n, QUIET, None)
    frame_flips = []
    for k in range(rounds):
        per_round = {}
        for (kk, s, i), val in injections.items():
            if kk == k:
                per_round.setdefault(s, {})[i] = val
        readings = walker.run_schedule(schedule, noisy=False,
                                       inject_at=per_round)
        bits = 0
        for slot, anc in enumerate(ancillas):
            if readings.get(anc, 0):
                bits |= 1 << slot
        frame_flips.append(bits)
    return tableau_flips, frame_flips, walker.frame


def _random_injection(layout, schedule, rounds, rng):
    k = int(rng.integers(0, rounds))
    s = int(rng.integers(0, len(schedule.timesteps)))
    ops = schedule.timesteps[s].ops
    i = int(rng.integers(0, len(ops)))
    op = ops[i]
    x = z = 0
    for q in op.qubits:
        pauli = int(rng.integers(0, 4))
        if pauli in (1, 3):
            x |= 1 << q
        if pauli in (2, 3):
            z |= 1 << q
    return {(k, s, i): (x, z)}


@pytest.mark.parametrize("builder,args,rounds", [
    (build_repetition, (3,), 4),
    (build_surface, (3, 3), 3),
])
def test_frame_equals_tableau_memory(builder, args, rounds):
    """10^4 random single-fault injections: reading flips agree exactly
    with the full stabilizer-tableau simulation (codeword start)."""
    layout, schedule = builder(*args)
    first = prep_first_round(layout, schedule)
    rng = np.random.default_rng(20260809)
    checked = 0
    target = 10000
    while checked < target:
        inj = _random_injection(layout, schedule, rounds - 1, rng)
        # Shift injections past the projection round.
        inj = {(k + 1, s, i): v for (k, s, i), v in inj.items()}
        seed = int(rng.integers(0, 2**32))
        tab_flips, frame_flips, _ = _frame_vs_tableau_prep(
            layout, first, schedule, rounds, inj, seed)
        assert tab_flips == frame_flips, (inj, tab_flips, frame_flips)
        checked += 1


def _frame_vs_tableau_prep(layout, first, bulk, rounds, injections, seed):
    n = layout.n_qubits
    ancillas = [s.ancilla for s in layout.stabilizers]
    schedules = [first] + [bulk] * (rounds - 1)

    def tableau_history(inject):
        tab = Tableau(n, np.random.default_rng(seed))
        history = []
        for k, sched in enumerate(schedules):
            per_round = {key[1:]: val for key, val in inject.items()
                         if key[0] == k}
            readings = run_schedule_tableau(tab, sched, per_round)
            bits = 0
            for slot, anc in enumerate(ancillas):
                if readings.get(anc, 0):
                    bits |= 1 << slot
            history.append(bits)
        return history

    ref = tableau_history({})
    err = tableau_history(injections)
    tab_flips = [a ^ b for a, b in zip(ref, err)]

    walker = FrameWalker(n, QUIET, None)
    frame_flips = []
    for k, sched in enumerate(schedules):
        per_round = {}
        for (kk, s, i), val in injections.items():
            if kk == k:
                per_round.setdefault(s, {})[i] = val
        readings = walker.run_schedule(sched, noisy=False,
                                       inject_at=per_round)
        bits = 0
        for slot, anc in enumerate(ancillas):
            if readings.get(anc, 0):
                bits |= 1 << slot
        frame_flips.append(bits)
    return tab_flips, frame_flips, walker.frame


class TestDeterminism:
    def test_same_seed_same_shot(self):
        layout, schedule = build_repetition(5)
        noise = GateNoise(regime(1), "repetition")
        a = run_memory_shot(layout, schedule, 5, noise, shot_rng(7, 3))
        b = run_memory_shot(layout, schedule, 5, noise, shot_rng(7, 3))
        assert a.syndrome_history == b.syndrome_history
        assert (a.final_frame.x, a.final_frame.z) == \
            (b.final_frame.x, b.final_frame.z)

    def test_counter_streams_independent_of_order(self):
        layout, schedule = build_repetition(3)
        noise = GateNoise(regime(1), "repetition")
        fwd = [run_memory_shot(layout, schedule, 3, noise,
                               shot_rng(11, s)).syndrome_history
               for s in range(20)]
        rev = [run_memory_shot(layout, schedule, 3, noise,
                               shot_rng(11, s)).syndrome_history
               for s in reversed(range(20))]
        assert fwd == list(reversed(rev))


class TestBias:
    def test_z_only_noise_keeps_x_mask_zero(self):
        # With only Z-type channels (alpha -> large kills X rates), the
        # x mask never sets.
        params = NoiseParams(loss_ratio=1e-3, alpha_sq=60.0)
        layout, schedule = build_repetition(5)
        noise = GateNoise(params, "repetition", meas_flip_prob=1e-3)
        for s in range(200):
            rec = run_memory_shot(layout, schedule, 4, noise, shot_rng(3, s))
            assert rec.final_frame.x == 0


class TestTwirl:
    def test_k_zero_no_action(self):
        frame = PauliFrame(0, 0)
        out, flip = apply_toffoli_twirl(frame, [0, 1, 2], [3, 4, 5], 3,
                                        shot_rng(1, 1))
        assert (out.x, out.z) == (0, 0) and flip is False

    def test_k_one_mirrors_half_the_time(self):
        hits = flips = 0
        n = 4000
        for s in range(n):
            frame = PauliFrame(0, 1 << 3)  # one Z on block C slot 0
            out, flip = apply_toffoli_twirl(frame, [0, 1, 2], [3, 4, 5], 3,
                                            shot_rng(5, s))
            assert out.z & (1 << 3)  # C error stays
            if out.z & 1:  # mirrored onto A qubit 0
                hits += 1
            flips += flip
        assert abs(hits / n - 0.5) < 0.03
        assert abs(flips / n - 0.5) < 0.03

    def test_k_equals_d_adds_logical(self):
        for s in range(50):
            frame = PauliFrame(0, 0b111 << 3)
            out, _ = apply_toffoli_twirl(frame, [0, 1, 2], [3, 4, 5], 3,
                                         shot_rng(9, s))
            assert (out.z & 0b111) == 0b111  # Z_L on block A always


class TestCrosstalkInjection:
    def test_zero_rates_identity(self):
        layout, _ = build_surface(3, 3)
        frame = PauliFrame(0, 0b1010)
        out = inject_crosstalk(frame, layout, 0.0, 0.0, shot_rng(1, 1))
        assert (out.x, out.z) == (frame.x, frame.z)

    def test_pdouble_one_deterministic(self):
        from catqec.codes import vertical_data_pairs

        layout, _ = build_surface(3, 3)
        frame = inject_crosstalk(PauliFrame(), layout, 1.0, 0.0,
                                 shot_rng(2, 2))
        expect = 0
        for d1, d2, _ in vertical_data_pairs(layout):
            expect ^= (1 << d1) | (1 << d2)
        assert frame.z == expect

    def test_rates_from_formula(self):
        pd, pt = crosstalk_rates(1.0, 8.0)
        assert pd == pytest.approx(7.5e-5, rel=0.01)
        assert pt == pytest.approx(2.1e-6, rel=0.02)


class TestMemoryShot:
    def test_zero_noise_quiet(self):
        layout, schedule = build_repetition(3)
        rec = run_memory_shot(layout, schedule, 3, QUIET, shot_rng(1, 0))
        assert all(b == 0 for b in rec.syndrome_history)
        assert rec.final_frame.z == 0

    def test_single_z_two_detectors(self):
        # A mid-history data Z highlights the two adjacent ancillas once.
        layout, schedule = build_repetition(3)
        plan = memory_plan(layout, schedule, 3, QUIET, True)
        rec = run_plan(plan, None, inject={(1, 0, 3): (0, 1 << 1)})
        diffs = diff_layers(rec.syndrome_history, 0)
        assert diffs[1] == 0b11 and diffs[0] == 0 and diffs[2] == 0

    def test_edge_z_one_detector_plus_boundary(self):
        layout, schedule = build_repetition(3)
        plan = memory_plan(layout, schedule, 3, QUIET, True)
        rec = run_plan(plan, None, inject={(1, 0, 2): (0, 1 << 0)})
        diffs = diff_layers(rec.syndrome_history, 0)
        assert diffs[1] == 0b01

    def test_split_syndrome_from_iz_failure(self):
        # I(x)Z on the first CNOT layer: the two detectors split across
        # consecutive rounds (the diagonal-edge signature).
        layout, schedule = build_repetition(3)
        plan = memory_plan(layout, schedule, 3, QUIET, True)
        # op 1 of the first CNOT step is ancilla1 -> data1; Z on data 1.
        rec = run_plan(plan, None, inject={(1, 1, 1): (0, 1 << 1)})
        diffs = diff_layers(rec.syndrome_history, 0)
        assert diffs[1] == 0b01 and diffs[2] == 0b10
