"""Code layouts, stabilizer algebra, and schedule structure."""

import json

import pytest

from catqec.codes import (
    boundary_crosstalk_pairs,
    build_repetition,
    build_surface,
    prep_first_round,
    vertical_data_pairs,
)


class TestRepetition:
    def test_counts(self):
        layout, sched = build_repetition(3)
        assert layout.n_data == 3
        assert len(layout.stabilizers) == 2
        assert layout.n_qubits == 5
        layout5, _ = build_repetition(5)
        assert layout5.n_qubits == 2 * 5 - 1

    def test_schedule_shape(self):
        _, sched = build_repetition(5)
        assert len(sched.timesteps) == 4
        assert [s.duration for s in sched.timesteps] == \
            ["prep", "cnot", "cnot", "meas"]
        # Down-then-up neighbor order: first CNOT layer targets the lower
        # data index; edge data qubits idle once.
        c1, c2 = sched.timesteps[1], sched.timesteps[2]
        idles1 = [op.qubits[0] for op in c1.ops if op.kind == "idle"]
        idles2 = [op.qubits[0] for op in c2.ops if op.kind == "idle"]
        assert idles1 == [4] and idles2 == [0]

    def test_invalid(self):
        for d in (2, 4, 1, -3):
            with pytest.raises(ValueError):
                build_repetition(d)

    def test_logicals(self):
        layout, _ = build_repetition(5)
        assert layout.logical_x_support == (0,)
        assert layout.logical_z_support == (0, 1, 2, 3, 4)
        layout.check_commutation()


class TestSurface:
    @pytest.mark.parametrize("dx,dz", [(3, 3), (3, 5), (5, 7), (3, 7)])
    def test_counts(self, dx, dz):
        layout, sched = build_surface(dx, dz)
        assert layout.n_qubits == 2 * dx * dz - 1
        assert len(layout.stabilizers) == dx * dz - 1
        assert len(sched.timesteps) == 6

    def test_29_qubits_example(self):
        layout, _ = build_surface(3, 5)
        assert layout.n_qubits == 29

    def test_commutation_and_logicals(self):
        for dx, dz in ((3, 3), (3, 5), (5, 5)):
            layout, _ = build_surface(dx, dz)
            layout.check_commutation()
            assert len(layout.logical_x_support) == dx
            assert len(layout.logical_z_support) == dz

    def test_boundary_placement(self):
        # Weight-2 X stabilizers on top/bottom rows, weight-2 Z left/right.
        layout, _ = build_surface(3, 5)
        dx = 3
        for s in layout.stabilizers:
            if len(s.support) != 2:
                continue
            r = layout.coords[s.ancilla][0]
            c = layout.coords[s.ancilla][1]
            if s.kind == "X":
                assert r in (-0.5, dx - 0.5)
            else:
                assert c in (-0.5, 5 - 0.5)

    def test_z_basis_for_z_stabilizers(self):
        # Z stabilizers: CNOTs from data into a |0>-prepared, Z-measured
        # ancilla; never CZ, never an X-basis readout.
        layout, sched = build_surface(3, 3)
        z_ancs = {s.ancilla for s in layout.z_stabilizers()}
        preps = {op.qubits[0]: op.kind for op in sched.timesteps[0].ops
                 if op.kind.startswith("prep")}
        meas = {op.qubits[0]: op.kind for op in sched.timesteps[-1].ops
                if op.kind.startswith("meas")}
        for anc in z_ancs:
            assert preps[anc] == "prep_zero"
            assert meas[anc] == "meas_z"
        for step in sched.timesteps[1:5]:
            for op in step.ops:
                if op.kind == "cnot" and op.qubits[1] in z_ancs:
                    assert op.qubits[0] not in z_ancs  # data is the control

    def test_schedule_disjointness(self):
        _, sched = build_surface(5, 7)
        sched.validate()

    def test_interior_data_never_idles_in_cnot_steps(self):
        layout, sched = build_surface(3, 5)
        dz = 5
        interior = {r * dz + c for r in range(1, 2) for c in range(1, 4)}
        for step in sched.timesteps[1:5]:
            idle = {op.qubits[0] for op in step.ops if op.kind == "idle"}
            assert not (interior & idle)

    def test_invalid(self):
        with pytest.raises(ValueError):
            build_surface(2, 5)
        with pytest.raises(ValueError):
            build_surface(3, 4)


class TestCrosstalkGeometry:
    def test_vertical_pairs(self):
        layout, _ = build_surface(3, 5)
        pairs = vertical_data_pairs(layout)
        assert len(pairs) == 2 * 5  # (dx-1) * dz
        for d1, d2, xanc in pairs:
            assert d2 == d1 + 5
        with_x = [p for p in pairs if p[2] is not None]
        # Each vertical pair flanked by at most one X ancilla.
        assert 0 < len(with_x) < len(pairs) + 1

    def test_boundary_pairs(self):
        layout, _ = build_surface(3, 5)
        pairs = boundary_crosstalk_pairs(layout)
        x_bound = [s for s in layout.x_stabilizers() if len(s.support) == 2]
        assert len(pairs) == 2 * len(x_bound)


class TestDumpAndPrep:
    def test_json_dump(self):
        layout, _ = build_surface(3, 3)
        data = json.loads(layout.to_json())
        assert data["n_data"] == 9
        assert len(data["stabilizers"]) == 8

    def test_prep_round_variant(self):
        layout, sched = build_repetition(3)
        first = prep_first_round(layout, sched)
        kinds = {op.kind for op in first.timesteps[0].ops}
        assert "prep_zero" in kinds and "idle" not in kinds
        assert len(first.timesteps) == len(sched.timesteps)
