"""Repetition and thin rotated surface code layouts and syndrome circuits.

Layout conventions (surface code): data qubits sit on a d_x-row by
d_z-column grid.  The logical X has minimum support on a column (weight
d_x) and the logical Z on a row (weight d_z).  Weight-two X stabilizers
sit on the top/bottom boundaries and weight-two Z stabilizers on the
left/right boundaries.  X stabilizers are measured with an ancilla
prepared in |+> acting as the control of CNOTs onto its data qubits;
Z stabilizers with CNOTs from the data into an ancilla prepared in |0>
and read out in the Z basis.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

__all__ = ["CodeLayout", "CircuitSchedule", "Op", "Timestep",
           "build_repetition", "build_surface"]


@dataclass(frozen=True)
class Op:
    kind: str  # prep_plus | prep_zero | cnot | toffoli | idle | meas_x | meas_z
    qubits: tuple[int, ...]


@dataclass
class Timestep:
    duration: str  # "prep" | "cnot" | "meas" — resolved to seconds by the simulator
    ops: list[Op] = field(default_factory=list)

    def touched(self) -> set[int]:
        out: set[int] = set()
        for op in self.ops:
            for q in op.qubits:
                if q in out:
                    raise ValueError(f"qubit {q} used twice in one timestep")
                out.add(q)
        return out


@dataclass
class CircuitSchedule:
    n_qubits: int
    timesteps: list[Timestep]

    def validate(self):
        for step in self.timesteps:
            step.touched()


@dataclass(frozen=True)
class Stabilizer:
    ancilla: int
    kind: str  # "X" or "Z"
    support: tuple[int, ...]


@dataclass
class CodeLayout:
    kind: str  # "repetition" or "surface"
    n_data: int
    stabilizers: list[Stabilizer]
    logical_x_support: tuple[int, ...]
    logical_z_support: tuple[int, ...]
    coords: dict[int, tuple[float, float]]
    params: dict = field(default_factory=dict)

    @property
    def n_qubits(self) -> int:
        return self.n_data + len(self.stabilizers)

    def x_stabilizers(self) -> list[Stabilizer]:
        return [s for s in self.stabilizers if s.kind == "X"]

    def z_stabilizers(self) -> list[Stabilizer]:
        return [s for s in self.stabilizers if s.kind == "Z"]

    def check_commutation(self):
        """All stabilizers commute pairwise; logicals commute with them and
        anticommute with each other."""
        for i, a in enumerate(self.stabilizers):
            for b in self.stabilizers[i + 1:]:
                if a.kind != b.kind:
                    overlap = len(set(a.support) & set(b.support))
                    if overlap % 2:
                        raise AssertionError(
                            f"stabilizers on {a.ancilla} and {b.ancilla} anticommute"
                        )
        for s in self.stabilizers:
            overlap_x = len(set(s.support) & set(self.logical_x_support))
            overlap_z = len(set(s.support) & set(self.logical_z_support))
            if s.kind == "Z" and overlap_x % 2:
                raise AssertionError("logical X anticommutes with a Z stabilizer")
            if s.kind == "X" and overlap_z % 2:
                raise AssertionError("logical Z anticommutes with an X stabilizer")
        shared = set(self.logical_x_support) & set(self.logical_z_support)
        if len(shared) % 2 != 1:
            raise AssertionError("logical X and Z must anticommute")

    def to_json(self) -> str:
        return json.dumps(
            {
                "kind": self.kind,
                "params": self.params,
                "n_data": self.n_data,
                "coords": {str(q): c for q, c in self.coords.items()},
                "stabilizers": [
                    {"ancilla": s.ancilla, "kind": s.kind, "support": list(s.support)}
                    for s in self.stabilizers
                ],
                "logical_x_support": list(self.logical_x_support),
                "logical_z_support": list(self.logical_z_support),
            },
            indent=2,
        )


def _require_odd(name: str, value: int):
    if value < 3 or value % 2 == 0:
        raise ValueError(f"{name} must be odd and >= 3, got {value}")


def build_repetition(d: int) -> tuple[CodeLayout, CircuitSchedule]:
    """Distance-d repetition code: d data, d-1 X-type ancillas, 4 timesteps.

    Ancilla k measures X_k X_(k+1) via CNOTs onto its lower-index neighbor
    first, then the higher one; the first/last data qubits idle during the
    CNOT step they do not participate in.
    """
    _require_odd("d", d)
    data = list(range(d))
    stabs = [
        Stabilizer(ancilla=d + k, kind="X", support=(k, k + 1))
        for k in range(d - 1)
    ]
    layout = CodeLayout(
        kind="repetition",
        n_data=d,
        stabilizers=stabs,
        logical_x_support=(0,),
        logical_z_support=tuple(data),
        coords={q: (0.0, float(q)) for q in data}
        | {d + k: (-1.0, k + 0.5) for k in range(d - 1)},
        params={"d": d},
    )

    prep = Timestep("prep", [Op("prep_plus", (s.ancilla,)) for s in stabs]
                    + [Op("idle", (q,)) for q in data])
    cnot1 = Timestep("cnot", [Op("cnot", (s.ancilla, s.support[0])) for s in stabs]
                     + [Op("idle", (d - 1,))])
    cnot2 = Timestep("cnot", [Op("cnot", (s.ancilla, s.support[1])) for s in stabs]
                     + [Op("idle", (0,))])
    meas = Timestep("meas", [Op("meas_x", (s.ancilla,)) for s in stabs]
                    + [Op("idle", (q,)) for q in data])
    schedule = CircuitSchedule(layout.n_qubits, [prep, cnot1, cnot2, meas])
    schedule.validate()
    layout.check_commutation()
    return layout, schedule


# CNOT orders per plaquette, as corner offsets from the plaquette center.
# Chosen so hook errors from mid-schedule ancilla faults land perpendicular
# to the logical they would otherwise erode: X plaquettes sweep rows
# (late pair horizontal), Z plaquettes sweep columns (late pair vertical).
_NW, _NE, _SW, _SE = (-0.5, -0.5), (-0.5, 0.5), (0.5, -0.5), (0.5, 0.5)
_X_ORDER = (_NW, _NE, _SW, _SE)
_Z_ORDER = (_NW, _SW, _NE, _SE)


def build_surface(dx: int, dz: int) -> tuple[CodeLayout, CircuitSchedule]:
    """Thin rotated surface code with dx rows and dz columns of data qubits.

    2*dx*dz - 1 qubits total; 6 timesteps (prep, 4 CNOT layers, measure).
    """
    _require_odd("dx", dx)
    _require_odd("dz", dz)

    def data_index(r: int, c: int) -> int:
        return r * dz + c

    n_data = dx * dz
    coords = {data_index(r, c): (float(r), float(c))
              for r in range(dx) for c in range(dz)}

    # Plaquette at base (r, c) has center (r+.5, c+.5) and corners
    # (r,c),(r,c+1),(r+1,c),(r+1,c+1).  X-type iff (r+c) odd.
    stabs: list[Stabilizer] = []
    plaq_order: list[tuple[int, int, str]] = []
    for r in range(-1, dx):
        for c in range(-1, dz):
            kind = "X" if (r + c) % 2 else "Z"
            corners = [(r + dr, c + dc) for dr in (0, 1) for dc in (0, 1)]
            present = [(rr, cc) for rr, cc in corners
                       if 0 <= rr < dx and 0 <= cc < dz]
            if len(present) == 4:
                pass  # interior
            elif len(present) == 2:
                # Boundary: top/bottom rows host only X, left/right only Z.
                if r in (-1, dx - 1) and kind != "X":
                    continue
                if c in (-1, dz - 1) and kind != "Z":
                    continue
            else:
                continue  # corners of the lattice host nothing
            support = tuple(sorted(data_index(rr, cc) for rr, cc in present))
            ancilla = n_data + len(stabs)
            stabs.append(Stabilizer(ancilla=ancilla, kind=kind, support=support))
            plaq_order.append((r, c, kind))
            coords[ancilla] = (r + 0.5, c + 0.5)

    if len(stabs) != n_data - 1:
        raise AssertionError(f"expected {n_data - 1} stabilizers, got {len(stabs)}")

    layout = CodeLayout(
        kind="surface",
        n_data=n_data,
        stabilizers=stabs,
        logical_x_support=tuple(data_index(r, 0) for r in range(dx)),
        logical_z_support=tuple(data_index(0, c) for c in range(dz)),
        coords=coords,
        params={"dx": dx, "dz": dz},
    )

    prep_ops = [Op("prep_plus" if s.kind == "X" else "prep_zero", (s.ancilla,))
                for s in stabs]
    prep_ops += [Op("idle", (q,)) for q in range(n_data)]
    steps = [Timestep("prep", prep_ops)]

    for step_idx in range(4):
        ops: list[Op] = []
        busy: set[int] = set()
        for (r, c, kind), stab in zip(plaq_order, stabs):
            order = _X_ORDER if kind == "X" else _Z_ORDER
            dr, dc = order[step_idx]
            rr, cc = int(r + 0.5 + dr), int(c + 0.5 + dc)
            if not (0 <= rr < dx and 0 <= cc < dz):
                ops.append(Op("idle", (stab.ancilla,)))
                busy.add(stab.ancilla)
                continue
            dq = data_index(rr, cc)
            if kind == "X":
                ops.append(Op("cnot", (stab.ancilla, dq)))  # ancilla is control
            else:
                ops.append(Op("cnot", (dq, stab.ancilla)))  # data is control
            busy.add(stab.ancilla)
            busy.add(dq)
        ops += [Op("idle", (q,)) for q in range(n_data) if q not in busy]
        steps.append(Timestep("cnot", ops))

    meas_ops = [Op("meas_x" if s.kind == "X" else "meas_z", (s.ancilla,))
                for s in stabs]
    meas_ops += [Op("idle", (q,)) for q in range(n_data)]
    steps.append(Timestep("meas", meas_ops))

    schedule = CircuitSchedule(layout.n_qubits, steps)
    schedule.validate()
    layout.check_commutation()
    return layout, schedule


def prep_first_round(layout: CodeLayout, schedule: CircuitSchedule,
                     ) -> CircuitSchedule:
    """First-round variant for state preparation: the data qubits are
    initialised in |0> in the prep timestep instead of idling."""
    steps = []
    for s, step in enumerate(schedule.timesteps):
        if s == 0:
            ops = [op for op in step.ops
                   if not (op.kind == "idle" and op.qubits[0] < layout.n_data)]
            ops += [Op("prep_zero", (q,)) for q in range(layout.n_data)]
            steps.append(Timestep(step.duration, ops))
        else:
            steps.append(step)
    out = CircuitSchedule(schedule.n_qubits, steps)
    out.validate()
    return out


def vertical_data_pairs(layout: CodeLayout) -> list[tuple[int, int, int | None]]:
    """Vertically aligned data pairs sharing an ATS, with their flanking
    X-ancilla (None when the shared plaquette on both sides is Z-type or
    absent).  Used for crosstalk injection and decoding-graph extras."""
    if layout.kind != "surface":
        raise ValueError("crosstalk geometry is defined for the surface code")
    dx, dz = layout.params["dx"], layout.params["dz"]
    anc_at = {layout.coords[s.ancilla]: s for s in layout.stabilizers}
    pairs = []
    for r in range(dx - 1):
        for c in range(dz):
            d1, d2 = r * dz + c, (r + 1) * dz + c
            xanc = None
            for cc in (c - 0.5, c + 0.5):
                s = anc_at.get((r + 0.5, cc))
                if s is not None and s.kind == "X":
                    xanc = s.ancilla
            pairs.append((d1, d2, xanc))
    return pairs


def boundary_crosstalk_pairs(layout: CodeLayout) -> list[tuple[int, int]]:
    """(data, X-ancilla) pairs at the top/bottom boundaries that share an ATS."""
    if layout.kind != "surface":
        raise ValueError("crosstalk geometry is defined for the surface code")
    dx = layout.params["dx"]
    out = []
    for s in layout.stabilizers:
        if s.kind != "X" or len(s.support) != 2:
            continue
        r = layout.coords[s.ancilla][0]
        if r in (-0.5, dx - 0.5):
            for dq in s.support:
                out.append((dq, s.ancilla))
    return out
