"""Closed-form leading-order edge-weight probabilities.

Every edge probability is an exactly-one combination, via `gamma`, of the
single-fault events that highlight that edge.  The CNOT outcome classes
(p1_zzcx and friends) partition the fifteen two-qubit Paulis by whether
the control/target component anticommutes with the measured basis.  The
corresponding decoding graphs themselves are produced by exact fault
enumeration in `catqec.decoder.graph`; these functions reproduce the
published polynomial forms and serve as its cross-check.
"""

from __future__ import annotations

import math
from collections.abc import Sequence

from ..noise import PauliChannel

__all__ = ["gamma", "rep_edges", "surface_x_edges", "surface_z_edges",
           "crosstalk_edges"]


def gamma(probs: Sequence[float], counts: Sequence[int]) -> float:
    """Probability that exactly one of the listed independent events fires.

    gamma(P1..Pj; n1..nj) = sum_k n_k P_k (1-P_k)^(n_k-1) prod_{i!=k} (1-P_i)^n_i
    """
    if len(probs) != len(counts):
        raise ValueError("probs and counts must have equal length")
    total = 0.0
    for k, (pk, nk) in enumerate(zip(probs, counts)):
        term = nk * pk * (1.0 - pk) ** (nk - 1)
        for i, (pi, ni) in enumerate(zip(probs, counts)):
            if i != k:
                term *= (1.0 - pi) ** ni
        total += term
    return total


def _select(ch: PauliChannel, control: str, target: str) -> float:
    """Sum of CNOT outcome probabilities by component class.

    `control`/`target` constrain the per-qubit Pauli component:
    "z" = anticommutes with Z readout (Z or Y), "noz" = I or X,
    "x" = anticommutes with X readout (X or Y), "nox" = I or Z,
    "any" = unconstrained.
    """
    def ok(pauli: str, want: str) -> bool:
        if want == "any":
            return True
        zish = pauli in ("Z", "Y")
        xish = pauli in ("X", "Y")
        return {"z": zish, "noz": not zish, "x": xish, "nox": not xish}[want]

    from ..noise import label_to_masks

    total = 0.0
    for label, p in ch.probs.items():
        x, z = label_to_masks(label, 2)
        paulis = []
        for q in range(2):
            xb, zb = (x >> q) & 1, (z >> q) & 1
            paulis.append({(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}[(xb, zb)])
        if ok(paulis[0], control) and ok(paulis[1], target):
            total += p
    return total


def cnot_classes(ch: PauliChannel) -> dict[str, float]:
    """The named CNOT outcome-class probabilities for the surface-code edges."""
    return {
        "p1_zzcx": _select(ch, "z", "z"),
        "p1_izcx": _select(ch, "noz", "z"),
        "p1_zicx": _select(ch, "z", "any"),
        "p2_izcx": _select(ch, "noz", "z") + _select(ch, "z", "noz"),
        "p3_izcx": _select(ch, "any", "z"),
        "p2_zicx": _select(ch, "z", "noz"),
        "p1_xxcx": _select(ch, "x", "x"),
        "p1_xicx": _select(ch, "x", "nox"),
        "p1_ixcx": _select(ch, "nox", "x"),
        "p2_ixcx": _select(ch, "any", "x"),
        "p3_ixcx": _select(ch, "nox", "x") + _select(ch, "x", "nox"),
        "p2_xicx": _select(ch, "x", "any"),
        "p_vcx": _select(ch, "z", "noz"),
        "p_vcz": _select(ch, "nox", "x"),
    }


def rep_edges(p_i: float, p_z1: float, p_z2: float, p_z1z2: float,
              p_s: float, p_m: float) -> dict[str, float]:
    """Repetition-code edge probabilities.

    p_i/p_s/p_m are the idle, |+>-prep-Z and X-readout-flip probabilities;
    p_z1/p_z2/p_z1z2 the CNOT Z(x)I, I(x)Z and Z(x)Z rates (ancilla control).
    h/h1/h2 are the bulk, first-qubit and last-qubit horizontal (data)
    edges with first-round variants; v the vertical (measurement) edge and
    d the space-time diagonal.
    """
    return {
        "h_t1": gamma([p_i, p_z1z2], [1, 1]),
        "h": gamma([p_i, p_z1z2, p_z2], [2, 1, 1]),
        "h1_t1": gamma([p_i, p_z1z2], [1, 1]),
        "h1": gamma([p_i, p_z1z2, p_z2], [3, 1, 1]),
        "h2_t1": gamma([p_i, p_z1z2], [2, 1]),
        "h2": gamma([p_i, p_z1z2, p_z2], [3, 1, 1]),
        "v": gamma([p_m, p_s, p_z1], [1, 1, 2]),
        "d": gamma([p_z1z2, p_z2], [1, 1]),
    }


def surface_x_edges(ch: PauliChannel, p_idle_z: float,
                    p_s: float, p_m: float) -> dict[str, float]:
    """X-stabilizer-graph edge probabilities (decoding Z-type data errors)."""
    c = cnot_classes(ch)
    zz, iz, zi = c["p1_zzcx"], c["p1_izcx"], c["p1_zicx"]
    iz2, iz3, zi2 = c["p2_izcx"], c["p3_izcx"], c["p2_zicx"]
    pd1 = p_idle_z
    return {
        "bltrx": gamma([zz, iz, pd1], [1, 1, 1]),
        "tlbrx": gamma([zz, iz, zi, iz2, pd1], [2, 2, 1, 1, 1]),
        "c1x": gamma([iz3, zi2, pd1], [1, 1, 1]),
        "tb2x": gamma([zz, iz, pd1], [1, 1, 1]),
        "tb1x": gamma([zz, iz, iz2, pd1], [2, 1, 1, 1]),
        "c2x": gamma([iz3, iz2, zz, pd1], [1, 1, 1, 1]),
        "mrx1": gamma([iz3, zi2, pd1], [1, 2, 1]),
        "mrx2": gamma([iz3, iz, zi, iz2, pd1], [1, 2, 1, 1, 1]),
        "c3x": gamma([iz3, iz, zi, pd1], [1, 1, 1, 1]),
        "bb2x": gamma([zz, iz, pd1], [1, 1, 1]),
        "bb1x": gamma([iz, zz, zi, pd1], [2, 1, 1, 1]),
        "c4x": gamma([iz3, iz, zi, pd1], [1, 1, 1, 1]),
        "mlx1": gamma([iz3, iz, zi2, zi, pd1], [1, 1, 1, 1, 1]),
        "mlx2": gamma([iz3, iz, zi2, zi, pd1], [1, 1, 1, 1, 1]),
        "v": gamma([c["p_vcx"], p_s, p_m], [4, 1, 1]),
        "v_bound": gamma([c["p_vcx"], p_s, p_m], [2, 1, 1]),
        "d1_bulk": gamma([iz, zz, zi2], [1, 1, 2]),
        "d1_bound": gamma([iz, zz, zi2], [1, 1, 1]),
        "d2": gamma([iz, zz], [1, 1]),
        "d3": gamma([iz, zz], [1, 1]),
    }


def surface_z_edges(ch: PauliChannel, p_idle_x: float,
                    p_s: float, p_m: float) -> dict[str, float]:
    """Z-stabilizer-graph edge probabilities (decoding X-type data errors)."""
    c = cnot_classes(ch)
    xx, xi, ix = c["p1_xxcx"], c["p1_xicx"], c["p1_ixcx"]
    ix2, ix3, xi2 = c["p2_ixcx"], c["p3_ixcx"], c["p2_xicx"]
    pd2 = p_idle_x
    return {
        "bltrz": gamma([xx, xi, pd2], [1, 1, 1]),
        "tlbrz": gamma([xx, xi, ix2, ix3, pd2], [2, 2, 1, 1, 1]),
        "c1z": gamma([xi2, ix, pd2], [1, 1, 1]),
        "tb1z": gamma([xi2, xi, ix2, ix3, xx, pd2], [1, 1, 1, 1, 1, 1]),
        "tb2z": gamma([xi2, ix, pd2], [1, 2, 1]),
        "c2z": gamma([xi2, ix, pd2], [1, 1, 1]),
        "mrz1": gamma([xx, xi, ix3, pd2], [1, 2, 1, 1]),
        "mrz2": gamma([xx, xi, pd2], [1, 1, 1]),
        "c3z": gamma([xi2, ix, pd2], [1, 1, 1]),
        "bb1z": gamma([xi2, ix, ix2, xi, pd2], [1, 1, 1, 1, 1]),
        "bb2z": gamma([xi2, ix, ix2, xi, pd2], [1, 1, 1, 1, 1]),
        "c4z": gamma([xi2, xi, ix2, pd2], [1, 1, 1, 1]),
        "mlz1": gamma([xx, xi, ix2, pd2], [1, 2, 1, 1]),
        "mlz2": gamma([xx, xi, pd2], [1, 1, 1]),
        "v": gamma([c["p_vcz"], p_s, p_m], [4, 1, 1]),
        "v_bound": gamma([c["p_vcz"], p_s, p_m], [2, 1, 1]),
        "d1": gamma([xi, xx], [1, 1]),
        "d2_bulk": gamma([xi, xx, ix], [1, 1, 2]),
        "d2_bound": gamma([xi, xx, ix], [1, 1, 1]),
        "d3": gamma([xi, xx], [1, 1]),
    }


def crosstalk_edges(ch: PauliChannel, p_idle_z: float, p_s: float, p_m: float,
                    p_cd: float, p_ct: float) -> dict[str, float]:
    """Extra and renormalized X-graph edges when micro-oscillation crosstalk
    is on (p_cd = p_double, p_ct = p_triple)."""
    c = cnot_classes(ch)
    zz, iz, zi = c["p1_zzcx"], c["p1_izcx"], c["p1_zicx"]
    iz2, iz3, zi2 = c["p2_izcx"], c["p3_izcx"], c["p2_zicx"]
    pd1 = p_idle_z
    return {
        "cross_bulk": gamma([p_ct, p_cd], [2, 2]),
        "cross_bound": gamma([p_ct, p_cd], [1, 1]),
        "d_corr": p_ct,
        "tb2x": gamma([zz, iz, pd1, p_cd], [1, 1, 1, 1]),
        "tb1x": gamma([zz, iz, iz2, pd1, p_cd], [2, 1, 1, 1, 1]),
        "c2x": gamma([iz3, iz2, zz, pd1, p_cd, p_ct], [1, 1, 1, 1, 1, 1]),
        "bb2x": gamma([zz, iz, pd1, p_cd], [1, 1, 1, 1]),
        "bb1x": gamma([iz, zz, zi, pd1, p_cd], [2, 1, 1, 1, 1]),
        "c4x": gamma([iz3, iz, zi, pd1, p_cd, p_ct], [1, 1, 1, 1, 1, 1]),
        "v": gamma([c["p_vcx"], p_s, p_m, p_ct], [4, 1, 1, 1]),
        "d1_bound_top": gamma([iz, zz, zi2, p_ct], [1, 1, 1, 1]),
        "d2_top": gamma([iz, zz, p_ct], [1, 1, 1]),
    }


def edge_weight(probability: float) -> float:
    """w_e = -log(P_e); zero-probability edges are omitted from graphs."""
    if not 0.0 < probability < 1.0:
        raise ValueError(f"edge probability out of (0,1): {probability}")
    return -math.log(probability)
