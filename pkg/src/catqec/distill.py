"""Analytic engine for the 8-to-2 Toffoli-state distillation protocol.

The three [[8,2,2]] codes are given by binary G matrices (two logical-X
rows G1 over a single all-ones X-stabilizer row G0).  A Z-error pattern
e = (e_1..e_8), e_j in F2^3, propagates to check bits v^D = sum_j e^D_j
and output bits u^D_i = sum_j G1^D[i,j] e^D_j per block D; the protocol
accepts iff every v^D = 0 and the output is clean iff every u^D = 0.

Acceptance and fidelity are exact: the sum over all 8^8 patterns is
carried out by dynamic programming over the 9-bit (v, u) signature group,
which is algebraically identical to the full enumeration.  Pattern counts
(the 196/184 two-fault bookkeeping and the harmless table) are enumerated
directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations, product

import numpy as np

__all__ = [
    "GTrio", "paper_trio", "NoiseDistribution", "CliffordSymmetrySet",
    "paper_symmetries", "triple_dot", "check_transversality", "propagate",
    "enumerate_exact", "enumerate_truncated", "two_fault_census",
    "harmless_fault_table", "tailor", "verify_tailoring_conditions",
    "clifford_adjusted", "CliffordLedger", "FactoryFits",
    "build_clifford_ledger", "depolarizing", "z_only", "DistillationResult",
]

BLOCKS = "ABC"


# -- codes --------------------------------------------------------------------


@dataclass(frozen=True)
class GTrio:
    """Three (k+m) x n binary matrices, each partitioned into k logical rows
    G1 over m stabilizer rows G0."""

    g: tuple  # tuple of three numpy arrays, shape (k+m, n), dtype uint8
    k: int

    def __post_init__(self):
        for mat in self.g:
            if mat.shape != self.g[0].shape:
                raise ValueError("G matrices must share a shape")
            rank = _gf2_rank(mat)
            if rank != mat.shape[0]:
                raise ValueError("G rows must be linearly independent over GF(2)")

    @property
    def n(self) -> int:
        return self.g[0].shape[1]

    @property
    def m(self) -> int:
        return self.g[0].shape[0] - self.k

    def g1(self, block: int) -> np.ndarray:
        return self.g[block][: self.k]

    def g0(self, block: int) -> np.ndarray:
        return self.g[block][self.k:]


def _gf2_rank(mat: np.ndarray) -> int:
    m = (mat.copy() % 2).astype(np.uint8)
    rank = 0
    rows, cols = m.shape
    for c in range(cols):
        pivot = next((r for r in range(rank, rows) if m[r, c]), None)
        if pivot is None:
            continue
        m[[rank, pivot]] = m[[pivot, rank]]
        for r in range(rows):
            if r != rank and m[r, c]:
                m[r] ^= m[rank]
        rank += 1
    return rank


U1 = np.array([1, 1, 1, 0, 0, 1, 0, 0], dtype=np.uint8)
U2 = np.array([1, 1, 0, 1, 1, 0, 0, 0], dtype=np.uint8)
U3 = np.array([1, 0, 1, 0, 1, 0, 1, 0], dtype=np.uint8)
ONES = np.ones(8, dtype=np.uint8)


def paper_trio() -> GTrio:
    """The [[8,2,2]] trio: G^A = (u1, u2 | 1), G^B = (u2, u3 | 1),
    G^C = (u3, u1 | 1)."""
    return GTrio(g=(np.array([U1, U2, ONES]),
                    np.array([U2, U3, ONES]),
                    np.array([U3, U1, ONES])), k=2)


def triple_dot(a, b, c) -> int:
    """|a ^ b ^ c| = sum_j a_j b_j c_j mod 2."""
    a, b, c = (np.asarray(v, dtype=np.uint8) for v in (a, b, c))
    if not (len(a) == len(b) == len(c)):
        raise ValueError("vectors must have equal length")
    return int(np.sum(a & b & c) % 2)


def check_transversality(trio: GTrio) -> tuple[bool, list]:
    """CCZ transversality: |o_p G^A ^ o_q G^B ^ o_r G^C| must be 1 exactly
    when p = q = r <= k and 0 otherwise; checked for every row triple."""
    rows = trio.g[0].shape[0]
    violations = []
    for p, q, r in product(range(rows), repeat=3):
        want = 1 if (p == q == r and p < trio.k) else 0
        got = triple_dot(trio.g[0][p], trio.g[1][q], trio.g[2][r])
        if got != want:
            violations.append((p + 1, q + 1, r + 1, got))
    return not violations, violations


# -- error patterns ------------------------------------------------------------


def propagate(e: np.ndarray, trio: GTrio) -> dict:
    """Propagate a pattern e (shape (n, 3), e[j] = (e^A_j, e^B_j, e^C_j)).

    Returns {"v": (vA, vB, vC) arrays, "u": (uA, uB, uC) arrays,
    "detected": bool, "output_error": bool}.  The contraction is
    w_i = sum_j G[i, j] e_j over fault locations j.
    """
    e = np.asarray(e, dtype=np.uint8)
    if e.shape != (trio.n, 3):
        raise ValueError(f"pattern must have shape ({trio.n}, 3)")
    v, u = [], []
    for blk in range(3):
        w = trio.g[blk] @ e[:, blk] % 2
        u.append(w[: trio.k])
        v.append(w[trio.k:])
    detected = any(vec.any() for vec in v)
    return {"v": tuple(v), "u": tuple(u), "detected": detected,
            "output_error": any(vec.any() for vec in u)}


@dataclass
class NoiseDistribution:
    """Per input state j, a probability table over the 8 values of
    e_j = eA + 2 eB + 4 eC."""

    tables: np.ndarray  # shape (n, 8)

    def __post_init__(self):
        self.tables = np.asarray(self.tables, dtype=float)
        if self.tables.ndim != 2 or self.tables.shape[1] != 8:
            raise ValueError("tables must have shape (n, 8)")
        if np.any(self.tables < -1e-15):
            raise ValueError("negative probabilities")
        if not np.allclose(self.tables.sum(axis=1), 1.0, atol=1e-9):
            raise ValueError("each location's table must sum to 1")

    @property
    def n(self) -> int:
        return self.tables.shape[0]

    def nonzero_prob(self) -> np.ndarray:
        return 1.0 - self.tables[:, 0]


def depolarizing(eps: float, n: int = 8) -> NoiseDistribution:
    """Each location carries any of the 7 nonzero Z patterns w.p. eps/7."""
    table = np.full(8, eps / 7.0)
    table[0] = 1.0 - eps
    return NoiseDistribution(np.tile(table, (n, 1)))


def z_only(eps1: float, eps2: float, n: int = 8) -> NoiseDistribution:
    """The tailoring toy model: Z_A with probability eps1, the六 other
    nonzero patterns sharing eps2."""
    table = np.zeros(8)
    table[0] = 1.0 - eps1 - eps2
    table[1] = eps1
    for e in range(2, 8):
        table[e] = eps2 / 6.0
    return NoiseDistribution(np.tile(table, (n, 1)))


# -- exact enumeration via signature DP ----------------------------------------


def _signature_step(trio: GTrio, j: int) -> np.ndarray:
    """Map e_j in 0..7 to its 9-bit signature contribution: bits 0..2 the
    check parities (vA, vB, vC), bits 3..8 the output bits (uA1, uA2, uB1,
    uB2, uC1, uC2)."""
    if trio.k != 2 or trio.m != 1:
        raise NotImplementedError("signature DP assumes k=2, m=1 codes")
    out = np.zeros(8, dtype=np.int64)
    for e in range(8):
        bits = [(e >> blk) & 1 for blk in range(3)]
        sig = 0
        for blk in range(3):
            if bits[blk] and trio.g0(blk)[0, j]:
                sig ^= 1 << blk
            for i in range(2):
                if bits[blk] and trio.g1(blk)[i, j]:
                    sig ^= 1 << (3 + 2 * blk + i)
        out[e] = sig
    return out


def _signature_distribution(dists: NoiseDistribution, trio: GTrio,
                            track_faults: bool = False) -> np.ndarray:
    """Distribution over the 512 signatures (optionally by fault count)."""
    n = trio.n
    if track_faults:
        table = np.zeros((n + 1, 512))
        table[0, 0] = 1.0
    else:
        table = np.zeros(512)
        table[0] = 1.0
    for j in range(n):
        sig_of = _signature_step(trio, j)
        if track_faults:
            new = np.zeros_like(table)
            for e in range(8):
                p = dists.tables[j, e]
                if p == 0.0:
                    continue
                shifted = table[:, _xor_perm(sig_of[e])]
                if e == 0:
                    new += p * shifted
                else:
                    new[1:] += p * shifted[:-1]
            table = new
        else:
            new = np.zeros_like(table)
            for e in range(8):
                p = dists.tables[j, e]
                if p == 0.0:
                    continue
                new += p * table[_xor_perm(sig_of[e])]
            table = new
    return table


_XOR_PERMS: dict[int, np.ndarray] = {}


def _xor_perm(s: int) -> np.ndarray:
    if s not in _XOR_PERMS:
        _XOR_PERMS[s] = np.arange(512) ^ s
    return _XOR_PERMS[s]


@dataclass
class DistillationResult:
    p_acc: float
    fidelity: float
    output_dist: dict[int, float] = field(default_factory=dict)
    truncation_bound: float = 0.0

    @property
    def eps_td(self) -> float:
        """Error per output TOF state: half the total infidelity."""
        return (1.0 - self.fidelity) / 2.0


def _result_from_signature(table: np.ndarray) -> DistillationResult:
    accepted = table[_accept_indices()]
    p_acc = float(accepted.sum())
    if p_acc == 0.0:
        return DistillationResult(0.0, 0.0)
    fidelity = float(accepted[0]) / p_acc
    output = {u: float(p) / p_acc for u, p in enumerate(accepted) if p > 0.0}
    return DistillationResult(p_acc, fidelity, output)


def _accept_indices() -> np.ndarray:
    # Signatures with v = 0: indices u * 8 for u in 0..63 (v bits are 0..2).
    return np.arange(64) * 8


def enumerate_exact(dists: NoiseDistribution, trio: GTrio) -> DistillationResult:
    """Exact acceptance probability, output fidelity, and distribution of
    logical-Z patterns on the two output TOF states."""
    table = _signature_distribution(dists, trio)
    return _result_from_signature(table)


def enumerate_truncated(dists: NoiseDistribution, trio: GTrio,
                        t_max: int) -> DistillationResult:
    """Exact sums over patterns with at most t_max fault locations, plus a
    rigorous truncation bound: every discarded pattern is assumed accepted
    and harmful, so bound = P(#faults > t_max)."""
    if not 0 <= t_max <= trio.n:
        raise ValueError("t_max out of range")
    table = _signature_distribution(dists, trio, track_faults=True)
    kept = table[: t_max + 1].sum(axis=0)
    tail = float(table[t_max + 1:].sum())
    res = _result_from_signature(kept)
    # Fidelity bound: the tail could all have been accepted and harmful.
    return DistillationResult(res.p_acc, res.fidelity, res.output_dist,
                              truncation_bound=tail)


def two_fault_census(trio: GTrio) -> dict:
    """Counts of undetected and harmful two-fault-location patterns when the
    two locations carry the same nonzero e (the only undetected option)."""
    undetected = harmful = 0
    for i, j in combinations(range(trio.n), 2):
        for e in range(1, 8):
            pattern = np.zeros((trio.n, 3), dtype=np.uint8)
            for blk in range(3):
                if (e >> blk) & 1:
                    pattern[i, blk] = pattern[j, blk] = 1
            out = propagate(pattern, trio)
            if not out["detected"]:
                undetected += 1
                if out["output_error"]:
                    harmful += 1
    return {"undetected": undetected, "harmful": harmful}


def harmless_fault_table(trio: GTrio) -> dict[int, list[tuple[int, int]]]:
    """Undetected yet harmless two-fault patterns, keyed by the fault type
    e (1-based location pairs, as published)."""
    table: dict[int, list[tuple[int, int]]] = {}
    for i, j in combinations(range(trio.n), 2):
        for e in range(1, 8):
            pattern = np.zeros((trio.n, 3), dtype=np.uint8)
            for blk in range(3):
                if (e >> blk) & 1:
                    pattern[i, blk] = pattern[j, blk] = 1
            out = propagate(pattern, trio)
            if not out["detected"] and not out["output_error"]:
                table.setdefault(e, []).append((i + 1, j + 1))
    return table


# -- noise tailoring ------------------------------------------------------------


@dataclass(frozen=True)
class CliffordSymmetrySet:
    matrices: tuple  # 8 invertible 3x3 binary numpy arrays

    def __post_init__(self):
        for mat in self.matrices:
            if _gf2_rank(np.asarray(mat)) != 3:
                raise ValueError("every M_j must be invertible over GF(2)")


def paper_symmetries() -> CliffordSymmetrySet:
    m = [
        [[1, 0, 0], [0, 0, 1], [0, 1, 0]],
        [[1, 0, 0], [0, 1, 0], [0, 0, 1]],
        [[0, 1, 0], [1, 0, 0], [0, 0, 1]],
        [[0, 0, 1], [0, 1, 0], [1, 0, 0]],
        [[1, 0, 1], [0, 0, 1], [0, 1, 0]],
        [[1, 1, 0], [1, 0, 0], [0, 0, 1]],
        [[0, 1, 0], [0, 0, 1], [1, 0, 0]],
        [[0, 0, 1], [0, 1, 0], [1, 0, 0]],
    ]
    return CliffordSymmetrySet(tuple(np.array(x, dtype=np.uint8) for x in m))


def _gf2_inverse(mat: np.ndarray) -> np.ndarray:
    n = mat.shape[0]
    aug = np.concatenate([mat % 2, np.eye(n, dtype=np.uint8)], axis=1)
    aug = aug.astype(np.uint8)
    row = 0
    for c in range(n):
        pivot = next((r for r in range(row, n) if aug[r, c]), None)
        if pivot is None:
            raise ValueError("matrix is singular over GF(2)")
        aug[[row, pivot]] = aug[[pivot, row]]
        for r in range(n):
            if r != row and aug[r, c]:
                aug[r] ^= aug[row]
        row += 1
    return aug[:, n:]


def _apply_m(e: int, mat: np.ndarray) -> int:
    vec = np.array([(e >> b) & 1 for b in range(3)], dtype=np.uint8)
    out = vec @ mat % 2
    return int(out[0]) | int(out[1]) << 1 | int(out[2]) << 2


def tailor(dists: NoiseDistribution, mset: CliffordSymmetrySet,
           ) -> NoiseDistribution:
    """P'_j(e) = P_j(e M_j^{-1}): the Clifford symmetry applied to input j
    permutes its error types."""
    if dists.n != len(mset.matrices):
        raise ValueError("need one symmetry per input state")
    out = np.zeros_like(dists.tables)
    for j, mat in enumerate(mset.matrices):
        inv = _gf2_inverse(np.asarray(mat))
        for e in range(8):
            out[j, e] = dists.tables[j, _apply_m(e, inv)]
    return NoiseDistribution(out)


def verify_tailoring_conditions(mset: CliffordSymmetrySet, trio: GTrio,
                                ) -> tuple[bool, list[tuple[int, int]]]:
    """Condition 1*: (1,0,0)M_i != (1,0,0)M_j for every pair; exceptions are
    allowed only when the colliding fault is in the harmless table.
    Returns (ok, 1-based pairs where condition 1* fails)."""
    harmless = harmless_fault_table(trio)
    images = [_apply_m(1, np.asarray(m)) for m in mset.matrices]
    exceptions = []
    ok = True
    for i, j in combinations(range(len(images)), 2):
        if images[i] != images[j]:
            continue
        exceptions.append((i + 1, j + 1))
        e = images[i]
        if (i + 1, j + 1) not in harmless.get(e, []):
            ok = False
    return ok, exceptions


# -- Clifford-noise adjustment ---------------------------------------------------


def clifford_adjusted(dists: NoiseDistribution, trio: GTrio,
                      forward_dist: list[np.ndarray]) -> DistillationResult:
    """Exact enumeration with forward-propagated Clifford errors.

    forward_dist: per block D, a probability table over the 8 values of
    (v-tilde, u-tilde_1, u-tilde_2); acceptance requires the input-error
    check parity to cancel v-tilde, and the output is clean when the
    propagated u cancels u-tilde.
    """
    table = _signature_distribution(dists, trio)
    for blk, ftab in enumerate(forward_dist):
        ftab = np.asarray(ftab, dtype=float)
        if ftab.shape != (8,):
            raise ValueError("forward tables have 8 entries (v, u1, u2)")
        if not math.isclose(float(ftab.sum()), 1.0, abs_tol=1e-9):
            raise ValueError("forward tables must sum to 1")
        new = np.zeros_like(table)
        for w in range(8):
            p = ftab[w]
            if p == 0.0:
                continue
            v = w & 1
            u1 = (w >> 1) & 1
            u2 = (w >> 2) & 1
            sig = (v << blk) | (u1 << (3 + 2 * blk)) | (u2 << (4 + 2 * blk))
            new += p * table[_xor_perm(sig)]
        table = new
    return _result_from_signature(table)


@dataclass
class CliffordLedger:
    """Backward/forward/stuck error accounting for one factory configuration."""

    backward_z: float  # extra Z probability per input magic-state qubit
    forward_check: float  # Z-logical probability on each check qubit
    forward_output: float  # Z-logical probability on each output qubit
    stuck: float  # summed probability of stuck (unpropagatable) errors
    detail: dict = field(default_factory=dict)

    def forward_tables(self) -> list[np.ndarray]:
        """Per-block forward distribution over (v, u1, u2)."""
        out = []
        for _ in range(3):
            tab = np.zeros(8)
            for w in range(8):
                p = 1.0
                p *= self.forward_check if w & 1 else 1 - self.forward_check
                p *= self.forward_output if w & 2 else 1 - self.forward_output
                p *= self.forward_output if w & 4 else 1 - self.forward_output
                tab[w] = p
            out.append(tab)
        return out

    def apply_backward(self, dists: NoiseDistribution) -> NoiseDistribution:
        """Convolve the backward Z probability onto every input qubit."""
        tables = dists.tables.copy()
        for blk in range(3):
            new = np.zeros_like(tables)
            for e in range(8):
                new[:, e] += tables[:, e] * (1 - self.backward_z)
                new[:, e ^ (1 << blk)] += tables[:, e] * self.backward_z
            tables = new
        return NoiseDistribution(tables)


@dataclass
class FactoryFits:
    """Fitted failure-rate parameters feeding the Clifford ledger."""

    a_z: float = 0.028 / 3.0  # surface logical-Z: d_x * t * a_z * (b_z r)^(c_z dz)
    b_z: float = 3559.0
    c_z: float = 0.292
    a_m: float = 0.028 / 3.0  # timelike: ell * d_x * a_m * (b_m r)^(c_m d_m)
    b_m: float = 3559.0
    c_m: float = 0.292
    a_rep: float = 0.014  # repetition per-round: a_rep * (b_rep r)^(c_rep d)
    b_rep: float = 770.0
    c_rep: float = 0.41
    x_coef: float = 3449.0  # p_X = x_coef * dz^2 * exp(-4 a^2) * r per dz rounds

    def surface_z(self, dz: int, rounds: float, r: float, dx: int = 3) -> float:
        return dx * rounds * self.a_z * (self.b_z * r) ** (self.c_z * dz)

    def timelike(self, d_m: int, ell: float, r: float, dx: int = 3) -> float:
        return ell * dx * self.a_m * (self.b_m * r) ** (self.c_m * d_m)

    def rep_per_round(self, d: int, r: float) -> float:
        return self.a_rep * (self.b_rep * r) ** (self.c_rep * d)

    def surface_x_per_round(self, dz: int, r: float, alpha_sq: float) -> float:
        return self.x_coef * dz * math.exp(-4 * alpha_sq) * r


def build_clifford_ledger(fits: FactoryFits, factory, params,
                          meas_flip: float, t_surf: float, t_rep: float,
                          input_wait_steps: float = 4.0) -> CliffordLedger:
    """Translate the 8-step factory clock into error-accounting terms.

    Derived storage durations: factory and check qubits live one full
    cycle of 8 factory-clock steps of (d_m + 1) surface cycles each; each
    input state waits about `input_wait_steps` clock steps in repetition
    storage before injection (batches prepared during the previous
    half-cycle).  Each input block-qubit suffers one lattice-surgery
    measurement (timelike error) and one single-qubit reset measurement.
    """
    if fits is None:
        raise ValueError("fit parameters are required")
    r = params.loss_ratio
    residence = 8.0 * (factory.d_m + 1)
    ell = factory.d_m - 1 if factory.d_m > 1 else 1
    q_out = fits.surface_z(factory.big_d_z, residence, r)
    q_chk = fits.surface_z(factory.d_z, residence, r)
    rep_rounds = input_wait_steps * (factory.d_m + 1) * t_surf / t_rep
    backward = (fits.timelike(factory.d_m, ell, r)
                + meas_flip
                + rep_rounds * fits.rep_per_round(factory.d_rep, r))
    stuck = (6 * residence * fits.surface_x_per_round(
                 factory.big_d_z, r, params.alpha_sq)
             + 3 * residence * fits.surface_x_per_round(
                 factory.d_z, r, params.alpha_sq)
             + 3 * rep_rounds * 8 * 0.5 * math.exp(-4 * params.alpha_sq)
             * params.loss_ratio)
    return CliffordLedger(
        backward_z=backward, forward_check=q_chk, forward_output=q_out,
        stuck=stuck,
        detail={"residence_cycles": residence, "rep_storage_rounds": rep_rounds,
                "timelike": fits.timelike(factory.d_m, ell, r),
                "reset_meas": meas_flip})
