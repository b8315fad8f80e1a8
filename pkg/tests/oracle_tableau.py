"""Reference stabilizer-tableau simulator (Aaronson-Gottesman) for oracle
tests: exact, slow, completely independent of the Pauli-frame engine."""

from __future__ import annotations

import numpy as np


class Tableau:
    def __init__(self, n: int, rng: np.random.Generator):
        self.n = n
        self.rng = rng
        # Rows 0..n-1 destabilizers, n..2n-1 stabilizers; |0>^n start.
        self.x = np.zeros((2 * n, n), dtype=np.uint8)
        self.z = np.zeros((2 * n, n), dtype=np.uint8)
        self.r = np.zeros(2 * n, dtype=np.uint8)
        for i in range(n):
            self.x[i, i] = 1
            self.z[n + i, i] = 1

    # -- gates ---------------------------------------------------------------

    def h(self, q: int):
        self.r ^= self.x[:, q] & self.z[:, q]
        self.x[:, q], self.z[:, q] = self.z[:, q].copy(), self.x[:, q].copy()

    def cnot(self, c: int, t: int):
        self.r ^= self.x[:, c] & self.z[:, t] & (self.x[:, t] ^ self.z[:, c] ^ 1)
        self.x[:, t] ^= self.x[:, c]
        self.z[:, c] ^= self.z[:, t]

    def apply_pauli(self, x_mask: int, z_mask: int):
        """Insert a Pauli error: stabilizers anticommuting with it flip sign."""
        for q in range(self.n):
            if (x_mask >> q) & 1:
                self.r ^= self.z[:, q]
            if (z_mask >> q) & 1:
                self.r ^= self.x[:, q]

    # -- measurement ----------------------------------------------------------

    def _rowsum(self, h: int, i: int):
        def g(x1, z1, x2, z2):
            out = np.zeros_like(x1, dtype=np.int64)
            m11 = (x1 == 1) & (z1 == 1)
            out[m11] = (z2[m11].astype(np.int64) - x2[m11])
            m10 = (x1 == 1) & (z1 == 0)
            out[m10] = z2[m10].astype(np.int64) * (2 * x2[m10].astype(np.int64) - 1)
            m01 = (x1 == 0) & (z1 == 1)
            out[m01] = x2[m01].astype(np.int64) * (1 - 2 * z2[m01].astype(np.int64))
            return out
        total = 2 * self.r[h] + 2 * self.r[i] + int(
            g(self.x[i], self.z[i], self.x[h], self.z[h]).sum())
        self.r[h] = (total % 4) // 2
        self.x[h] ^= self.x[i]
        self.z[h] ^= self.z[i]

    def measure_z(self, q: int) -> int:
        n = self.n
        p = next((i for i in range(n, 2 * n) if self.x[i, q]), None)
        if p is not None:
            for i in range(2 * n):
                if i != p and self.x[i, q]:
                    self._rowsum(i, p)
            self.x[p - n] = self.x[p]
            self.z[p - n] = self.z[p]
            self.r[p - n] = self.r[p]
            self.x[p] = 0
            self.z[p] = 0
            self.r[p] = self.rng.integers(0, 2)
            self.z[p, q] = 1
            return int(self.r[p])
        # Deterministic outcome: accumulate into a scratch row.
        scratch_x = np.zeros(self.n, dtype=np.uint8)
        scratch_z = np.zeros(self.n, dtype=np.uint8)
        scratch_r = 0
        for i in range(n):
            if self.x[i, q]:
                total = 2 * scratch_r + 2 * self.r[n + i] + int(self._g_vec(
                    self.x[n + i], self.z[n + i], scratch_x, scratch_z).sum())
                scratch_r = (total % 4) // 2
                scratch_x ^= self.x[n + i]
                scratch_z ^= self.z[n + i]
        return int(scratch_r)

    @staticmethod
    def _g_vec(x1, z1, x2, z2):
        out = np.zeros_like(x1, dtype=np.int64)
        m11 = (x1 == 1) & (z1 == 1)
        out[m11] = z2[m11].astype(np.int64) - x2[m11]
        m10 = (x1 == 1) & (z1 == 0)
        out[m10] = z2[m10].astype(np.int64) * (2 * x2[m10].astype(np.int64) - 1)
        m01 = (x1 == 0) & (z1 == 1)
        out[m01] = x2[m01].astype(np.int64) * (1 - 2 * z2[m01].astype(np.int64))
        return out

    def measure_x(self, q: int) -> int:
        self.h(q)
        out = self.measure_z(q)
        self.h(q)
        return out

    def prep_zero(self, q: int):
        if self.measure_z(q):
            self.apply_pauli(1 << q, 0)

    def prep_plus(self, q: int):
        self.prep_zero(q)
        self.h(q)


def run_schedule_tableau(tab: Tableau, schedule, inject: dict | None = None):
    """Execute one CircuitSchedule on the tableau; returns {qubit: outcome}.

    inject maps (step_index, op_index) -> (x_mask, z_mask) applied after
    that op, mirroring the frame walker's convention (Toffoli gates must
    not appear; the tableau is Clifford-only)."""
    readings = {}
    for s, step in enumerate(schedule.timesteps):
        for i, op in enumerate(step.ops):
            if op.kind == "cnot":
                tab.cnot(*op.qubits)
            elif op.kind == "prep_plus":
                tab.prep_plus(op.qubits[0])
            elif op.kind == "prep_zero":
                tab.prep_zero(op.qubits[0])
            elif op.kind == "meas_x":
                readings[op.qubits[0]] = tab.measure_x(op.qubits[0])
            elif op.kind == "meas_z":
                readings[op.qubits[0]] = tab.measure_z(op.qubits[0])
            elif op.kind == "idle":
                pass
            else:
                raise ValueError(f"tableau oracle cannot run {op.kind}")
            if inject and (s, i) in inject:
                tab.apply_pauli(*inject[(s, i)])
    return readings
