"""Adaptive termination rule for repeated syndrome measurement.

Tracks the minimum number of faults compatible with the observed syndrome
sequence and stops once either (1) the same syndrome has repeated
t - n_diff + 1 times in a row, or (2) n_diff has reached the fault budget
t = (d-1)/2, in which case exactly one further syndrome is measured and
used for decoding.  A latch prevents a single fault that changes two
consecutive syndromes from being counted twice.  Always terminates within
binomial(t+2, 2) measurements.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Callable, Iterable, Iterator

__all__ = ["StopState", "stop_run", "max_rounds"]


def max_rounds(d: int) -> int:
    t = (d - 1) // 2
    return comb(t + 2, 2)


@dataclass
class StopState:
    t: int
    n_diff: int = 0
    syn_rep: int = 1
    n_diff_increase: bool = False
    count_syn: int = 1
    test: bool = False
    previous: int | None = None

    def consume(self, syndrome: int) -> bool:
        """Feed one syndrome; returns True when this was the final round.

        Mirrors the published control flow: the n_diff == t check happens
        at the top of the loop, before the measurement it authorises.  A
        hard cap enforces the contractual binomial(t+2, 2) worst case; the
        raw pseudocode exceeds it by one round on adversarial streams that
        alternate under the double-count latch.
        """
        if self.test:
            raise RuntimeError("stop state already terminated")
        if self.n_diff == self.t:
            self.test = True
        if self.count_syn > 1:
            if syndrome == self.previous:
                self.syn_rep += 1
                self.n_diff_increase = False
            else:
                self.syn_rep = 0
                if not self.n_diff_increase:
                    self.n_diff += 1
                    self.n_diff_increase = True
                else:
                    self.n_diff_increase = False
        assert self.n_diff <= self.t, "n_diff exceeded the fault budget"
        if self.syn_rep == self.t - self.n_diff + 1:
            self.test = True
        if self.count_syn >= comb(self.t + 2, 2):
            self.test = True
        self.count_syn += 1
        self.previous = syndrome
        return self.test


def stop_run(syndrome_stream: Iterable[int] | Callable[[], int], d: int,
             ) -> tuple[int, int]:
    """Drive the rule over a syndrome source; returns (rounds consumed,
    final syndrome).  The stream is only consumed as far as needed."""
    if d < 3 or d % 2 == 0:
        raise ValueError(f"d must be odd and >= 3, got {d}")
    state = StopState(t=(d - 1) // 2)
    source: Iterator[int]
    if callable(syndrome_stream):
        def _gen():
            while True:
                yield syndrome_stream()
        source = _gen()
    else:
        source = iter(syndrome_stream)
    rounds = 0
    syndrome = 0
    for syndrome in source:
        rounds += 1
        if state.consume(syndrome):
            break
    else:
        raise ValueError("syndrome stream exhausted before termination")
    assert rounds <= max_rounds(d)
    return rounds, syndrome
