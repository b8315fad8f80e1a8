"""catqec: circuit-level QEC simulation and resource estimation for
biased-noise cat qubits (repetition and thin rotated surface codes,
bottom-up Toffoli state preparation, 8-to-2 Toffoli distillation, and
end-to-end overhead accounting)."""

__version__ = "0.1.0"
