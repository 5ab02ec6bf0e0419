"""verikit: simulation-based Verilog equivalence checking, testbench
fuzzing, dataset curation, and RL reward plumbing."""

__version__ = "0.1.0"
