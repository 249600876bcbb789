"""crashnet: financial crash prediction through cross-holding network
equilibrium, recast as binary optimization.

Core flow: build or load a network, derive the (smoothed) equilibrium
objective over fixed-point-encoded market values, quadratize the
higher-order terms with ancilla gadgets, and minimize the resulting QUBO
with local solvers or a remote sampler.
"""

__version__ = "0.1.0"
