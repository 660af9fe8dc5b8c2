"""State-dependent temperature control for Langevin optimisation.

Solves the entropy-regularised HJB equation for a scalar objective,
turns its solution into a state-dependent noise scale, and benchmarks the
resulting Langevin iteration against constant, power-law and
replica-exchange baselines.
"""

__version__ = "0.1.0"
