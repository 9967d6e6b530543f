"""Fog-computing failure-handling simulator.

Deterministic discrete-event simulation of tasks on unreliable fog devices,
with a fuzzy-logic failure-handling policy (checkpoint / migrate / replicate)
and two baseline policies, replaying real or synthetic failure traces.
"""

__version__ = "0.1.0"
