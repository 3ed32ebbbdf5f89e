"""Rate models for multiplexed atomic-ensemble quantum repeaters.

Submodules: decoherence (memory retrieval decay), detection (photon-counting
statistics), fitting (decay fits), linkbudget (direct transmission),
repeater (analytic rate engine), montecarlo (discrete-event simulation),
cli (scenario runner).
"""
__version__ = "0.1.0"
