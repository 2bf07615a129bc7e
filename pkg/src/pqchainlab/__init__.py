"""pqchainlab: a lab for post-quantum signature placement in TLS-style
certificate authentication.

The package builds certificate hierarchies that mix ML-DSA-65 and
SLH-DSA-SHAKE-192s across root/intermediate/leaf positions, drives a
minimal TLS-1.3-style handshake over TCP under classical, hybrid and
pure post-quantum key establishment, measures latency / transport /
CPU decomposition per handshake, and reproduces the placement,
capacity and economic analyses of the published reference tables.
"""

__version__ = "0.1.0"

from .scenario import (  # noqa: F401
    KexMode,
    Placement,
    PlacementClass,
    Scenario,
    SigFamily,
    classify_placement,
    compose_scenario_id,
    enumerate_matrix,
    parse_scenario_id,
)
