"""Energy-aware stable connected dominating sets for MANET route discovery."""

from .backbone import Algorithm, BackboneResult, Color, NodeAttributes, baseline_cds, eas_cds
from .config import ScenarioConfig, parse_config
from .netgraph import UdgSnapshot, build_udg, neighbor_tables
from .simkernel import MetricsRecord, run_simulation

__all__ = ["Algorithm", "BackboneResult", "Color", "NodeAttributes", "ScenarioConfig",
           "MetricsRecord", "UdgSnapshot", "baseline_cds", "build_udg", "eas_cds",
           "neighbor_tables", "parse_config", "run_simulation"]
