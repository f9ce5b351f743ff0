"""Round-synchronous message passing with per-channel capacity one."""
from .engine import NodeContext, NodeProgram, run_protocol
from .metrics import RECORD_COLUMNS, RunMetrics, Trace
from .scheduler import (round_cap_multiplier, schedule_parallel, schedule_runs,
                        scheduler_cap)
from .topology import INF, Topology
from .trees import (BfsTree, Meter, VirtualNet, build_bfs_tree, estimate_diameter,
                    exact_hop_diameter, pipeline_rounds, pipelined_broadcast)

__all__ = [
    "INF", "BfsTree", "Meter", "NodeContext", "NodeProgram", "RECORD_COLUMNS", "RunMetrics",
    "Topology", "Trace", "VirtualNet", "build_bfs_tree", "estimate_diameter",
    "exact_hop_diameter", "pipeline_rounds", "pipelined_broadcast", "round_cap_multiplier",
    "run_protocol", "schedule_parallel", "schedule_runs", "scheduler_cap",
]
