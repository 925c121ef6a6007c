"""Elastic-TCP congestion control, baselines, and a deterministic
dumbbell-network simulator with an experiment harness.

The usual entry points:

    from elasticsim import run_scenario, ScenarioConfig, Link, FlowSchedule
    from elasticsim import make_cca, report_from_trace
"""
from .core import (
    AckDup,
    AckNew,
    CcaState,
    CongestionControl,
    LossTimeout,
    Phase,
    RttState,
    allowed_in_flight,
    make_cca,
    multiplicative_decrease,
    register_cca,
    slow_start_step,
)
from .elastic import (
    ElasticComputation,
    ElasticTcp,
    compute_delta,
    compute_underutilization,
    compute_ur,
    compute_wwf,
    elastic_ca_step,
    elastic_computation,
    newton_sqrt,
    update_rtt_bounds,
)
from .baselines import (
    AgileSd,
    CompoundTcp,
    Cubic,
    NewReno,
    agile_ca_step,
    ctcp_ca_step,
    cubic_window,
    reno_ca_step,
)
from .netsim import (
    DropTailQueue,
    EventQueue,
    FlowSchedule,
    Link,
    Packet,
    RunTrace,
    ScenarioConfig,
    enqueue_droptail,
    maybe_drop_error,
    run_scenario,
    transmit,
)
from .metrics import (
    MetricsReport,
    SummaryStats,
    bdp_packets,
    flow_throughput,
    jain_index,
    loss_ratio,
    report_from_trace,
    summarize,
    system_throughput,
)
from .harness import (
    ExperimentMatrix,
    MatrixResult,
    ResultRow,
    build_cell_config,
    cell_seed,
    emit,
    epoch_rounds,
    load_config,
    run_matrix,
)

__version__ = "0.1.0"
