from hgat_forecast.metrics.evaluation import (
    MISS_THRESHOLD_M,
    REPORT_COLUMNS,
    AgentMetrics,
    EvalReport,
    MetricSummary,
    agent_metrics,
    evaluate,
    top_k_modes,
    write_report,
)
from hgat_forecast.metrics.runner import evaluate_graphs, evaluate_model, focal_predictions
