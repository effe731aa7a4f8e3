"""Trade-off detection, cause identification and confidence reports."""
from .analysis import (  # noqa: F401
    CauseEvidence, Detection, Role, TradeoffAnalysis, TradeoffQuery, analyze, analyze_all,
    detect_tradeoff, measure,
)
from .report import (  # noqa: F401
    CauseDistribution, ConfidenceLevel, ConfidenceTable, Report, aggregate, annotated_dot, build_report,
    cause_distribution, confidence_level, export_report, load_report, report_text,
)
from .sign import Sign, sign  # noqa: F401
