from .reporting import CheckResult, ReportAggregator, format_value

__all__ = ["CheckResult", "ReportAggregator", "format_value"]
