"""Human-readable output for the command line."""
from .summary import dump_effect, dump_overlap, dump_plan, dump_report  # noqa: F401
