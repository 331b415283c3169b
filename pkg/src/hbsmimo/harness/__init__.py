"""Experiment runner, reports and CLI."""
from .config import RunConfig, load_config, parse_assignments
from .report import RateReport, emit_report
from .runner import reproduce_table1, run, run_point, sweep_snr

__all__ = ["RunConfig", "load_config", "parse_assignments", "RateReport", "emit_report",
           "reproduce_table1", "run", "run_point", "sweep_snr"]
