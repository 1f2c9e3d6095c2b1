"""Configuration, ingestion, orchestration and report emission."""

from demogrowth.pipeline.config import DatasetConfig, RunConfig, load_config
from demogrowth.pipeline.ingest import ingest_csv
from demogrowth.pipeline.report import Report, Table, emit_report
from demogrowth.pipeline.run import run_pipeline

__all__ = [
    "DatasetConfig",
    "Report",
    "RunConfig",
    "Table",
    "emit_report",
    "ingest_csv",
    "load_config",
    "run_pipeline",
]
