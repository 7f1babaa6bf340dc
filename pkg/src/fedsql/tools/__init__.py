"""Operator tooling: CLI, test-data generator and benchmark harness."""

from .bench import (
    BenchReport,
    BenchRow,
    RunningScenario,
    ScalingPoint,
    ScenarioQuery,
    bench_latency,
    bench_scaling,
    latency_csv,
    launch_latency_scenario,
    launch_scaling_scenario,
    linear_fit,
    scaling_csv,
)
from .cli import cli, main
from .ntuple import NtupleSpec, generate_ntuple

__all__ = [
    "BenchReport",
    "BenchRow",
    "NtupleSpec",
    "RunningScenario",
    "ScalingPoint",
    "ScenarioQuery",
    "bench_latency",
    "bench_scaling",
    "cli",
    "generate_ntuple",
    "latency_csv",
    "launch_latency_scenario",
    "launch_scaling_scenario",
    "linear_fit",
    "main",
    "scaling_csv",
]
