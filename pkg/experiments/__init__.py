from .scenarios import (
    SCENARIOS,
    Expectation,
    ExpectationResult,
    PaperScenario,
    Provenance,
    ScenarioReport,
    report_frame,
    run_report,
    run_scenario,
    try_scenario,
    write_report,
)

__all__ = [
    "SCENARIOS",
    "Expectation",
    "ExpectationResult",
    "PaperScenario",
    "Provenance",
    "ScenarioReport",
    "report_frame",
    "run_report",
    "run_scenario",
    "try_scenario",
    "write_report",
]
