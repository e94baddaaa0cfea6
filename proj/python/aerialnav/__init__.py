"""Aerial navigation harness.

Synthetic cities, the discrete drone action space, episode runs with baseline and
language-model policies, SR/SPL/DTG metrics with decision-bifurcation analysis, and
the HTTP control service. Everything is implemented in C++; this package re-exports
the compiled module.
"""

from ._core import (
    ControlService,
    EpisodeLog,
    Error,
    Pose,
    Scenario,
    Session,
    actions,
    analyze_run,
    apply_action,
    dataset_stats,
    describe,
    detect_cdb,
    dtg,
    evaluate,
    evaluate_csv,
    fov_overlap,
    generate_scenarios,
    load_corpus,
    load_episode_log,
    load_run,
    load_scenario,
    progress_curve,
    render,
    run_corpus,
    run_episode,
    scenario_from_json,
    spl,
    success_rate,
    write_corpus,
)

__all__ = [name for name in dir() if not name.startswith("_")]
