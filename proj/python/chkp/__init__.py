"""Line solitary waves: profile, spectral verdicts and the bifurcating branch."""

from ._chkp import (
    BranchRun,
    Grid,
    Parity,
    ParameterError,
    ParityError,
    PeriodicSolution,
    RunConfig,
    SolitonParams,
    SolitonProfile,
    SolverError,
    SpectrumReport,
    Verdict,
    assemble_L,
    assemble_M,
    build_grid,
    eig_L_odd,
    eig_M,
    first_integral_residual,
    merge_json,
    ode_residual,
    reversibility_checks,
    run_branch,
    run_soliton,
    run_spectrum,
    solve_profile,
    write_branch,
    write_soliton,
)

__version__ = "0.1.0"


def defaults():
    """RunConfig with every default, as a dict."""
    import json

    return json.loads(RunConfig().to_json())


def failed(verdicts):
    """Names of the verdicts that did not pass."""
    return [v.name for v in verdicts if not v.passed]
