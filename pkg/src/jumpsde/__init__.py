"""Scalar SDEs driven by Poisson white noise.

Jumps can be interpreted as the plain Ito product, as the truncated
series correction built from the recursion g_j = g * d/dx g_{j-1}, or as
the flow of the equivalent jump ODE dy/dl = g(z + y, t) (a compound-
Poisson special case of the Marcus canonical integral). The package
provides the expression DSL, jet differentiation, noise sampling, path
simulation, a Monte Carlo harness, and a CLI.
"""

from .errors import (EvalDomainError, JetOrderError, JumpSdeError,
                     MissingReferenceError, NonFiniteStateError,
                     NonSmoothPointError, ParseError, SimulationError,
                     ValidationError)
from .expr import Expr, evaluate, parse, pretty
from .harness import (EnsembleConfig, ErrorReport, compare_interpretations,
                      convergence_study, pathwise_error, run_ensemble)
from .jets import Jet, eval_jet, jet_mul
from .jumps import (ClosedForm, ConstantKind, LinearKind, OdeSolve,
                    SeriesTruncation, closed_form_jump, df_coefficients,
                    df_series_jump, ito_jump, marcus_jump)
from .noise import (CompoundPoissonPath, Constant, Exponential, Normal,
                    Uniform, c_value, increment, path_seed, sample_path)
from .simulate import (DiPaolaFalsone, Ito, MarcusClosedForm, MarcusOde,
                       SdeModel, SimConfig, Trajectory, drift_step,
                       reference_path, simulate_path)

__version__ = "0.1.0"

__all__ = [
    "EvalDomainError", "JetOrderError", "JumpSdeError",
    "MissingReferenceError", "NonFiniteStateError", "NonSmoothPointError",
    "ParseError", "SimulationError", "ValidationError",
    "Expr", "evaluate", "parse", "pretty",
    "EnsembleConfig", "ErrorReport", "compare_interpretations",
    "convergence_study", "pathwise_error", "run_ensemble",
    "Jet", "eval_jet", "jet_mul",
    "ClosedForm", "ConstantKind", "LinearKind", "OdeSolve",
    "SeriesTruncation", "closed_form_jump", "df_coefficients",
    "df_series_jump", "ito_jump", "marcus_jump",
    "CompoundPoissonPath", "Constant", "Exponential", "Normal", "Uniform",
    "c_value", "increment", "path_seed", "sample_path",
    "DiPaolaFalsone", "Ito", "MarcusClosedForm", "MarcusOde",
    "SdeModel", "SimConfig", "Trajectory", "drift_step",
    "reference_path", "simulate_path",
    "__version__",
]
