"""periodyn: certify, simulate and compare periodically forced delayed networks."""

from .expressions import PeriodicExpr, Term, const, expr_sum, term_expr
from .kernels import (Atom, DelayKernel, DistributedPart, ExponentialDensity,
                      KernelMoment, TableDensity, UniformDensity, convolve,
                      exp_moment, total_variation)
from .model import (Activation, ConstantIC, ExprIC, NetworkModel, SampledIC,
                    ValidationReport, builtin_example, eval_coefficients, validate)
from .certify import (Certificate, CriterionReport, ModelShapeError,
                      check_period_scaled_criterion, check_row_dominance,
                      check_split_sup_criterion, check_sup_criterion, compute_bounds,
                      find_decay_rate, find_weights, mmatrix_weights, row_residual,
                      search_split_sup_criterion, search_sup_criterion,
                      weighted_sup_norm)
from .integrate import (DivergenceError, HistoryBuffer, HistoryUnderrunError,
                        Trajectory, convergence_order, rhs, simulate)
from .periodic import (NoConvergenceError, PeriodSegment, RateFit,
                       estimate_decay_rate, find_periodic_orbit, period_map,
                       verify_periodicity)

__version__ = "0.1.0"
