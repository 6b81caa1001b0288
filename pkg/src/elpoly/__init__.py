"""Mean-field elastic polymer toolkit.

Parisi functionals and critical-point solvers, RS/1RSB/FRSB phase
classification and diagrams, circulant-Laplacian spectral kernels with
proven convergence envelopes, mean-squared-displacement functionals with
wandering-exponent asymptotics, and a desk-scale Monte Carlo simulator.
"""

from .correlator import (Correlator, exponential, mixture, power_law, zero,
                         eval_b, massless_rsb_criterion, to_mixture, ub,
                         ub_prime, ub_shape)
from .errors import (ElpolyError, NonconvergenceError, QuadratureError,
                     ValidationError)
from .kernels import (BACKEND, CirculantSymbol, ContinuumKernel, LatticeKernel,
                      circulant_quadratic_expectation, continuum,
                      laplacian_eigenvalues, lattice, logdet_asymptotic)
from .measures import (FRSB, ONE_RSB, RS, Atom, ClosedFormCdf, ConstantCdf,
                       ModelParams, ParisiMeasure, RsbSolution, SampledCdf)
from .parisi import (StationarityEvaluator, StationarityResiduals,
                     eval_functional, rs_free_energy, stationarity_residuals)
from .phase import (PhaseBoundaryCurve, classify, g_function, is_rs,
                    larkin_mass, massless_transition_beta, phase_boundary,
                    solve, solve_1rsb, solve_frsb, solve_rs)
from .displacement import (WanderingExponent, gg, h_1rsb, h_continuum,
                           h_discrete, h_frsb_massless, h_rs, loglog_slope,
                           wandering_exponent)
from .simulator import (ChainStats, EnvironmentRealization, batch_stats,
                        estimate_msd, estimate_radius, gradient, hamiltonian,
                        run_chains, run_ensemble, sample_environment)

__version__ = "0.1.0"
