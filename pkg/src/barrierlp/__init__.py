"""Safety certificates for polynomial stochastic systems.

Synthesizes stochastic barrier functions for discrete-time polynomial
systems with additive noise by assembling a linear program from Bernstein
coefficient bounds over rectangle families, and verifies the resulting
certificates soundly and empirically.
"""

from .adaptive import Node, adaptive_subdivide, refine_loop, robustness, split
from .bernstein import (BernsteinCoeffs, Enclosure, enclosure, lower_bound,
                        phi_matrix, subdivide_unit_box, to_bernstein)
from .expectation import (DynamicsSpec, NoiseMoments, dynamics_matrix,
                          expected_composition, gamma_expect, gaussian_moments,
                          martingale_gap_coeffs)
from .polyalg import DegreeMask, MultiPoly, cumulative_mask, embed, mul, poly_pow
from .problems import NoiseModel, Problem, fixture_path, load_problem
from .regions import (HyperRect, RegionPartition, affine_matrix,
                      build_partition, pad_frame, rect_cover_difference)
from .synthesis import (Certificate, InfeasibleProblem, LinearProgram,
                        SynthesisConfig, SynthesisError, assemble,
                        export_lp_text, lp_size, safety_level, solve,
                        synthesize)
from .verify import (MonteCarloEstimate, VerificationReport, grid_falsify,
                     monte_carlo_safety, sound_check)

__version__ = "0.1.0"
