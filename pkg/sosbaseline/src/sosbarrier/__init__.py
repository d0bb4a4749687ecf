"""Sum-of-squares baseline for stochastic barrier synthesis.

Formulates the same four barrier conditions as the LP lane, but over
semi-algebraic set descriptions with SoS Lagrange multipliers, yielding a
semidefinite program.  Shares problem files and the certificate JSON schema
with the LP lane so certificates can be cross-checked.
"""

from .compare import compare, compare_csv, load_records
from .lagrange import LagrangeReport, lagrange_demo
from .program import (SosCertificate, SosError, SosModel, SosProblem,
                      build_sos_program, solve_sos, sos_problem_from_file)

__version__ = "0.1.0"
