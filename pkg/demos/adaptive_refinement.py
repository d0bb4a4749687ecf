"""Adaptive subdivision versus uniform subdivision on the 1-D toy problem.

Uniform subdivision multiplies every region; the adaptive search only
splits the rectangle whose constraint rows bind the current certificate.
This script prints the certified level per constraint budget for both
strategies.
"""

from barrierlp import SynthesisConfig, load_problem, refine_loop, synthesize

problem = load_problem("1d-toy")
cfg = SynthesisConfig(m=6)

print("uniform subdivision:")
for kappa in (1, 2, 4, 8):
    cert = synthesize(problem, SynthesisConfig(m=6, kappa=kappa))
    print(f"  kappa = {kappa}: C = {cert.meta['constraints']:4d}  "
          f"delta_s = {cert.delta_s:.4f}")

print("\nadaptive refinement (budget 150 rows):")
for rounds in (1, 2, 3):
    cert = refine_loop(problem, cfg, rounds=rounds, c_max=150)
    print(f"  rounds = {rounds}: C = {cert.meta['constraints']:4d}  "
          f"delta_s = {cert.delta_s:.4f}")

print("\nthe search drills into the rectangle whose rows pin the heuristic")
print("certificate; on a problem this small, uniform subdivision reaches a")
print("better level per row, but it multiplies *every* region, which is")
print("exactly what becomes unaffordable in higher dimensions")
