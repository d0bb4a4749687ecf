"""Reproduce the desk-scale benchmark table on the bundled 2-D fixtures.

Sweeps the barrier degree at fixed subdivision on both the simple and the
hard 2-D environment and prints a compact results table; the hard
environment needs a much more expressive template before it certifies
anything at all.
"""

from barrierlp import SynthesisConfig, load_problem, synthesize

for name, grid in (("2d-s", [(4, 4), (6, 4), (8, 4), (6, 10)]),
                   ("2d-h", [(6, 6), (8, 6), (10, 4)])):
    problem = load_problem(name)
    print(f"\n{name} (horizon K = {problem.horizon})")
    print(f"  {'m':>3} {'kappa':>5} {'t(s)':>7} {'delta_s':>8} "
          f"{'M':>4} {'C':>7}")
    for m, kappa in grid:
        cert = synthesize(problem, SynthesisConfig(m=m, kappa=kappa))
        meta = cert.meta
        print(f"  {m:>3} {kappa:>5} {meta['wall_time_s']:>7.2f} "
              f"{cert.delta_s:>8.4f} {meta['variables']:>4} "
              f"{meta['constraints']:>7}")

print("\nsame CSV via the command line:")
print("  barrierlp sweep 2d-s --m 4,6,8 --kappa 4")
