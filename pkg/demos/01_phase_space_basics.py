"""Phase-space primitives: physicality, partial reversal, separability.

Run with: python3 demos/01_phase_space_basics.py
"""

import numpy as np

from entnoise import (
    is_separable,
    log_negativity,
    partial_reverse,
    validate_covariance,
)
from entnoise.states import direct_sum, squeezed_cov, two_mode_squeezed_cov, vacuum_cov

print("== Physicality (uncertainty principle) ==")
for name, gamma in [
    ("vacuum", vacuum_cov()),
    ("zero matrix", np.zeros((4, 4))),
    ("squeezed x vacuum", direct_sum(squeezed_cov(0.5), np.eye(2))),
    ("two-mode squeezed r=0.3", two_mode_squeezed_cov(0.3)),
]:
    ok, lam = validate_covariance(gamma)
    print(f"  {name:26s} physical={ok!s:5s}  min eig(gamma + i Delta) = {lam:+.3e}")

print("\n== Separability via momentum reversal ==")
print("A state is separable iff flipping p_b keeps the state physical.")
for r in (0.0, 0.1, 0.3, 0.8):
    gamma = two_mode_squeezed_cov(r)
    ok, lam = is_separable(gamma)
    print(f"  squeezing r={r:.1f}: separable={ok!s:5s} margin={lam:+.3e} "
          f"log-negativity={log_negativity(gamma):.4f} (expected {2 * r:.1f})")

print("\nThe reversal flips the p_b row and column:")
gamma = two_mode_squeezed_cov(0.3)
print(np.round(gamma, 3))
print("  ->")
print(np.round(partial_reverse(gamma), 3))
