"""Budgeting the torsional-oscillator test of the noise bound.

Platinum dumbbells at a millihertz resonance, Q = 1e9, 10 mK. The quoted
0.23 mHz coupling requires reading "1 mHz" as a cycle frequency (omega =
2 pi mrad/s), while the quoted few-thousand-year integration time is only
approached reading it as an angular one; the report therefore carries both.

Run with: python3 demos/05_experiment_budget.py
"""

import json

from entnoise.experiment import plan_experiment

fields = dict(
    mass_density=22_000.0,   # platinum, kg/m^3
    frequency=1e-3,          # the quoted millihertz figure
    quality_factor=1e9,
    temperature=0.010,       # 10 mK
)

plan = plan_experiment(fields)
for convention, report in plan["reports"].items():
    print(f"== {convention} ==")
    print(f"  g      = {report['g_per_s'] * 1e3:.4f} mHz")
    print(f"  nbar   = {report['nbar']:.3e}")
    print(f"  kappa  = {report['kappa_per_s']:.3e} 1/s")
    print(f"  tau    = {report['tau_s']:.0f} s per shot")
    print(f"  T_int  = {report['t_int_closed_form_years']:.3e} years (5 sigma)")

print("\nratio of g values (rad-s / hz-cycles):", round(plan["convention_g_ratio"], 6))
print("\nnotes:")
for note in plan["notes"]:
    print(" -", note)

print("\nfull report as JSON:")
print(json.dumps(plan["reports"]["hz-cycles"], indent=2))
