"""Physical constants (SI units). Single source of truth for unit restoration.

Values: CODATA 2018 / SI-2019 exact definitions.
"""

# Newtonian constant of gravitation, m^3 kg^-1 s^-2 (CODATA 2018)
G_NEWTON = 6.674_30e-11

# Reduced Planck constant, J s (h = 6.62607015e-34 J s exact, divided by 2 pi)
HBAR = 1.054_571_817e-34

# Boltzmann constant, J / K (exact since the 2019 SI redefinition)
K_BOLTZMANN = 1.380_649e-23

# Julian year in seconds, for readable integration times
YEAR_SECONDS = 365.25 * 86_400.0
