"""Empirical constants used by checks and experiments.

None of these are proven bounds; each was fixed after an oracle run at
desk scale and is only used to decide PASS/FAIL of a trend or bound.
"""

# |sum_{n<=N} chi_d(n)| <= PV * sqrt|d| log|d|
PV = 2.0
# non-principal fourth moment <= FOURTH_MOMENT * N^2 q log(q)^6
FOURTH_MOMENT = 10.0
# |S(U, V, r) - K_r| <= PARTIAL_SUM * (1/sqrt U + 1/V^2)
PARTIAL_SUM = 2.0
# |sum_{u<r<=u+v} K_r - v| <= WINDOW_SUM
WINDOW_SUM = 5.0
# |S(10^4, 10^2, 1) - K_1| < PARTIAL_SUM_ABS
PARTIAL_SUM_ABS = 0.05
# monotone-convergence slack along U for the partial sums
PARTIAL_SUM_SLACK = 0.02

# main_term / (x F) must lie in this band at the largest x of the trend run
RATIO_BAND = (0.85, 1.15)
# |average - main term| may grow by this factor between successive box sizes
HYSTERESIS = 1.10

MAIN_TERM_XS = (1_000, 10_000, 20_000)
FAMILY_SIDES = (10, 20, 40)
FAMILY_X = 5_000
INTERVAL = (0.2, 0.8)
EXCEPTION_REL_TOL = 0.2
