"""Empirical success probability of trust-region recovery as the number of
devices grows at a fixed number of measurements (Gaussian, N = K = 50,
L = 1000).

Beyond s = L / (N + K) + 1 there are more unknowns than equations and no
method can succeed; the empirical transition sits a little before it. Set
BLINDMIX_THREADS to run trials in parallel. Pass a trial count as the first
argument (default 4) to trade accuracy for time.
"""

import sys

from blindmix.experiments import default_config, run_phase_transition, success_rates
from blindmix.records import write_records

trials = int(sys.argv[1]) if len(sys.argv) > 1 else 4
cfg = default_config("phase_transition", trials=trials)
records = run_phase_transition(cfg)
rates = success_rates(records)

print(f"N={cfg.N} K={cfg.K} L={cfg.L}, {trials} trials per point; "
      f"counting bound s <= {cfg.L / (cfg.N + cfg.K) + 1:.0f}\n")
for s, p in rates.items():
    print(f"s={s:2d}  {'#' * round(20 * p):<20}  {p:.2f}")

write_records(records, "phase_transition.csv")
