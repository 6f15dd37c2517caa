import os

# One seed controls every randomized suite; override to explore.
SEED = int(os.environ.get("INTERPOLMC_SEED", "20240817"))
