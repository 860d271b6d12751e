from .coins import COIN_MULTIPLICITY, COINS
from .engine import (
    Lattice,
    encode,
    extract_effective_povm,
    perturb_schedule,
    run_with_detectors,
    step,
)
from .schedule import DEFAULT_PLAN, CoinSchedule, Detector, SiteCoin, coin_multiset, default_schedule
