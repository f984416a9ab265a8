"""Persistence analysis of end-of-day share prices mapped onto Ising spins."""
__version__ = "0.1.0"

from ._accel import BACKEND
from .exceptions import ConfigError, DomainError, FitError, NoWindowsError, ParseError
from .fitting import (BootstrapSummary, DoublePowerLawFit, SegmentFit, bootstrap_slopes,
                      fit_double_power_law, fit_power_law)
from .ingestion import PanelDataset, RawQuote, parse_eod_csv, partition_windows, read_eod_csv
from .market import (PersistenceCurve, PriceSeries, SampleWindow, SpinTrajectory,
                     average_curves, build_spin_trajectory, map_to_spin, persistence_curve,
                     window_curve, window_first_flips)
from .synthetic import (WalkConfig, exact_survival, reference_curve, simulate_walk_panel,
                        simulated_persistence)
