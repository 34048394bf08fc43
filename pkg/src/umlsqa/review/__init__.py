"""Blind pairwise physician review: blinding, storage, win rates, HTTP API."""

from .aggregate import (
    DimensionRates,
    WinRateSummary,
    compute_win_rates,
    deblind,
    largest_remainder,
    render_win_rate_table,
)
from .blinding import (
    AUGMENTED,
    BASELINE,
    BlindedPair,
    Dimension,
    Judgment,
    Verdict,
    assign_blinding,
    slot_a_role,
)
from .service import create_app
from .store import ReviewStore

__all__ = [
    "AUGMENTED",
    "BASELINE",
    "BlindedPair",
    "Dimension",
    "DimensionRates",
    "Judgment",
    "ReviewStore",
    "Verdict",
    "WinRateSummary",
    "assign_blinding",
    "compute_win_rates",
    "create_app",
    "deblind",
    "largest_remainder",
    "render_win_rate_table",
    "slot_a_role",
]
