"""Pass/fail thresholds for the finite-size studies, versioned in one place.

The theory proves asymptotic statements; any verdict attached to a scan at
desk scale is an engineering convention. Keeping every cutoff here (and
bumping VERSION whenever one moves) makes old result files interpretable:
each serialized study records the defaults version it was judged under.
"""

import math

VERSION = 1

# Proven regime boundaries per lattice kind, as a function of the uniform
# edge weight. Below deloc_max the variance grows without bound; above
# loc_min it stays bounded. Between the two nothing is proven and the scans
# attach no verdict at all.
REGIME = {
    "honeycomb": {"deloc_max": 2.0, "loc_min": 2.0 + math.sqrt(3.0)},
    "square-octagon": {"deloc_max": 2.0, "loc_min": None},
    "square": {"deloc_max": None, "loc_min": 1.0 + math.sqrt(2.0)},
    "triangular": {"deloc_max": None, "loc_min": math.sqrt(3.0)},
}

THRESHOLDS = {
    # Log growth: the fitted slope of variance against log size must clear
    # zero by slope_z standard errors with at least r2_min explained
    # variance. Boundedness: the rise between the smallest and largest size
    # must stay below plateau_max (a slack chosen well under the ~1 unit a
    # genuinely logarithmic profile gains over one doubling at these sizes).
    "variance": {"slope_z": 2.0, "r2_min": 0.90, "plateau_max": 0.5},
    # Circuit study: the surrounding-loop frequency must stay above a_min at
    # every size for the delocalized verdict, and the per-sample sandwich
    # (level loop implies cluster loop) is a theorem, so not one violation
    # is tolerated.
    "loop": {"a_min": 0.05, "max_violations": 0},
    # Tail study: the log-frequency slope must be negative by slope_z
    # standard errors; the level-zero row is a sanity anchor that must sit
    # within sanity_z standard errors of one half.
    "tail": {"slope_z": 2.0, "sanity_z": 4.0},
}


def regime(kind: str, c: float) -> str:
    """'deloc', 'loc' or 'open' for this lattice kind at this weight."""
    r = REGIME.get(kind)
    if r is None:
        return "open"
    if r["deloc_max"] is not None and c <= r["deloc_max"] + 1e-12:
        return "deloc"
    if r["loc_min"] is not None and c > r["loc_min"] + 1e-12:
        return "loc"
    return "open"
