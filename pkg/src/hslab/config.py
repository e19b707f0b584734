"""Global numerical constants shared across modules."""

#: Tolerance for deciding membership of the unit circle / boundary sets.
BOUNDARY_TOL = 1e-12

#: Significant digits used for every float written to CSV/JSON/SVG.
FLOAT_DIGITS = 9

#: Hard cap on the number of steps of a single erosion walk.
MAX_WALK_STEPS = 10**9

#: Depth at which half-strips are truncated for rendering and sampling.
STRIP_RENDER_DEPTH = -40.0


def fmt(x: float) -> str:
    """Format a float with the fixed output precision."""
    return format(float(x), f".{FLOAT_DIGITS}g")
