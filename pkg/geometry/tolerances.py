"""Numerical tolerances for the geometry layer (unit-size grids)."""

TOL_DEGENERATE = 1e-12
TOL_PIVOT = 1e-8
# grid-wide normal candidates must keep at least this residual everywhere
TOL_GAUGE = 1e-2
