"""Figure rendering for netcons CSV outputs."""
