"""Co-optimal sizing and scheduling of discrete loads on a solar profile."""
