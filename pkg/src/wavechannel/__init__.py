"""Time-scale characterization of multipath channels."""
