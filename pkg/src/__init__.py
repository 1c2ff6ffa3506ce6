"""rodflow: Doi model and DA closure simulator on the 2D torus."""
