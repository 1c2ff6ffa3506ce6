"""Fields, states, configuration and diagnostic records."""
