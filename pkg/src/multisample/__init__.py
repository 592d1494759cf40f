"""Learning mixtures from several samples with different mixing weights."""
