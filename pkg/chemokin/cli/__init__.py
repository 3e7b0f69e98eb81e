"""CLI tools for chemokin."""
