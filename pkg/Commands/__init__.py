"""Subcomandos de la CLI (synth, prep, train, eval, timeline)."""
