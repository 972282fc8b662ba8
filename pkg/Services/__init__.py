"""Servicios del toolkit: datos, modelos de boosting, PEWS, métricas y cohortes sintéticas."""
