# tests_core/settings.py
"""Hypothesis settings profiles for the property tests.

Tiers:
- DETERMINISM_SETTINGS: 1000 examples - exact symmetry identities
- STANDARD_SETTINGS: 200 examples - regular property tests
- QUICK_SETTINGS: 30 examples - tests that build methods or run small sweeps
"""

from hypothesis import HealthCheck, settings

# Swap unitarity and involution are exact identities; cheap enough to hammer
DETERMINISM_SETTINGS = settings(max_examples=1000, deadline=None)

STANDARD_SETTINGS = settings(max_examples=200, deadline=None)

QUICK_SETTINGS = settings(max_examples=30, deadline=None, suppress_health_check=[HealthCheck.too_slow])
