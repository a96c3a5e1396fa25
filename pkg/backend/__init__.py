"""Backend package for the CSATN uplink analysis toolkit.

Modules (csatn_module):
- config: constants, default scenario, tolerances and sweep presets
- schemas: pydantic models for scenarios, estimates, curves and reports
- core_model: derived channel constants and configuration validation
- spatial: point processes and lens distance laws
- channel: Nakagami and shadowed-Rician fading
- quadrature, analytic: Laplace transforms, coverage and rate expressions
- montecarlo: seeded realization-level simulator
- sweeps: figure presets, comparison reports, threshold search
- main: command-line interface
"""
