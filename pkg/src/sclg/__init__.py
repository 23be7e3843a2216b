"""Semiclassical Laguerre-Gaussian mode toolkit.

Mode evaluation, semiclassical Wigner transforms, the cubic ladder
operator and its propagator, SU(3) generator checks, Hamilton flows of
the operator's Weyl symbol, and an Egorov-type transport harness.
"""

__version__ = "0.1.0"
