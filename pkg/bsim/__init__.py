"""
Boson Sampling Verification Toolkit
Desk-scale simulators for twofold scattershot, squeezed-vacuum and
eight-port-homodyne boson sampling, with exact oracles for their identities
"""
__version__ = "1.0.0"
