"""Unshared secret key cryptosystem for MIMO wiretap channels.

Encryption with null-space artificial noise, exact and approximate counting
of Eve's effective key space, analytic secrecy bounds and Monte Carlo
estimation of secrecy outage.
"""

__version__ = "0.1.0"
