"""Unit conversion helpers.

Internal convention: angular frequencies in rad/us, time in us.  1 MHz of
linear frequency equals 2*pi rad/us, which makes the MHz converter the
identity up to 2*pi and keeps rate/frequency arithmetic legible.
"""

import math

TWO_PI = 2.0 * math.pi

# linear frequency -> angular rad/us
GHZ = TWO_PI * 1e3
MHZ = TWO_PI
KHZ = TWO_PI * 1e-3
HZ = TWO_PI * 1e-9

# time -> us
US = 1.0
NS = 1e-3
MS = 1e3
S = 1e6


def ghz(f):
    """Linear GHz -> angular rad/us."""
    return f * GHZ


def mhz(f):
    """Linear MHz -> angular rad/us."""
    return f * MHZ


def khz(f):
    """Linear kHz -> angular rad/us."""
    return f * KHZ


def to_ghz(w):
    """Angular rad/us -> linear GHz."""
    return w / GHZ


def to_mhz(w):
    """Angular rad/us -> linear MHz."""
    return w / MHZ
