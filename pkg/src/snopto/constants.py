"""Physical constants, CODATA 2018 values via scipy.

Everything downstream should import from here rather than scipy directly so
the whole package is pinned to one self-consistent set.
"""

from scipy.constants import (
    G as G_NEWTON,
    c as C_LIGHT,
    hbar as HBAR,
    k as K_B,
    atomic_mass as AMU,
)

__all__ = ["G_NEWTON", "C_LIGHT", "HBAR", "K_B", "AMU"]
