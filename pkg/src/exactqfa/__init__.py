"""exactqfa: exact-arithmetic simulation and verification of quantum and
classical finite automata on promise problems, plus contextuality games.

Everything numerically load-bearing is computed over big-integer rationals
or certified rational intervals; no floating-point value ever decides an
accept/reject outcome or a verification verdict.
"""

from __future__ import annotations

__version__ = "0.1.0"
