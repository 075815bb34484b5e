"""Closed-form single-target fidelities used to validate the numerical engine.

Every expression is an exact consequence of the two-site rank-1 protocol:
the regulator is prepared in the local ground state, the target at infinite
temperature, and each total-magnetization sector contributes one branch
whose per-round survival amplitude is a trigonometric polynomial in J*tau.
The d=2 argument is Jtau/2 in this operator normalization (Sz eigenvalues
+-1/2); conventions match the engine's spin matrices for every d.

Powers are evaluated as [cos(x)]^(2N) etc.; the d=5 and bilinear-biquadratic
branch weights are folded into the base of the power so large N cannot
overflow.
"""
from __future__ import annotations

import numpy as np

_SQ13 = np.sqrt(13.0)
_SQ22 = np.sqrt(22.0)
_SQ33 = np.sqrt(33.0)


def fidelity_xx_rank1(d: int, N: int, Jtau):
    """Exact XX-model rank-1 fidelity of the single target for d in {2,3,4,5}.

    Accepts scalar or array Jtau; N >= 0 measurements.
    """
    if N < 0:
        raise ValueError("number of measurements must be >= 0")
    x = np.asarray(Jtau, dtype=float)
    cos, sin = np.cos, np.sin
    if d == 2:
        total = 1.0 + cos(x / 2) ** (2 * N)
    elif d == 3:
        total = 1.0 + cos(x) ** (2 * N) + cos(x / np.sqrt(2)) ** (4 * N)
    elif d == 4:
        amp = cos(x) * cos(_SQ13 * x / 2) + (2 / _SQ13) * sin(x) * sin(_SQ13 * x / 2)
        total = (1.0 + cos(1.5 * x) ** (2 * N) + cos(np.sqrt(1.5) * x) ** (4 * N)
                 + amp ** (2 * N))
    elif d == 5:
        q1 = (9 + 11 * cos(2 * x) + 2 * cos(_SQ22 * x)) / 22
        q2 = ((11 + _SQ33) * cos((3 - _SQ33) * x / 2)
              + (11 - _SQ33) * cos((3 + _SQ33) * x / 2)) / 22
        total = (1.0 + cos(2 * x) ** (2 * N) + cos(np.sqrt(3) * x) ** (4 * N)
                 + q1 ** (2 * N) + q2 ** (2 * N))
    else:
        raise ValueError(f"no closed form for d={d}; supported d: 2, 3, 4, 5")
    out = 1.0 / total
    return float(out) if np.isscalar(Jtau) else out


def fidelity_bbh_rank1_d3(N: int, theta: float, Jtau):
    """Exact d=3 bilinear-biquadratic rank-1 fidelity of the single target.

    The branch frequencies are set by a_mn = m*cos(theta) - n*sin(theta):
    the two-state sector oscillates at a_10*Jtau and the three-state sector
    survives each round with probability
    (7 + 3cos(2 a_10 x) + 6cos(a_13 x) + 2cos(3 a_11 x)) / 18.
    """
    if N < 0:
        raise ValueError("number of measurements must be >= 0")
    x = np.asarray(Jtau, dtype=float)
    a10 = np.cos(theta)
    a13m = np.cos(theta) - 3 * np.sin(theta)
    a11m = np.cos(theta) - np.sin(theta)
    q = (7 + 3 * np.cos(2 * a10 * x) + 6 * np.cos(a13m * x) + 2 * np.cos(3 * a11m * x)) / 18
    out = 1.0 / (1.0 + np.cos(a10 * x) ** (2 * N) + q ** N)
    return float(out) if np.isscalar(Jtau) else out
