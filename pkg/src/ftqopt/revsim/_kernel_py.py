"""Pure-numpy gate kernel: the import-time fallback for the compiled core.

State layout is bit-packed: ``bits[q, w]`` is a uint64 word holding bit
``s & 63`` of qubit ``q`` for basis state ``s = 64*w + (s & 63)``.  All gates
act on every packed state at once.
"""
from __future__ import annotations

import numpy as np

BACKEND_NAME = "numpy"


def apply_ops(codes, ctrl_off, ctrls, targ_off, targs, bits, mask):
    """Apply the compiled op stream in place.

    ``codes``: 0 = multi-controlled X (0 controls = plain X), 1 = controlled
    swap.  Controls are encoded as ``q + 1`` for a positive control and
    ``-(q + 1)`` for a negated one.  ``mask`` marks valid state bits in the
    final partial word.
    """
    n_ops = len(codes)
    for i in range(n_ops):
        c0, c1 = ctrl_off[i], ctrl_off[i + 1]
        t0, t1 = targ_off[i], targ_off[i + 1]
        if codes[i] == 0:
            if c1 == c0:
                acc = mask
            else:
                acc = None
                for j in range(c0, c1):
                    enc = ctrls[j]
                    col = bits[enc - 1] if enc > 0 else (~bits[-enc - 1] & mask)
                    acc = col.copy() if acc is None else (acc & col)
                    if enc <= 0 and acc is col:
                        acc = col  # already a fresh array from ~
            for j in range(t0, t1):
                bits[targs[j]] ^= acc
        else:  # CSWAP
            enc = ctrls[c0]
            cc = bits[enc - 1] if enc > 0 else (~bits[-enc - 1] & mask)
            a, b = targs[t0], targs[t0 + 1]
            d = (bits[a] ^ bits[b]) & cc
            bits[a] ^= d
            bits[b] ^= d
    return bits
