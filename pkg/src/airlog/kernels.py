"""Span-evaluation kernel: the hot inner loop of the incremental solver.

A span is a run of manifestation-free steps whose per-step rules all follow
one compiled schema. The kernel walks the steps in order, firing template
rules against the truth matrix and maintaining prefix counts for interval
cardinality checks.

The same function runs either jit-compiled by numba or as plain Python over
numpy arrays; selection defaults to numba when importable and can be forced
with the environment flag ``AIRLOG_NUMBA=0`` (or ``1``).
"""

from __future__ import annotations

import os

import numpy as np


def eval_span(
    truth,          # uint8 [n_pred_rows, n_cols]
    cnt,            # int32 [n_cnt_rows, n_cols] prefix counts per counted pred
    cnt_of_row,     # int32 [n_pred_rows] pred row -> cnt row (or -1)
    heads,          # int32 [n_rules] head pred row, evaluation order
    min_steps,      # int32 [n_rules] first step at which the rule exists
    lit_start,      # int32 [n_rules+1] offsets into the literal arrays
    lit_rows,       # int32 [n_lits] literal pred row
    lit_offs,       # int32 [n_lits] step offset (<= 0)
    lit_signs,      # int8  [n_lits] 1 positive, 0 negated
    card_rows,      # int32 [n_rules] cnt row of the card pred (or -1)
    card_los,       # int32 [n_rules] interval offsets relative to t
    card_his,       # int32 [n_rules]
    t_from,         # int64
    t_to,           # int64
    skip_first_roll,  # int64: first step's prefix counts were already rolled
):
    n_rules = heads.shape[0]
    n_cnt = cnt.shape[0]
    for t in range(t_from, t_to + 1):
        if t > t_from or not skip_first_roll:
            for c in range(n_cnt):
                cnt[c, t] = cnt[c, t - 1]
        for i in range(n_rules):
            if t < min_steps[i]:
                continue
            ok = True
            for j in range(lit_start[i], lit_start[i + 1]):
                v = truth[lit_rows[j], t + lit_offs[j]]
                if lit_signs[j] == 1:
                    if v == 0:
                        ok = False
                        break
                else:
                    if v != 0:
                        ok = False
                        break
            if not ok:
                continue
            cr = card_rows[i]
            if cr >= 0:
                hi = t + card_his[i]
                if hi < 1:
                    continue
                lo = t + card_los[i]
                if lo < 1:
                    lo = 1
                if lo > hi:
                    continue
                if cnt[cr, hi] - cnt[cr, lo - 1] <= 0:
                    continue
            h = heads[i]
            if truth[h, t] == 0:
                truth[h, t] = 1
                hc = cnt_of_row[h]
                if hc >= 0:
                    cnt[hc, t] += 1


_jitted = None


def _numba_available() -> bool:
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


def numba_enabled_by_default() -> bool:
    flag = os.environ.get("AIRLOG_NUMBA")
    if flag is not None:
        return flag.strip().lower() not in ("0", "false", "no", "off")
    return _numba_available()


def get_span_evaluator(use_numba: bool | None = None):
    """Return the span evaluator; numba-jitted when requested and available."""
    if use_numba is None:
        use_numba = numba_enabled_by_default()
    if not use_numba:
        return eval_span
    global _jitted
    if _jitted is None:
        if not _numba_available():
            return eval_span
        import numba

        _jitted = numba.njit(cache=True)(eval_span)
    return _jitted


def empty_i32(n):
    return np.zeros(n, dtype=np.int32)
