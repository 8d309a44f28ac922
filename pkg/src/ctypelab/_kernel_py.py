"""Pure-Python orbit kernel.

Works on dyadic states: every coordinate is mantissa * 2**exp with integer
mantissa and exponent, and every weight is a signed power of two, so one
operator step is index bookkeeping plus integer exponent arithmetic. Ball
and threshold tests run through exponent prefilters and fall back to exact
integer comparisons only near the threshold. The compiled twin in
_kernel.pyx mirrors this module function by function.
"""

from __future__ import annotations

BACKEND = "pure"


def _merge_entries(coords, mans, exps, zis, blks):
    seen = {}
    out_c, out_m, out_e, out_z, out_b = [], [], [], [], []
    for i in range(len(coords)):
        c = coords[i]
        j = seen.get(c)
        if j is None:
            seen[c] = len(out_c)
            out_c.append(c)
            out_m.append(mans[i])
            out_e.append(exps[i])
            out_z.append(zis[i])
            out_b.append(blks[i])
        else:
            m1, e1 = out_m[j], out_e[j]
            m2, e2 = mans[i], exps[i]
            e = e1 if e1 < e2 else e2
            m = (m1 << (e1 - e)) + (m2 << (e2 - e))
            if m == 0:
                out_m[j] = 0
            else:
                tz = (m & -m).bit_length() - 1
                out_m[j] = m >> tz
                out_e[j] = e + tz
    if 0 in out_m:
        keep = [i for i in range(len(out_c)) if out_m[i] != 0]
        out_c = [out_c[i] for i in keep]
        out_m = [out_m[i] for i in keep]
        out_e = [out_e[i] for i in keep]
        out_z = [out_z[i] for i in keep]
        out_b = [out_b[i] for i in keep]
    return out_c, out_m, out_e, out_z, out_b


def _init_state(blocks, items):
    coords, mans, exps, zis, blks = [], [], [], [], []
    starts = sorted((b[0], n) for n, b in blocks.items())
    bases = [s[0] for s in starts]
    import bisect

    for c, m, e in items:
        if m == 0:
            continue
        idx = bisect.bisect_right(bases, c) - 1
        n = starts[idx][1]
        base, size = blocks[n][0], blocks[n][1]
        if not base <= c < base + size:
            raise ValueError(f"coordinate {c} outside supplied blocks")
        coords.append(c)
        mans.append(m)
        exps.append(e)
        blks.append(n)
        off = c - base
        ends = blocks[n][2]
        z = 0
        while z < len(ends) and ends[z] < off:
            z += 1
        zis.append(z)
    return coords, mans, exps, zis, blks


def _step(blocks, coords, mans, exps, zis, blks):
    """One operator application in place; returns True when a wrap occurred."""
    wrapped = False
    n_entries = len(coords)
    for i in range(n_entries):
        blk = blocks[blks[i]]
        base, size, ends, shifts = blk[0], blk[1], blk[2], blk[3]
        off = coords[i] - base
        if off < size - 1:
            off += 1
            z = zis[i]
            while ends[z] < off:
                z += 1
            zis[i] = z
            exps[i] += shifts[z]
            coords[i] = base + off
        else:
            wrapped = True
            m0, e0 = mans[i], exps[i]
            interior_exp, v_man, v_exp = blk[4], blk[5], blk[6]
            coords[i] = base
            mans[i] = -m0
            exps[i] = e0 - interior_exp
            zis[i] = 0
            if v_man:
                coords.append(blk[7])
                mans.append(m0 * v_man)
                exps.append(e0 + v_exp)
                zis.append(0)
                blks.append(blk[8])
    return wrapped


def _term_bounds(m, e, cm, ce):
    """(lb_exp, ub_exp) for |m*2^e - cm*2^ce|; lb_exp None when ambiguous."""
    if cm == 0:
        if m == 0:
            return None, None
        bl = (-m if m < 0 else m).bit_length()
        return e + bl - 1, e + bl
    if m == 0:
        bl = (-cm if cm < 0 else cm).bit_length()
        return ce + bl - 1, ce + bl
    bla = (-m if m < 0 else m).bit_length()
    blc = (-cm if cm < 0 else cm).bit_length()
    lb_a, ub_a = e + bla - 1, e + bla
    lb_c, ub_c = ce + blc - 1, ce + blc
    if (m > 0) != (cm > 0):
        return max(lb_a, lb_c), max(ub_a, ub_c) + 1
    if lb_a >= ub_c + 1:
        return lb_a - 1, ub_a
    if lb_c >= ub_a + 1:
        return lb_c - 1, ub_c
    return None, max(ub_a, ub_c)


def _exact_value(terms, p):
    """Exact p-evaluation of the terms as (num, exp2): value = num * 2**exp2.

    terms: list of (m, e) coordinate differences. p == 2 sums squares,
    p == 1 sums absolute values.
    """
    if not terms:
        return 0, 0
    if p == 2:
        parts = [(m * m, 2 * e) for m, e in terms]
    else:
        parts = [((-m if m < 0 else m), e) for m, e in terms]
    e0 = min(e for _, e in parts)
    acc = 0
    for m, e in parts:
        acc += m << (e - e0)
    return acc, e0


def _cmp_value_thr(num, exp2, thr_num, thr_den):
    """Compare num*2**exp2 with thr_num/thr_den: -1, 0, +1."""
    if exp2 >= 0:
        lhs = (num * thr_den) << exp2
        rhs = thr_num
    else:
        lhs = num * thr_den
        rhs = thr_num << (-exp2)
    if lhs < rhs:
        return -1
    if lhs > rhs:
        return 1
    return 0


def run_sweep(blocks, p, items, center_items, mode, thr_num, thr_den, jmax, lo, hi):
    """Iterate T over [0, jmax], evaluating one statistic per step.

    blocks: dict n -> (base, size, ends, shifts, interior_exp, v_man,
                       v_exp, phi_base, phi_block)
    mode 'le': collect steps j with value <= thr   (ball visits)
    mode 'ge': collect steps j with value >= thr   (threshold exceedances)
    mode 'max': track the maximum value
    The value is || P_[lo,hi) (T^j x - c) ||_p^p with the exactness
    convention (squared norm for p == 2); c is a fixed vector.
    Returns (hits, max_num, max_exp2, final_items).
    """
    coords, mans, exps, zis, blks = _init_state(blocks, items)
    center = {c: (m, e) for c, m, e in center_items if m != 0}
    unrestricted = lo < 0
    hits = []
    best_num, best_exp = 0, 0
    best_lb = None
    if mode in ("le", "ge"):
        if thr_num <= 0:
            raise ValueError("threshold must be positive")
        tn_bl = thr_num.bit_length() if isinstance(thr_num, int) else int(thr_num).bit_length()
        td_bl = thr_den.bit_length()
        thr_lb = tn_bl - td_bl - 1   # 2**thr_lb <= thr
        thr_ub = tn_bl - td_bl + 1   # thr < 2**thr_ub

    for j in range(jmax + 1):
        if j > 0:
            if _step(blocks, coords, mans, exps, zis, blks):
                coords, mans, exps, zis, blks = _merge_entries(coords, mans, exps, zis, blks)
        # gather term bounds
        n_terms = 0
        max_lb = None
        max_ub = None
        ambiguous = False
        touched = 0
        for i in range(len(coords)):
            c = coords[i]
            if not unrestricted and not lo <= c < hi:
                continue
            cm, ce = center.get(c, (0, 0))
            if cm:
                touched += 1
            lb, ub = _term_bounds(mans[i], exps[i], cm, ce)
            if ub is None:
                continue
            n_terms += 1
            if lb is None:
                ambiguous = True
            elif max_lb is None or lb > max_lb:
                max_lb = lb
            if max_ub is None or ub > max_ub:
                max_ub = ub
        if touched < len(center):
            state_coords = None
            for c, (cm, ce) in center.items():
                if not unrestricted and not lo <= c < hi:
                    continue
                if state_coords is None:
                    state_coords = set(coords)
                if c in state_coords:
                    continue
                bl = (-cm if cm < 0 else cm).bit_length()
                n_terms += 1
                lb, ub = ce + bl - 1, ce + bl
                if max_lb is None or lb > max_lb:
                    max_lb = lb
                if max_ub is None or ub > max_ub:
                    max_ub = ub

        if n_terms == 0:
            val_lb = val_ub = None  # value is exactly 0
        else:
            scale = 2 if p == 2 else 1
            val_lb = scale * max_lb if max_lb is not None else None
            val_ub = scale * max_ub + n_terms.bit_length()

        if mode == "max":
            if n_terms == 0:
                continue
            if best_lb is not None and val_ub is not None and val_ub <= best_lb:
                continue
            num, e2 = _exact_terms_value(blocks, coords, mans, exps, center, lo, hi, unrestricted, p)
            if num == 0:
                continue
            if best_num == 0 or _cmp_pair((num, e2), (best_num, best_exp)) > 0:
                best_num, best_exp = num, e2
                best_lb = num.bit_length() - 1 + e2
            continue

        # hit tests
        if n_terms == 0:
            verdict = mode == "le"
        elif not ambiguous and val_lb is not None and val_lb >= thr_ub:
            verdict = mode == "ge"
        elif val_ub is not None and val_ub <= thr_lb:
            verdict = mode == "le"
        else:
            num, e2 = _exact_terms_value(blocks, coords, mans, exps, center, lo, hi, unrestricted, p)
            cmp = _cmp_value_thr(num, e2, thr_num, thr_den)
            verdict = (cmp <= 0) if mode == "le" else (cmp >= 0)
        if verdict:
            hits.append(j)

    final_items = [(coords[i], mans[i], exps[i]) for i in range(len(coords))]
    return hits, best_num, best_exp, final_items


def _exact_terms_value(blocks, coords, mans, exps, center, lo, hi, unrestricted, p):
    terms = []
    seen = set()
    for i in range(len(coords)):
        c = coords[i]
        if not unrestricted and not lo <= c < hi:
            continue
        cm, ce = center.get(c, (0, 0))
        if cm:
            seen.add(c)
            m1, e1, m2, e2 = mans[i], exps[i], cm, ce
            e = e1 if e1 < e2 else e2
            m = (m1 << (e1 - e)) - (m2 << (e2 - e))
            if m:
                terms.append((m, e))
        else:
            terms.append((mans[i], exps[i]))
    for c, (cm, ce) in center.items():
        if c in seen:
            continue
        if not unrestricted and not lo <= c < hi:
            continue
        terms.append((-cm, ce))
    return _exact_value(terms, p)


def _cmp_pair(a, b):
    """Compare a = (num, exp2) with b, both nonnegative values num*2**exp2."""
    n1, e1 = a
    n2, e2 = b
    if e1 >= e2:
        n1 <<= e1 - e2
    else:
        n2 <<= e2 - e1
    return (n1 > n2) - (n1 < n2)


def evolve(blocks, items, steps):
    """Plain T**steps by stepping; returns the final items."""
    coords, mans, exps, zis, blks = _init_state(blocks, items)
    for _ in range(steps):
        if _step(blocks, coords, mans, exps, zis, blks):
            coords, mans, exps, zis, blks = _merge_entries(coords, mans, exps, zis, blks)
    return [(coords[i], mans[i], exps[i]) for i in range(len(coords))]
