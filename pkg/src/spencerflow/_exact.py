"""Exact rational linear algebra: row echelon, rank, nullspace over Fraction."""

from fractions import Fraction


def row_echelon(rows):
    """Reduce a list of Fraction rows in place; return pivot column indices."""
    if not rows:
        return []
    n_cols = len(rows[0])
    pivots = []
    piv_r = 0
    for piv_c in range(n_cols):
        for i_row in range(piv_r, len(rows)):
            if rows[i_row][piv_c] != 0:
                break
        else:
            continue
        rows[piv_r], rows[i_row] = rows[i_row], rows[piv_r]
        fp = rows[piv_r][piv_c]
        rows[piv_r] = [x / fp for x in rows[piv_r]]
        for r in range(len(rows)):
            if r == piv_r:
                continue
            fr = rows[r][piv_c]
            if fr == 0:
                continue
            rows[r] = [a - b * fr for a, b in zip(rows[r], rows[piv_r])]
        pivots.append(piv_c)
        piv_r += 1
        if piv_r == len(rows):
            break
    return pivots


def rank(rows):
    """Exact rank of a matrix given as a list of rows of Fractions/ints."""
    work = [[Fraction(x) for x in row] for row in rows]
    return len(row_echelon(work))


def nullspace(rows, n_cols=None):
    """Basis (list of Fraction vectors) of the right nullspace of the matrix."""
    if not rows:
        if n_cols is None:
            raise ValueError("empty matrix needs an explicit column count")
        return [[Fraction(int(i == j)) for j in range(n_cols)] for i in range(n_cols)]
    n_cols = len(rows[0])
    work = [[Fraction(x) for x in row] for row in rows]
    pivots = row_echelon(work)
    free = [c for c in range(n_cols) if c not in pivots]
    basis = []
    for f in free:
        vec = [Fraction(0)] * n_cols
        vec[f] = Fraction(1)
        for r, p in enumerate(pivots):
            vec[p] = -work[r][f]
        basis.append(vec)
    return basis
