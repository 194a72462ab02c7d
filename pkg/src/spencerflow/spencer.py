"""Symmetric tensor algebra over a Lie algebra, the two vertical differentials,
Chevalley-Eilenberg cohomology dimensions, and the Betti-number decomposition.

Everything here runs in exact rational arithmetic so "equals zero" claims are
exact, not tolerance-based.
"""

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

from . import _exact
from .liealg import DimensionMismatch, basis_vector, bracket


@dataclass(frozen=True)
class SymTensor:
    """Element of Sym^k(g): map from sorted basis multi-indices to coefficients."""

    dim: int
    degree: int
    terms: dict = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for idx, coeff in self.terms.items():
            if len(idx) != self.degree:
                raise ValueError(f"multi-index {idx} has wrong length")
            if tuple(sorted(idx)) != tuple(idx):
                raise ValueError(f"multi-index {idx} is not sorted")
            if coeff != 0:
                clean[tuple(idx)] = coeff
        object.__setattr__(self, "terms", clean)

    def __add__(self, other):
        if self.dim != other.dim or self.degree != other.degree:
            raise DimensionMismatch("tensors live in different spaces")
        terms = dict(self.terms)
        for idx, c in other.terms.items():
            terms[idx] = terms.get(idx, 0) + c
        return SymTensor(self.dim, self.degree, terms)

    def __sub__(self, other):
        return self + (-1) * other

    def __rmul__(self, scalar):
        return SymTensor(
            self.dim, self.degree, {i: scalar * c for i, c in self.terms.items()}
        )

    def __eq__(self, other):
        return (
            isinstance(other, SymTensor)
            and self.dim == other.dim
            and self.degree == other.degree
            and self.terms == other.terms
        )

    def max_norm(self):
        return max((abs(c) for c in self.terms.values()), default=Fraction(0))

    @staticmethod
    def monomial(dim, indices, coeff=Fraction(1)):
        return SymTensor(dim, len(indices), {tuple(sorted(indices)): coeff})

    @staticmethod
    def zero(dim, degree):
        return SymTensor(dim, degree, {})

    @staticmethod
    def from_lie_vector(v):
        dim = len(v.coeffs)
        return SymTensor(dim, 1, {(i,): c for i, c in enumerate(v.coeffs) if c != 0})


def sym_space_dim(dim, degree):
    """dim Sym^k(g) = C(dim + k - 1, k)."""
    return comb(dim + degree - 1, degree)


def sym_basis(dim, degree):
    """Sorted multi-indices enumerating the degree-k monomial basis."""
    return list(itertools.combinations_with_replacement(range(dim), degree))


def sym_product(X, Y):
    """Symmetric product: merge and re-sort multi-indices, bilinear."""
    if X.dim != Y.dim:
        raise DimensionMismatch("factors over different algebras")
    terms = {}
    for ix, cx in X.terms.items():
        for iy, cy in Y.terms.items():
            idx = tuple(sorted(ix + iy))
            terms[idx] = terms.get(idx, 0) + cx * cy
    return SymTensor(X.dim, X.degree + Y.degree, terms)


def _replace_slot(indices, j, new_index):
    out = list(indices)
    out[j] = new_index
    return tuple(sorted(out))


def spencer_delta_structural(g, X):
    """Degree-raising differential
    delta(X_1 ⊙ ... ⊙ X_k) = sum_i sum_j e_i ⊙ X_1 ⊙ ... ⊙ [e_i, X_j] ⊙ ... ⊙ X_k
    expanded over the monomial basis."""
    if X.dim != g.dim:
        raise DimensionMismatch("tensor does not conform to the algebra")
    terms = {}
    for idx, coeff in X.terms.items():
        for i in range(g.dim):
            for j in range(len(idx)):
                for c in range(g.dim):
                    Cv = g.C(i, idx[j], c)
                    if Cv == 0:
                        continue
                    new_idx = tuple(sorted(_replace_slot(idx, j, c) + (i,)))
                    terms[new_idx] = terms.get(new_idx, 0) + coeff * Cv
    return SymTensor(g.dim, X.degree + 1, terms)


def spencer_delta_curvature(g, omega_comp, X):
    """Degree-preserving curvature-twisted differential
    delta_Omega(X) = sum_i ad_Omega(X_i) ⊙ (product of the other slots);
    the scalar 2-form factor is carried externally."""
    if X.dim != g.dim:
        raise DimensionMismatch("tensor does not conform to the algebra")
    terms = {}
    for idx, coeff in X.terms.items():
        for j in range(len(idx)):
            for b, ob in enumerate(omega_comp.coeffs):
                if ob == 0:
                    continue
                for c in range(g.dim):
                    Cv = g.C(b, idx[j], c)
                    if Cv == 0:
                        continue
                    new_idx = _replace_slot(idx, j, c)
                    terms[new_idx] = terms.get(new_idx, 0) + coeff * ob * Cv
    return SymTensor(g.dim, X.degree, terms)


def nilpotency_report(g, max_degree):
    """Map degree -> exact max-norm of delta(delta(.)) over the monomial basis,
    for the structural differential."""
    if max_degree < 1:
        raise ValueError("max_degree must be >= 1")
    report = {}
    for k in range(1, max_degree + 1):
        worst = Fraction(0)
        for idx in sym_basis(g.dim, k):
            m = SymTensor.monomial(g.dim, idx)
            dd = spencer_delta_structural(g, spencer_delta_structural(g, m))
            worst = max(worst, dd.max_norm())
        report[k] = worst
    return report


# --- Chevalley-Eilenberg cohomology with coefficients in Sym^p(g) ---


def _module_action(g, a, p):
    """Matrix of the derivation extension of ad_{e_a} on Sym^p(g)."""
    basis = sym_basis(g.dim, p)
    index = {idx: i for i, idx in enumerate(basis)}
    D = len(basis)
    M = [[Fraction(0)] * D for _ in range(D)]
    for col, idx in enumerate(basis):
        for j in range(p):
            for c in range(g.dim):
                Cv = g.C(a, idx[j], c)
                if Cv != 0:
                    M[index[_replace_slot(idx, j, c)]][col] += Cv
    return M


def _ce_differential(g, p, q):
    """Matrix of d: Lambda^q g* (x) Sym^p g -> Lambda^{q+1} g* (x) Sym^p g."""
    n = g.dim
    mod_basis = sym_basis(n, p)
    D = len(mod_basis)
    rho = [_module_action(g, a, p) for a in range(n)]
    cols_basis = list(itertools.combinations(range(n), q))
    rows_basis = list(itertools.combinations(range(n), q + 1))
    row_index = {S: i for i, S in enumerate(rows_basis)}
    mat = [[Fraction(0)] * (len(cols_basis) * D) for _ in range(len(rows_basis) * D)]

    for ci, S in enumerate(cols_basis):
        for m, _idx in enumerate(mod_basis):
            col = ci * D + m
            for T in rows_basis:
                # term 1: sum_i (-1)^i rho(e_{T_i}) applied when T minus T_i == S
                for i, ti in enumerate(T):
                    rest = T[:i] + T[i + 1:]
                    if rest != S:
                        continue
                    r0 = row_index[T] * D
                    for mm in range(D):
                        cm = rho[ti][mm][m]
                        if cm != 0:
                            mat[r0 + mm][col] += (-1) ** i * cm
                # term 2: sum_{i<j} (-1)^{i+j} phi([e_{T_i}, e_{T_j}], rest)
                for i in range(q + 1):
                    for j in range(i + 1, q + 1):
                        rest = tuple(x for k, x in enumerate(T) if k not in (i, j))
                        for c in range(n):
                            Cv = g.C(T[i], T[j], c)
                            if Cv == 0 or c in rest:
                                continue
                            combined = (c,) + rest
                            if tuple(sorted(combined)) != S:
                                continue
                            sign = _sort_sign(combined)
                            r0 = row_index[T] * D
                            mat[r0 + m][col] += (-1) ** (i + j) * Cv * sign
    return mat


def _sort_sign(seq):
    """Sign of the permutation sorting a tuple of distinct integers."""
    sign = 1
    items = list(seq)
    for i in range(len(items)):
        for j in range(i + 1, len(items)):
            if items[i] > items[j]:
                sign = -sign
    return sign


def ce_cohomology_dim(g, p, q):
    """dim H^q(g, Sym^p g) via exact ranks of the CE differentials."""
    if p < 0 or q < 0:
        raise ValueError("degrees must be non-negative")
    if q > g.dim:
        return 0
    dim_cq = comb(g.dim, q) * sym_space_dim(g.dim, p)
    rank_dq = _exact.rank(_ce_differential(g, p, q)) if q < g.dim else 0
    rank_dqm1 = _exact.rank(_ce_differential(g, p, q - 1)) if q >= 1 else 0
    return dim_cq - rank_dq - rank_dqm1


def invariant_subspace_dim(g, p):
    """dim (Sym^p g)^g via the stacked module-action nullspace (independent of
    the CE differential path)."""
    D = sym_space_dim(g.dim, p)
    rows = []
    for a in range(g.dim):
        rows.extend(_module_action(g, a, p))
    return len(_exact.nullspace(rows, n_cols=D))


# --- Betti-number decomposition ---


@dataclass(frozen=True)
class BettiFactorTable:
    """Per-bidegree factor dims f[p][q] used in the decomposition convolution."""

    entries: dict  # {(p, q): non-negative int}

    def __post_init__(self):
        for (p, q), v in self.entries.items():
            if p < 0 or q < 0 or v < 0:
                raise ValueError("factor table entries must be non-negative")

    def factor(self, p, q=0):
        return self.entries.get((p, q), 0)

    def max_p(self):
        return max((p for p, _ in self.entries), default=0)


def sym_dimension_factor(g, max_p=8):
    """f[p] = dim Sym^p(g); reproduces the reference Betti table exactly."""
    return BettiFactorTable({(p, 0): sym_space_dim(g.dim, p) for p in range(max_p + 1)})


def whitehead_factor(g, max_p=4):
    """f[p] from the CE invariant dimensions (H^{q>=1} vanishes for semisimple
    algebras, so only q=0 contributes to the convolution)."""
    return BettiFactorTable(
        {(p, 0): ce_cohomology_dim(g, p, 0) for p in range(max_p + 1)}
    )


def spencer_betti(base_betti, factor):
    """beta_k = sum_{p+q=k} base_betti[q] * f[p], truncated to len(base_betti)."""
    if not base_betti:
        raise ValueError("base Betti numbers must be non-empty")
    out = []
    for k in range(len(base_betti)):
        out.append(
            sum(base_betti[q] * factor.factor(k - q) for q in range(k + 1))
        )
    return out
