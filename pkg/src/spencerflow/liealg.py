"""Exact-arithmetic Lie algebra engine.

Structure constants follow the single convention [e_a, e_b] = sum_c C^c_{ab} e_c,
stored as C[a][b][c]. Antisymmetry in (a, b) is enforced at construction; the
Jacobi identity is *not* assumed, it is checkable via jacobi_residual.
"""

import json
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources

from . import _exact

PRESET_NAMES = ("su2", "so3", "sl2")


class DimensionMismatch(ValueError):
    pass


def _as_fraction(x):
    if isinstance(x, float):
        return Fraction(x).limit_denominator(10**12)
    return Fraction(x)


@dataclass(frozen=True)
class LieAlgebraSpec:
    """Dimension, basis labels and exact structure constants of a Lie algebra."""

    dim: int
    basis_labels: tuple
    structure_constants: tuple  # C[a][b][c] as nested tuples of Fraction

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dimension must be positive")
        if len(self.basis_labels) != self.dim:
            raise ValueError("need one label per basis element")
        C = self.structure_constants
        if len(C) != self.dim or any(
            len(Ca) != self.dim or any(len(Cab) != self.dim for Cab in Ca) for Ca in C
        ):
            raise ValueError("structure constants must be dim x dim x dim")
        for a in range(self.dim):
            for b in range(self.dim):
                for c in range(self.dim):
                    if C[a][b][c] != -C[b][a][c]:
                        raise ValueError(
                            "structure constants violate antisymmetry at "
                            f"({a},{b},{c})"
                        )

    def C(self, a, b, c):
        """C^c_{ab}, the e_c coefficient of [e_a, e_b]."""
        return self.structure_constants[a][b][c]


def _freeze_constants(dim, entries):
    """Build the C[a][b][c] tuple from a dense nested list or sparse entries."""
    C = [[[Fraction(0)] * dim for _ in range(dim)] for _ in range(dim)]
    for a, b, c, val in entries:
        C[a][b][c] = val
        C[b][a][c] = -val
    return tuple(tuple(tuple(row) for row in plane) for plane in C)


def make_algebra(dim, labels, sparse_entries):
    """Algebra from sparse entries [(a, b, c, value)] with a != b; the (b, a)
    mirror is filled automatically."""
    for a, b, _, _ in sparse_entries:
        if a == b:
            raise ValueError("diagonal entries [e_a, e_a] are identically zero")
    entries = [(a, b, c, _as_fraction(v)) for a, b, c, v in sparse_entries]
    return LieAlgebraSpec(dim, tuple(labels), _freeze_constants(dim, entries))


def from_json(doc):
    """Load a custom algebra from a parsed JSON document (or a JSON string):
    {dim, labels, constants: [[a, b, c, numerator, denominator], ...]}."""
    if isinstance(doc, str):
        doc = json.loads(doc)
    allowed = {"dim", "labels", "constants"}
    unknown = set(doc) - allowed
    if unknown:
        raise ValueError(f"unknown keys in algebra document: {sorted(unknown)}")
    dim = doc["dim"]
    entries = [(a, b, c, Fraction(num, den)) for a, b, c, num, den in doc["constants"]]
    return make_algebra(dim, doc["labels"], entries)


def preset(name):
    """Algebra preset by name: su2, so3, sl2, or abelian<N> (e.g. abelian2)."""
    if name.startswith("abelian"):
        n = int(name[len("abelian"):])
        return make_algebra(n, [f"a{i+1}" for i in range(n)], [])
    if name not in PRESET_NAMES:
        raise KeyError(f"unknown algebra preset: {name!r}")
    text = resources.files("spencerflow.presets").joinpath(f"{name}.json").read_text()
    return from_json(text)


@dataclass(frozen=True)
class LieVector:
    """Element of the algebra in basis coordinates."""

    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(self.coeffs))

    def __add__(self, other):
        return LieVector(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other):
        return LieVector(tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __rmul__(self, scalar):
        return LieVector(tuple(scalar * a for a in self.coeffs))


@dataclass(frozen=True)
class DualVector:
    """Element of the dual space; houses the distribution function."""

    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(self.coeffs))

    def __add__(self, other):
        return DualVector(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other):
        return DualVector(tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __rmul__(self, scalar):
        return DualVector(tuple(scalar * a for a in self.coeffs))


def basis_vector(g, a, scale=1):
    coeffs = [Fraction(0)] * g.dim
    coeffs[a] = _as_fraction(scale)
    return LieVector(tuple(coeffs))


def pairing(lam, X):
    """Natural pairing <lambda, X>."""
    return sum(l * x for l, x in zip(lam.coeffs, X.coeffs))


def _check_conforms(g, v):
    if len(v.coeffs) != g.dim:
        raise DimensionMismatch(
            f"vector of length {len(v.coeffs)} does not conform to dim {g.dim}"
        )


def bracket(g, X, Y):
    """[X, Y] = sum C^c_{ab} X^a Y^b e_c."""
    _check_conforms(g, X)
    _check_conforms(g, Y)
    out = [X.coeffs[0] * 0] * g.dim
    for a in range(g.dim):
        xa = X.coeffs[a]
        if xa == 0:
            continue
        for b in range(g.dim):
            yb = Y.coeffs[b]
            if yb == 0:
                continue
            for c in range(g.dim):
                Cv = g.C(a, b, c)
                if Cv != 0:
                    out[c] += Cv * xa * yb
    return LieVector(tuple(out))


def jacobi_residual(g):
    """Max-norm over basis triples of [e_a,[e_b,e_c]] + cyclic, exact."""
    worst = Fraction(0)
    basis = [basis_vector(g, i) for i in range(g.dim)]
    for a in range(g.dim):
        for b in range(g.dim):
            for c in range(g.dim):
                total = (
                    bracket(g, basis[a], bracket(g, basis[b], basis[c]))
                    + bracket(g, basis[b], bracket(g, basis[c], basis[a]))
                    + bracket(g, basis[c], bracket(g, basis[a], basis[b]))
                )
                worst = max(worst, max(abs(x) for x in total.coeffs))
    return worst


def ad_matrix(g, X):
    """Matrix of ad_X = [X, .]: column a is the coordinates of [X, e_a]."""
    _check_conforms(g, X)
    cols = [bracket(g, X, basis_vector(g, a)).coeffs for a in range(g.dim)]
    return [[cols[a][c] for a in range(g.dim)] for c in range(g.dim)]


def coad_matrix(g, X):
    """Matrix of ad*_X on coordinates of g*, i.e. -transpose(ad_matrix(X))."""
    ad = ad_matrix(g, X)
    return [[-ad[c][a] for c in range(g.dim)] for a in range(g.dim)]


def coad_apply(g, X, lam):
    """ad*_X lambda as a DualVector."""
    M = coad_matrix(g, X)
    return DualVector(
        tuple(sum(M[a][c] * lam.coeffs[c] for c in range(g.dim)) for a in range(g.dim))
    )


def killing_form(g):
    """B_{ab} = trace(ad_{e_a} ad_{e_b})."""
    ads = [ad_matrix(g, basis_vector(g, a)) for a in range(g.dim)]
    B = [[Fraction(0)] * g.dim for _ in range(g.dim)]
    for a in range(g.dim):
        for b in range(g.dim):
            B[a][b] = sum(
                ads[a][i][j] * ads[b][j][i] for i in range(g.dim) for j in range(g.dim)
            )
    return B


def is_semisimple(g):
    """Cartan's criterion: the Killing form is non-degenerate."""
    return _exact.rank(killing_form(g)) == g.dim


def center_basis(g):
    """Exact basis of the center {X : [X, e_b] = 0 for all b}."""
    rows = []
    for b in range(g.dim):
        for c in range(g.dim):
            rows.append([g.C(a, b, c) for a in range(g.dim)])
    return [LieVector(tuple(v)) for v in _exact.nullspace(rows, n_cols=g.dim)]


def stabilizer_subalgebra(g, lam):
    """Exact basis of {X : ad*_X lambda = 0}."""
    _check_conforms(g, lam)
    lam_exact = [_as_fraction(x) for x in lam.coeffs]
    # row (a): coefficient of X^b in (ad*_X lam)_a = -C^c_{ba} X^b lam_c
    rows = []
    for a in range(g.dim):
        rows.append(
            [
                -sum(g.C(b, a, c) * lam_exact[c] for c in range(g.dim))
                for b in range(g.dim)
            ]
        )
    return [LieVector(tuple(v)) for v in _exact.nullspace(rows, n_cols=g.dim)]


def coad_curvature_action(g, omega_comp, lam):
    """Lie-algebraic coefficient of ad*_Omega lambda with components
    C^c_{ab} Omega^b lam_c; the scalar 2-form factor is carried externally."""
    _check_conforms(g, omega_comp)
    _check_conforms(g, lam)
    out = []
    for a in range(g.dim):
        out.append(
            sum(
                g.C(a, b, c) * omega_comp.coeffs[b] * lam.coeffs[c]
                for b in range(g.dim)
                for c in range(g.dim)
            )
        )
    return DualVector(tuple(out))


def integrability_check(g, omega_comp, lam):
    """True when ad*_Omega lambda vanishes identically."""
    return all(x == 0 for x in coad_curvature_action(g, omega_comp, lam).coeffs)
