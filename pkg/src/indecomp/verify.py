"""Endomorphism rings, Hom spaces and indecomposability verdicts."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .field_linalg import (GF2, FieldSpec, Matrix, inverse_array, mul_arrays, nullspace_array,
                           rank_array, rref_array)
from .grid_module import GridModule

__all__ = [
    "EndoSolution",
    "Indecomposable",
    "Decomposable",
    "Unknown",
    "end_dim",
    "hom_space",
    "is_natural",
    "indecomposability",
    "fitting_idempotent",
    "cross_module_random",
    "cross_property_check",
    "CROSS_POINTS",
]


def _zeros(r, c, field):
    return Matrix.zeros(r, c, field).array.copy()


def _eye(n, field):
    return Matrix.identity(n, field).array.copy()


def _kron(a: np.ndarray, b: np.ndarray, field: FieldSpec) -> np.ndarray:
    out = np.kron(a, b)
    if not field.is_rational:
        out %= field.characteristic
    return out


@dataclass
class EndoSolution:
    """Basis of End(M) as per-vertex matrix families."""

    dimension: int
    basis: list
    field: FieldSpec

    def combination(self, coeffs: Sequence) -> dict:
        out = {}
        for c, fam in zip(coeffs, self.basis):
            c = self.field.scalar(c)
            if c == 0:
                continue
            for x, a in fam.items():
                term = a * c
                out[x] = term if x not in out else out[x] + term
        if not self.field.is_rational:
            out = {x: a % self.field.characteristic for x, a in out.items()}
        return out


def is_natural(m: GridModule, fam: dict, target: GridModule | None = None) -> bool:
    """Whether ``fam`` commutes with every unit arrow (from ``m`` to ``target``)."""
    t = m if target is None else target
    f = m.field
    pts = m.support() | t.support()
    for x in pts:
        for k in range(m.dim):
            y = tuple(v + (1 if i == k else 0) for i, v in enumerate(x))
            if y not in pts:
                continue
            px = fam.get(x, _zeros(t.fiber(x), m.fiber(x), f))
            py = fam.get(y, _zeros(t.fiber(y), m.fiber(y), f))
            lhs = mul_arrays(py, m.arrow(x, k).array, f)
            rhs = mul_arrays(t.arrow(x, k).array, px, f)
            if not np.array_equal(lhs, rhs):
                return False
    return True


class _Reducer:
    """Accumulates linear constraints, keeping them row-reduced."""

    def __init__(self, ncols: int, field: FieldSpec):
        self.n = ncols
        self.field = field
        self.rows = _zeros(0, ncols, field)
        self.pending: list[np.ndarray] = []
        self.pending_rows = 0

    def add(self, block: np.ndarray):
        if block.shape[0] == 0:
            return
        self.pending.append(block)
        self.pending_rows += block.shape[0]
        if self.pending_rows > 4 * max(self.n, 8):
            self.flush()

    def flush(self):
        if not self.pending:
            return
        stacked = np.concatenate([self.rows] + self.pending, axis=0)
        r, piv = rref_array(stacked, self.field)
        self.rows = r[:len(piv)]
        self.pending = []
        self.pending_rows = 0

    def nullspace(self) -> np.ndarray:
        self.flush()
        return nullspace_array(self.rows, self.field)


def end_dim(m: GridModule) -> EndoSolution:
    """Endomorphism algebra of ``m`` by a linear solve over per-vertex unknowns.

    Invertible square arrows tie their endpoints together (phi_y = A phi_x A^-1),
    so only one block of unknowns per tied component is solved for; every
    remaining arrow contributes its commutativity constraint.
    """
    field = m.field
    pts = sorted(m.fibers)
    if not pts:
        return EndoSolution(0, [], field)

    adj: dict = {x: [] for x in pts}
    inv_cache: dict = {}
    for (x, k), a in m.arrows.items():
        y = tuple(v + (1 if i == k else 0) for i, v in enumerate(x))
        if a.rows == a.cols and rank_array(a.array, field) == a.rows:
            inv_cache[(x, k)] = inverse_array(a.array, field)
            adj[x].append((y, (x, k), False))
            adj[y].append((x, (x, k), True))

    root: dict = {}
    T: dict = {}
    Tinv: dict = {}
    tree: set = set()
    for s in pts:
        if s in root:
            continue
        root[s] = s
        T[s] = _eye(m.fibers[s], field)
        Tinv[s] = T[s]
        stack_ = [s]
        while stack_:
            u = stack_.pop()
            for w, key, backwards in adj[u]:
                if w in root:
                    continue
                a = m.arrows[key].array
                ai = inv_cache[key]
                if backwards:  # arrow w -> u, so phi_w = A^-1 phi_u A
                    T[w] = mul_arrays(ai, T[u], field)
                    Tinv[w] = mul_arrays(Tinv[u], a, field)
                else:
                    T[w] = mul_arrays(a, T[u], field)
                    Tinv[w] = mul_arrays(Tinv[u], ai, field)
                root[w] = root[u]
                tree.add(key)
                stack_.append(w)

    roots = sorted({root[x] for x in pts})
    offset = {}
    n = 0
    for r in roots:
        offset[r] = n
        n += m.fibers[r] ** 2

    red = _Reducer(n, field)
    for (x, k), a in sorted(m.arrows.items()):
        if (x, k) in tree:
            continue
        y = tuple(v + (1 if i == k else 0) for i, v in enumerate(x))
        A = a.array
        fy, fx = A.shape
        block = _zeros(fy * fx, n, field)
        # phi_y A = T_y Phi_ry (T_y^-1 A) ;  A phi_x = (A T_x) Phi_rx T_x^-1
        ry, rx = root[y], root[x]
        P1, Q1 = T[y], mul_arrays(Tinv[y], A, field)
        P2, Q2 = mul_arrays(A, T[x], field), Tinv[x]
        k1 = _kron(P1, Q1.T, field)
        k2 = _kron(P2, Q2.T, field)
        block[:, offset[ry]:offset[ry] + m.fibers[ry] ** 2] += k1
        block[:, offset[rx]:offset[rx] + m.fibers[rx] ** 2] -= k2
        if not field.is_rational:
            block %= field.characteristic
        red.add(block)
    ns = red.nullspace()
    if ns.shape[1]:
        basis_rows, _ = rref_array(ns.T.copy(), field)
    else:
        basis_rows = ns.T
    basis = []
    for v in basis_rows:
        fam = {}
        for x in pts:
            r = root[x]
            f = m.fibers[r]
            Phi = v[offset[r]:offset[r] + f * f].reshape(f, f)
            fam[x] = mul_arrays(mul_arrays(T[x], Phi, field), Tinv[x], field)
        basis.append(fam)
    return EndoSolution(len(basis), basis, field)


def hom_space(src: GridModule, tgt: GridModule) -> EndoSolution:
    """Basis of Hom(src, tgt) by the direct linear system (no tying shortcut).

    Unknowns are ``phi_x`` for x in both supports; at points in only one
    support the map is zero, which still constrains neighbouring squares.
    """
    if src.dim != tgt.dim or src.field != tgt.field:
        raise ValueError("modules differ in dimension or field")
    field = src.field
    common = sorted(src.support() & tgt.support())
    offset = {}
    n = 0
    for x in common:
        offset[x] = n
        n += tgt.fiber(x) * src.fiber(x)
    red = _Reducer(n, field)
    pts = src.support() | tgt.support()
    for x in sorted(pts):
        for k in range(src.dim):
            y = tuple(v + (1 if i == k else 0) for i, v in enumerate(x))
            if y not in pts:
                continue
            # phi_y S(x->y) - T(x->y) phi_x = 0, shape tgt(y) x src(x)
            S = src.arrow(x, k).array
            Tm = tgt.arrow(x, k).array
            rows = tgt.fiber(y) * src.fiber(x)
            if rows == 0:
                continue
            block = _zeros(rows, n, field)
            touched = False
            if y in offset:
                block[:, offset[y]:offset[y] + tgt.fiber(y) * src.fiber(y)] += _kron(
                    _eye(tgt.fiber(y), field), S.T, field)
                touched = True
            if x in offset:
                block[:, offset[x]:offset[x] + tgt.fiber(x) * src.fiber(x)] -= _kron(
                    Tm, _eye(src.fiber(x), field), field)
                touched = True
            if touched:
                if not field.is_rational:
                    block %= field.characteristic
                red.add(block)
    ns = red.nullspace()
    basis_rows = rref_array(ns.T.copy(), field)[0] if ns.shape[1] else ns.T
    basis = []
    for v in basis_rows:
        fam = {x: v[offset[x]:offset[x] + tgt.fiber(x) * src.fiber(x)].reshape(tgt.fiber(x), src.fiber(x))
               for x in common}
        basis.append(fam)
    return EndoSolution(len(basis), basis, field)


# -- verdicts -----------------------------------------------------------------


@dataclass(frozen=True)
class Indecomposable:
    end_dim: int = 1

    name = "indecomposable"


@dataclass(frozen=True)
class Decomposable:
    witness: dict
    end_dim: int

    name = "decomposable"


@dataclass(frozen=True)
class Unknown:
    reason: str
    end_dim: int

    name = "unknown"


def _power(a: np.ndarray, e: int, field: FieldSpec) -> np.ndarray:
    out = _eye(a.shape[0], field)
    for _ in range(e):
        out = mul_arrays(out, a, field)
    return out


def fitting_idempotent(m: GridModule, phi: dict) -> dict | None:
    """Projection onto im(phi^N) along ker(phi^N), if it is neither 0 nor the identity.

    For an endomorphism these are complementary submodules once N reaches the
    largest fiber dimension, so the projection is itself an endomorphism.
    """
    field = m.field
    N = max(m.fibers.values())
    proj = {}
    nonzero = False
    not_id = False
    for x, f in m.fibers.items():
        P = _power(phi[x], N, field)
        r = rank_array(P, field)
        if r == 0:
            proj[x] = _zeros(f, f, field)
            not_id = True
            continue
        if r == f:
            proj[x] = _eye(f, field)
            nonzero = True
            continue
        nonzero = not_id = True
        red, piv = rref_array(P.T.copy(), field)
        img = red[:len(piv)].T                       # columns span im P
        ker = nullspace_array(P, field)               # columns span ker P
        B = np.concatenate([img, ker], axis=1)
        D = _zeros(f, f, field)
        for i in range(r):
            D[i, i] = field.one()
        proj[x] = mul_arrays(mul_arrays(B, D, field), inverse_array(B, field), field)
    if nonzero and not_id:
        return proj
    return None


def _is_idempotent(m: GridModule, e: dict) -> bool:
    f = m.field
    nonzero = any(a.any() for a in e.values()) if f.is_rational is False else any(
        any(v != 0 for v in a.reshape(-1)) for a in e.values())
    ident = all(np.array_equal(a, _eye(a.shape[0], f)) for a in e.values())
    square = all(np.array_equal(mul_arrays(a, a, f), a) for a in e.values())
    return nonzero and not ident and square and is_natural(m, e)


def indecomposability(m: GridModule, seed: int = 0, random_tries: int = 200,
                      exhaustive_bound: int = 1 << 20):
    """Indecomposable if dim End = 1; otherwise search End for a Fitting witness.

    Candidates are basis elements, pairwise sums, seeded random combinations
    and finally (when |K|^dim is small enough) every element.  A module whose
    every endomorphism is nilpotent or invertible has a local End and is
    reported Indecomposable.
    """
    if m.is_zero():
        return Unknown("zero module", 0)
    sol = end_dim(m)
    d = sol.dimension
    if d == 1:
        return Indecomposable(1)
    field = m.field

    def attempt(coeffs):
        phi = sol.combination(coeffs)
        e = fitting_idempotent(m, phi)
        if e is not None and _is_idempotent(m, e):
            return Decomposable(e, d)
        return None

    for i in range(d):
        v = [0] * d
        v[i] = 1
        if (res := attempt(v)):
            return res
    for i in range(d):
        for j in range(i + 1, d):
            v = [0] * d
            v[i] = v[j] = 1
            if (res := attempt(v)):
                return res
    rng = random.Random(seed)
    span = field.characteristic if not field.is_rational else 7
    for _ in range(random_tries):
        v = [rng.randrange(span) for _ in range(d)]
        if (res := attempt(v)):
            return res
    if not field.is_rational and field.characteristic ** d <= exhaustive_bound:
        p = field.characteristic
        for code in range(p ** d):
            v = []
            c = code
            for _ in range(d):
                v.append(c % p)
                c //= p
            if (res := attempt(v[::-1])):
                return res
        return Indecomposable(d)
    return Unknown(f"no idempotent found; End has dimension {d} and exhaustive search is out of range", d)


# -- cross modules --------------------------------------------------------------

CROSS_POINTS = {
    "a": (1, 0),
    "b": (0, 1),
    "e": (1, 1),
    "c": (2, 1),
    "d": (1, 2),
}


def _random_matrix(rng, r, c, p):
    return np.array([[rng.randrange(p) for _ in range(c)] for _ in range(r)], dtype=np.int64).reshape(r, c)


def _kernel_combo(rng, ker: np.ndarray, rows: int, cols: int, p: int) -> np.ndarray:
    """``rows x cols`` matrix whose columns are random combinations of ``ker``'s columns."""
    if ker.shape[1] == 0 or cols == 0:
        return np.zeros((rows, cols), dtype=np.int64)
    coef = _random_matrix(rng, ker.shape[1], cols, p)
    return (ker @ coef) % p


def cross_module_random(seed: int, max_fiber_dim: int = 3, field: FieldSpec = GF2) -> GridModule:
    """Random module on the five-vertex cross with both through-composites zero.

    The corners (2,0) and (0,2) are outside the support, so commutativity
    forces ``a -> e -> c`` and ``b -> e -> d`` to vanish; the generator
    samples the incoming maps inside the kernels of the outgoing ones.
    """
    if field.is_rational:
        raise ValueError("cross modules are sampled over prime fields")
    p = field.characteristic
    rng = random.Random(seed)
    dims = {k: rng.randint(0, max_fiber_dim) for k in CROSS_POINTS}
    fa, fb, fe, fc, fd = (dims[k] for k in "abecd")
    delta = _random_matrix(rng, fc, fe, p)   # e -> c
    beta = _random_matrix(rng, fd, fe, p)    # e -> d
    gamma = _kernel_combo(rng, nullspace_array(delta, field), fe, fa, p)   # a -> e
    alpha = _kernel_combo(rng, nullspace_array(beta, field), fe, fb, p)    # b -> e
    P = CROSS_POINTS
    fibers = {P[k]: dims[k] for k in P}
    arrows = {
        (P["a"], 1): Matrix(gamma, field, shape=(fe, fa)),
        (P["b"], 0): Matrix(alpha, field, shape=(fe, fb)),
        (P["e"], 0): Matrix(delta, field, shape=(fc, fe)),
        (P["e"], 1): Matrix(beta, field, shape=(fd, fe)),
    }
    m = GridModule(2, fibers, {k: v for k, v in arrows.items()
                               if v.rows and v.cols}, field)
    return m.validate()


def cross_property_check(t: GridModule) -> bool:
    """True unless t has nonzero fibers at both a and c and is not decomposable."""
    if t.fiber(CROSS_POINTS["a"]) == 0 or t.fiber(CROSS_POINTS["c"]) == 0:
        return True
    return isinstance(indecomposability(t), Decomposable)
