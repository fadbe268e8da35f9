"""Descriptors of weakly H-special varieties in H^n, sampling of their points,
membership residuals for V_N' and the push-forward to (j, chi*)-coordinates."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import mpmath
import numpy as np

from .errors import ParseError
from .hecke import IDENTITY, GL2Matrix, enumerate_DN, random_sl2
from .modpoly import DEFAULT_STORE, PolynomialStore, TriPolynomial
from .numeval import DEFAULT_PREC, DEFAULT_SEED, GUARD_BITS, hold_tol, sample_box_point, value


@dataclass
class SpecialDescriptor:
    """Coordinates are 1-based.  ``blocks`` lists S_1..S_k (S_0 is the set of
    constant coordinates); ``relations[(i, s)]`` is g with tau_s = g tau_{min S_i}."""

    n: int
    constants: dict = field(default_factory=dict)  # s -> (Fraction re, Fraction im)
    blocks: list = field(default_factory=list)  # list of sorted lists
    relations: dict = field(default_factory=dict)  # (block index, s) -> GL2Matrix

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("dimension must be positive")
        seen = set(self.constants)
        for s, (_, im) in self.constants.items():
            if not 1 <= s <= self.n:
                raise ValueError(f"constant index {s} out of range")
            if im <= 0:
                raise ValueError(f"constant at coordinate {s} is not in the upper half-plane")
        for block in self.blocks:
            if not block:
                raise ValueError("empty block")
            for s in block:
                if not 1 <= s <= self.n or s in seen:
                    raise ValueError(f"coordinate {s} is out of range or in two blocks")
                seen.add(s)
        for s in range(1, self.n + 1):
            if s not in seen:
                self.blocks.append([s])
        self.blocks = sorted(sorted(b) for b in self.blocks)
        for i, block in enumerate(self.blocks, start=1):
            for s in block[1:]:
                if (i, s) not in self.relations:
                    raise ValueError(f"coordinate {s} of block {i} has no relation")
        for (i, s), g in list(self.relations.items()):
            if not 1 <= i <= len(self.blocks) or s not in self.blocks[i - 1][1:]:
                raise ValueError(f"relation ({i}, {s}) does not match the partition")
            self.relations[(i, s)] = g.primitive_part()

    @property
    def partition(self) -> list:
        return [sorted(self.constants)] + [list(b) for b in self.blocks]

    def free_coordinates(self) -> list:
        return [b[0] for b in self.blocks]


def is_gut(desc: SpecialDescriptor) -> bool:
    return all(g.c == 0 for g in desc.relations.values())


def parse_descriptor(text: str) -> SpecialDescriptor:
    """Text format, one item per line (``#`` starts a comment):

        n <dim>
        const <index> <re> <im>
        rel <block> <index> a b c d
        block <block> <index> <index> ...   (optional)

    Without a ``block`` line the base of a block is the smallest coordinate
    that is neither constant nor a relation target and lies below every
    target of the block.
    """
    n = None
    constants, rels, declared = {}, {}, {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "n" and len(parts) == 2:
                n = int(parts[1])
            elif parts[0] == "const" and len(parts) == 4:
                constants[int(parts[1])] = (Fraction(parts[2]), Fraction(parts[3]))
            elif parts[0] == "rel" and len(parts) == 7:
                i, s = int(parts[1]), int(parts[2])
                rels[(i, s)] = GL2Matrix(*(int(x) for x in parts[3:]))
            elif parts[0] == "block" and len(parts) >= 3:
                declared[int(parts[1])] = sorted(int(x) for x in parts[2:])
            else:
                raise ValueError(f"unrecognized line {line!r}")
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(str(exc), lineno) from None
    if n is None:
        raise ParseError("missing 'n <dim>' line")
    return _assemble(n, constants, rels, declared)


def descriptor_from_json(data: dict) -> SpecialDescriptor:
    constants = {int(k): (Fraction(str(v[0])), Fraction(str(v[1]))) for k, v in data.get("constants", {}).items()}
    rels = {(int(r[0]), int(r[1])): GL2Matrix(*(int(x) for x in r[2:6])) for r in data.get("relations", [])}
    declared = {int(k): sorted(int(x) for x in v) for k, v in data.get("blocks", {}).items()}
    return _assemble(int(data["n"]), constants, rels, declared)


def _assemble(n, constants, rels, declared) -> SpecialDescriptor:
    targets: dict = {}
    for (i, s) in rels:
        targets.setdefault(i, []).append(s)
    used = set(constants) | {s for (_, s) in rels}
    for b in declared.values():
        used |= set(b)
    blocks = {i: list(b) for i, b in declared.items()}
    for i in sorted(targets):
        if i in blocks:
            continue
        low = min(targets[i])
        bases = [s for s in range(1, low) if s not in used]
        if not bases:
            raise ParseError(f"block {i} has no free coordinate below {low} to act as its base")
        blocks[i] = sorted([bases[0]] + targets[i])
        used.add(bases[0])
    order = sorted(blocks)
    ordered = [blocks[i] for i in order]
    taken = set(constants).union(*ordered) if ordered else set(constants)
    singles = [[s] for s in range(1, n + 1) if s not in taken]
    order += [None] * len(singles)
    ordered += singles
    # renumber blocks in the order of their minima, as the descriptor stores them
    by_min = sorted(range(len(ordered)), key=lambda k: ordered[k][0])
    renumber = {order[k]: pos + 1 for pos, k in enumerate(by_min) if order[k] is not None}
    relations = {(renumber[i], s): g for (i, s), g in rels.items()}
    try:
        return SpecialDescriptor(n, constants, [ordered[k] for k in by_min], relations)
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def load_descriptor(path) -> SpecialDescriptor:
    path = Path(path)
    text = path.read_text()
    if path.suffix == ".json":
        return descriptor_from_json(json.loads(text))
    return parse_descriptor(text)


def format_descriptor(desc: SpecialDescriptor) -> str:
    lines = [f"n {desc.n}"]
    for s, (re_part, im_part) in sorted(desc.constants.items()):
        lines.append(f"const {s} {re_part} {im_part}")
    for i, block in enumerate(desc.blocks, start=1):
        if len(block) > 1:
            lines.append("block " + " ".join(str(x) for x in [i] + block))
    for (i, s), g in sorted(desc.relations.items()):
        lines.append(f"rel {i} {s} {g.a} {g.b} {g.c} {g.d}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


def _rational_mpc(re_part: Fraction, im_part: Fraction):
    return mpmath.mpc(mpmath.mpf(re_part.numerator) / re_part.denominator,
                      mpmath.mpf(im_part.numerator) / im_part.denominator)


def sample_points(desc: SpecialDescriptor, count: int, seed: int = DEFAULT_SEED) -> list:
    """Points of the variety at the current mpmath precision: block minima from
    the sampling box, other block members by Moebius action, constants inserted."""
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        tau = [None] * desc.n
        for s, (re_part, im_part) in desc.constants.items():
            tau[s - 1] = _rational_mpc(re_part, im_part)
        for i, block in enumerate(desc.blocks, start=1):
            base = _rational_mpc(*sample_box_point(rng))
            tau[block[0] - 1] = base
            for s in block[1:]:
                tau[s - 1] = desc.relations[(i, s)].act(base)
        out.append(tuple(tau))
    return out


def relation_defect(desc: SpecialDescriptor, point) -> object:
    """Largest |tau_s - g tau_base| and |tau_s - constant| over the descriptor."""
    worst = mpmath.mpf(0)
    for s, (re_part, im_part) in desc.constants.items():
        worst = max(worst, abs(point[s - 1] - _rational_mpc(re_part, im_part)))
    for (i, s), g in desc.relations.items():
        base = desc.blocks[i - 1][0]
        worst = max(worst, abs(point[s - 1] - g.act(point[base - 1])))
    return worst


# ---------------------------------------------------------------------------
# V_N' membership
# ---------------------------------------------------------------------------


@dataclass
class VnResidual:
    tau: object
    g: GL2Matrix
    phi: object
    psi_first: object
    psi_second: object

    @property
    def worst(self):
        return max(self.phi, self.psi_first, self.psi_second)


def vn_coordinates(tau, g: GL2Matrix, prec: int = DEFAULT_PREC):
    """(W, X, Y, Z) = (j(tau), chi*(tau), j(g tau), chi*(g tau))."""
    with mpmath.workprec(prec + GUARD_BITS):
        gt = g.act(tau)
        return (value("j", tau, prec), value("chi_star", tau, prec),
                value("j", gt, prec), value("chi_star", gt, prec))


def vn_membership(N: int, tau, g: GL2Matrix, prec: int = DEFAULT_PREC,
                  store: PolynomialStore | None = None) -> VnResidual:
    """Normalized residuals of Phi_N(W, Y), Psi_N(X, Y, Z) and Psi_N(Z, W, X)."""
    if g.det != N or not g.is_primitive():
        raise ValueError(f"{g} is not a primitive matrix of determinant {N}")
    store = store or DEFAULT_STORE
    phi, psi = store.phi(N), store.psi(N)
    with mpmath.workprec(prec + GUARD_BITS):
        W, X, Y, Z = vn_coordinates(tau, g, prec)
        return VnResidual(tau, g, phi.normalized_residual((W, Y)),
                          psi.normalized_residual((X, Y, Z)), psi.normalized_residual((Z, W, X)))


@dataclass
class VnReport:
    N: int
    prec: int
    seed: int
    entries: list

    @property
    def max_residual(self):
        return max(e.worst for e in self.entries)

    def ok(self, tol=None) -> bool:
        return self.max_residual < (tol if tol is not None else hold_tol(self.prec))

    def lines(self, tol=None):
        tol = tol if tol is not None else hold_tol(self.prec)
        return [f"N = {self.N}", f"samples = {len(self.entries)}", f"prec = {self.prec}",
                f"seed = {self.seed}",
                f"max_phi_residual = {mpmath.nstr(max(e.phi for e in self.entries), 5)}",
                f"max_psi_first_residual = {mpmath.nstr(max(e.psi_first for e in self.entries), 5)}",
                f"max_psi_second_residual = {mpmath.nstr(max(e.psi_second for e in self.entries), 5)}",
                f"tolerance = {mpmath.nstr(tol, 5)}"]


def vn_suite(N: int, samples: int = 10, prec: int = DEFAULT_PREC, seed: int = DEFAULT_SEED,
             store: PolynomialStore | None = None) -> VnReport:
    """Residuals over ``samples`` points; matrices cycle through D_N and SL2(Z)-twists of it."""
    rng = random.Random(seed)
    reps = enumerate_DN(N)
    entries = []
    with mpmath.workprec(prec + GUARD_BITS):
        for k in range(samples):
            tau = _rational_mpc(*sample_box_point(rng))
            g = reps[k % len(reps)]
            if k % 2:
                g = random_sl2(rng, 5) * g
            entries.append(vn_membership(N, tau, g, prec, store))
    return VnReport(N, prec, seed, entries)


# ---------------------------------------------------------------------------
# Rank probe
# ---------------------------------------------------------------------------


@dataclass
class RankProbe:
    N: int
    rank: int
    singular_values: list
    distinct_per_coordinate: list

    def lines(self):
        return [f"N = {self.N}", f"affine_rank = {self.rank}",
                "singular_values = " + " ".join(f"{s:.3e}" for s in self.singular_values),
                "distinct_per_coordinate = " + " ".join(str(c) for c in self.distinct_per_coordinate)]


def _distinct(values, rtol=1e-8) -> int:
    reps: list = []
    for v in values:
        if all(abs(v - r) > rtol * max(1.0, abs(r)) for r in reps):
            reps.append(v)
    return len(reps)


def plane_rank_probe(N: int, count: int = 8, prec: int = DEFAULT_PREC, seed: int = DEFAULT_SEED,
                     g: GL2Matrix | None = None, rtol: float = 1e-9) -> RankProbe:
    """Numeric rank of the affine span of sampled points (W, X, Y, Z) of S_g."""
    if count < 8:
        raise ValueError("count must be at least 8")
    if g is None:
        g = IDENTITY if N == 1 else GL2Matrix(N, 0, 0, 1)
    rng = random.Random(seed)
    rows = []
    with mpmath.workprec(prec + GUARD_BITS):
        for _ in range(count):
            tau = _rational_mpc(*sample_box_point(rng))
            rows.append([complex(v) for v in vn_coordinates(tau, g, prec)])
    M = np.array(rows, dtype=complex)
    distinct = [_distinct(M[:, k]) for k in range(M.shape[1])]
    M = M - M.mean(axis=0)
    scale = np.abs(M).max(axis=0)
    scale[scale == 0] = 1.0
    sv = np.linalg.svd(M / scale, compute_uv=False)
    rank = int(np.sum(sv > rtol * sv[0])) if sv[0] > 0 else 0
    return RankProbe(N, rank, [float(s) for s in sv], distinct)


# ---------------------------------------------------------------------------
# Push-forward
# ---------------------------------------------------------------------------


@dataclass
class PushforwardPoint:
    source: tuple
    image: tuple  # (j(tau_1), chi*(tau_1), ..., j(tau_n), chi*(tau_n))

    @property
    def chi_part(self) -> tuple:
        return self.image[1::2]

    @property
    def j_part(self) -> tuple:
        return self.image[0::2]


def push_point(tau: tuple, prec: int = DEFAULT_PREC, fn: str = "chi_star") -> PushforwardPoint:
    image = []
    with mpmath.workprec(prec + GUARD_BITS):
        for t in tau:
            image.append(value("j", t, prec))
            image.append(value(fn, t, prec))
    return PushforwardPoint(tuple(tau), tuple(image))


def pushforward(desc: SpecialDescriptor, count: int = 10, prec: int = DEFAULT_PREC,
                seed: int = DEFAULT_SEED, fn: str = "chi_star") -> list:
    """Sample the descriptor and map through tau -> (j(tau_s), F(tau_s))_s, F = chi* by default."""
    with mpmath.workprec(prec + GUARD_BITS):
        return [push_point(t, prec, fn) for t in sample_points(desc, count, seed)]


def gut_relation_residuals(desc: SpecialDescriptor, count: int = 10, prec: int = DEFAULT_PREC,
                           seed: int = DEFAULT_SEED, fn: str = "chi",
                           store: PolynomialStore | None = None) -> list:
    """For every relation tau_s = g tau_b, |Psi_N(F(tau_s), j(tau_b), F(tau_b))| at sampled points."""
    store = store or DEFAULT_STORE
    out = []
    with mpmath.workprec(prec + GUARD_BITS):
        for pt in pushforward(desc, count, prec, seed, fn):
            for (i, s), g in desc.relations.items():
                if g.det == 1 and fn == "chi_star":
                    continue
                b = desc.blocks[i - 1][0]
                psi: TriPolynomial = store.psi(g.det)
                X = pt.image[2 * (s - 1) + 1]
                Y, Z = pt.image[2 * (b - 1)], pt.image[2 * (b - 1) + 1]
                out.append(((i, s), psi.normalized_residual((X, Y, Z))))
    return out


# ---------------------------------------------------------------------------
# chi*-projection for n = 2
# ---------------------------------------------------------------------------


@dataclass
class ProjectionCheck:
    N: int
    g: GL2Matrix
    eliminant_terms: int
    eliminant_max_residual: object
    full_resultant_zero: bool
    psi_divides_eliminant: bool
    samples: int

    def lines(self):
        return [f"N = {self.N}", f"relation = {self.g}", f"samples = {self.samples}",
                f"eliminant_terms = {self.eliminant_terms}",
                f"eliminant_max_residual = {mpmath.nstr(self.eliminant_max_residual, 5)}",
                f"full_resultant_identically_zero = {self.full_resultant_zero}",
                f"psi_divides_eliminant = {self.psi_divides_eliminant}"]


def _sympy_expr(poly, symbols):
    import sympy

    return sympy.Add(*[sympy.Rational(int(c.numerator), int(c.denominator))
                       * sympy.Mul(*[v ** e for v, e in zip(symbols, k)])
                       for k, c in poly.terms.items()])


def projection_eliminants(N: int, store: PolynomialStore | None = None):
    """For tau_2 = g tau_1 with det g = N, eliminate the j-variables.

    Returns (R1, R, C): R1 = Res_{J1}(Psi_N(X2, J1, X1), Phi_N(J1, J2)) as a
    TriPolynomial in (X1, X2, J2); R = Res_{J2}(R1, C) in (X1, X2) as a sympy
    Poly; C = Psi_N(X1, J2, X2).
    """
    import sympy
    from gmpy2 import mpq

    store = store or DEFAULT_STORE
    psi, phi = store.psi(N), store.phi(N)
    X1, X2, J1, J2 = sympy.symbols("X1 X2 J1 J2")
    A = sympy.Poly(_sympy_expr(psi, (X2, J1, X1)), J1)
    B = sympy.Poly(_sympy_expr(phi, (J1, J2)), J1)
    R1 = sympy.Poly(sympy.resultant(A, B, J1), X1, X2, J2)
    C = sympy.Poly(_sympy_expr(psi, (X1, J2, X2)), X1, X2, J2)
    R = sympy.Poly(sympy.resultant(sympy.Poly(R1.as_expr(), J2), sympy.Poly(C.as_expr(), J2), J2), X1, X2)
    terms = {k: mpq(int(c.p), int(c.q)) for k, c in R1.terms()}
    return TriPolynomial(terms, N=N), R, C


def chi_projection_check(desc: SpecialDescriptor, count: int = 10, prec: int = DEFAULT_PREC,
                         seed: int = DEFAULT_SEED, store: PolynomialStore | None = None) -> ProjectionCheck:
    """n = 2 with one relation tau_2 = g tau_1: evaluate the eliminants at pushed-forward samples."""
    if desc.n != 2 or len(desc.relations) != 1 or desc.constants:
        raise ValueError("the chi*-projection check needs n = 2 with a single relation")
    g = next(iter(desc.relations.values()))
    if g.det < 2:
        raise ValueError("the relation needs determinant at least 2")
    R1, R, C = projection_eliminants(g.det, store)
    worst = mpmath.mpf(0)
    with mpmath.workprec(prec + GUARD_BITS):
        for pt in pushforward(desc, count, prec, seed):
            j1, x1, j2, x2 = pt.image
            worst = max(worst, R1.normalized_residual((x1, x2, j2)))
    import sympy

    # C is monic in J2 of degree |D_N|, so division in J2 is exact over Q[X1, X2]
    R1_j2 = sympy.Poly(_sympy_expr(R1, C.gens), C.gens[2])
    divides = sympy.rem(R1_j2, sympy.Poly(C.as_expr(), C.gens[2])).is_zero
    return ProjectionCheck(g.det, g, len(R1.terms), worst, R.is_zero, divides, count)
