"""Command-line entry point: ``python -m chistar <command> ...``.

Every command prints ``key = value`` lines ending in ``status = PASS|FAIL``
and writes the same report (and any polynomial) to the output directory.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

import mpmath

from . import cm, numeval, special
from .errors import ChiStarError
from .hecke import GL2Matrix, enumerate_DN
from .hpcomplex import ComplexHP, parse_tau
from .modpoly import PolynomialStore, RecoveryConfig, build_phi, build_psi, psi_sanity, save_poly


@dataclass
class RunConfig:
    prec: int = numeval.DEFAULT_PREC
    trunc: int | None = None
    seed: int = numeval.DEFAULT_SEED
    samples: int | None = None
    tol: float | None = None
    out: Path = Path("out")

    def __post_init__(self):
        if self.prec < 64:
            raise ValueError("--prec must be at least 64")
        if self.trunc is not None and self.trunc < 8:
            raise ValueError("--trunc must be at least 8")

    def store(self) -> PolynomialStore:
        return PolynomialStore(self.out)

    def tolerance(self, default):
        return mpmath.mpf(self.tol) if self.tol is not None else default


class Report:
    def __init__(self, name: str):
        self.name = name
        self.lines: list[str] = []

    def add(self, key: str, val) -> None:
        self.lines.append(f"{key} = {val}")

    def extend(self, lines) -> None:
        self.lines.extend(lines)

    def finish(self, cfg: RunConfig, ok: bool) -> int:
        self.lines.append(f"status = {'PASS' if ok else 'FAIL'}")
        text = "\n".join(self.lines) + "\n"
        sys.stdout.write(text)
        cfg.out.mkdir(parents=True, exist_ok=True)
        (cfg.out / f"{self.name}.txt").write_text(text)
        return 0 if ok else 1


def _fmt(x, digits: int = 6) -> str:
    return mpmath.nstr(x, digits)


def _parse_matrix(text: str) -> GL2Matrix:
    parts = text.replace(",", " ").replace(";", " ").replace("/", " ").split()
    if len(parts) != 4:
        raise argparse.ArgumentTypeError(f"matrix needs four integers: {text!r}")
    try:
        return GL2Matrix(*(int(p) for p in parts))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _parse_point(text: str) -> str:
    try:
        parse_tau(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    return text


def cmd_dn(args, cfg: RunConfig) -> int:
    rep = Report(f"dn_{args.N}")
    mats = enumerate_DN(args.N)
    rep.add("N", args.N)
    rep.add("size", len(mats))
    for g in mats:
        rep.add("matrix", g)
    return rep.finish(cfg, True)


def cmd_phi(args, cfg: RunConfig) -> int:
    poly = build_phi(args.N, RecoveryConfig(T=cfg.trunc))
    cfg.out.mkdir(parents=True, exist_ok=True)
    path = cfg.out / f"phi_{args.N}.txt"
    save_poly(poly, path)
    rep = Report(f"phi_{args.N}_build")
    rep.add("N", args.N)
    rep.add("file", path.name)
    rep.add("terms", len(poly.terms))
    rep.add("deg_X", poly.degree(0))
    rep.add("symmetric", poly == poly.swap(0, 1))
    return rep.finish(cfg, poly.is_integral())


def cmd_psi(args, cfg: RunConfig) -> int:
    poly = build_psi(args.N, RecoveryConfig(T=cfg.trunc))
    cfg.out.mkdir(parents=True, exist_ok=True)
    path = cfg.out / f"psi_{args.N}.txt"
    save_poly(poly, path)
    sanity = psi_sanity(poly, args.N)
    rep = Report(f"psi_{args.N}_build")
    rep.add("N", args.N)
    rep.add("file", path.name)
    rep.add("terms", len(poly.terms))
    rep.extend(sanity.lines())
    return rep.finish(cfg, sanity.ok)


def cmd_eval(args, cfg: RunConfig) -> int:
    tau = ComplexHP.parse(args.tau, cfg.prec)
    res = numeval.eval_fn(args.fn, tau, cfg.prec)
    rep = Report(f"eval_{args.fn}")
    rep.add("fn", args.fn)
    rep.add("tau", args.tau)
    rep.add("prec", cfg.prec)
    rep.add("value", res.value.format())
    rep.add("tail_bound", _fmt(res.tail_bound, 3))
    rep.add("reduced_point", res.reduced_point.format(20))
    return rep.finish(cfg, True)


def cmd_verify(args, cfg: RunConfig) -> int:
    kind = args.kind
    store = cfg.store()
    if kind == "psi":
        rep = Report(f"verify_psi_{args.n}")
        samples = cfg.samples or 10
        r = numeval.verify_psi_identity(store.psi(args.n), args.n, samples, cfg.prec, cfg.seed)
        tol = cfg.tolerance(numeval.hold_tol(cfg.prec))
        rep.add("N", args.n)
        rep.add("samples", samples)
        rep.add("matrices_per_sample", len(r.residuals) // samples)
        rep.add("prec", cfg.prec)
        rep.add("seed", cfg.seed)
        rep.add("max_residual", _fmt(r.max_residual))
        rep.add("tolerance", _fmt(tol, 5))
        return rep.finish(cfg, r.max_residual < tol)
    if kind == "chi":
        rep = Report(f"verify_chi_{args.n}")
        samples = cfg.samples or 10
        psi = store.psi(args.n)
        mats = [args.g] if args.g is not None else enumerate_DN(args.n)
        ok = True
        rep.add("N", args.n)
        rep.add("samples", samples)
        for g in mats:
            v = numeval.verify_chi_identity(psi, args.n, g, samples, cfg.prec, cfg.seed)
            expected = "HOLDS" if g.is_upper_triangular() else "FAILS"
            ok &= v.verdict == expected
            rep.add(f"matrix {g} verdict", v.verdict)
            rep.add(f"matrix {g} expected", expected)
            rep.add(f"matrix {g} max_residual", _fmt(v.report.max_residual))
            rep.add(f"matrix {g} min_residual", _fmt(v.report.min_residual))
            rep.add(f"matrix {g} failing_points", v.failing_count)
        return rep.finish(cfg, ok)
    if kind == "laws":
        rep = Report("verify_laws")
        samples = cfg.samples or 20
        r = numeval.verify_transformation_laws(samples, cfg.prec, cfg.seed)
        tol = cfg.tolerance(mpmath.mpf("1e-30"))
        rep.extend(r.lines())
        rep.add("tolerance", _fmt(tol, 5))
        return rep.finish(cfg, r.max_residual < tol)
    if kind == "demo":
        rep = Report(f"verify_demo_{args.n}")
        r = numeval.infinite_values_demo(args.n, args.nmax, cfg.prec)
        rep.extend(r.lines())
        return rep.finish(cfg, r.ok)
    raise AssertionError(kind)  # pragma: no cover


def cmd_cm(args, cfg: RunConfig) -> int:
    prec = max(cfg.prec, cm.DEFAULT_PREC) if args.prec is None else cfg.prec
    store = cfg.store()
    r = cm.galois_orbit_check(args.D, prec, store)
    rep = Report(f"cm_{-args.D}")
    rep.add("prec", prec)
    rep.extend(r.lines())
    certified = True
    for p in cm.reduced_forms(args.D):
        choice = cm.select_level(p, prec, store)
        rep.extend(f"form {p}: {line}" for line in choice.lines())
        if args.D != -4:
            certified &= choice.certified
    bridge = cm.certify_bridge(cfg.samples or 20, prec, cfg.seed)
    rep.add("bridge_series_identity", bridge.series_ok)
    rep.add("bridge_max_residual", _fmt(bridge.max_residual))
    ok = certified and r.j_integral and r.masser_ok() and bridge.ok
    return rep.finish(cfg, ok)


def cmd_special(args, cfg: RunConfig) -> int:
    store = cfg.store()
    if args.sub == "vn":
        rep = Report(f"special_vn_{args.n}")
        r = special.vn_suite(args.n, cfg.samples or 10, cfg.prec, cfg.seed, store)
        tol = cfg.tolerance(numeval.hold_tol(cfg.prec))
        rep.extend(r.lines(tol))
        probe = special.plane_rank_probe(args.n, max(8, cfg.samples or 8), cfg.prec, cfg.seed)
        rep.extend(probe.lines()[1:])
        return rep.finish(cfg, r.ok(tol))
    desc = special.load_descriptor(args.desc)
    rep = Report(f"special_push_{Path(args.desc).stem}")
    samples = cfg.samples or 5
    rep.add("n", desc.n)
    rep.add("gut", special.is_gut(desc))
    points = special.pushforward(desc, samples, cfg.prec, cfg.seed, args.fn)
    worst = mpmath.mpf(0)
    with mpmath.workprec(cfg.prec):
        for k, pt in enumerate(points):
            worst = max(worst, special.relation_defect(desc, pt.source))
            coords = pt.chi_part if args.project else pt.image
            rep.add(f"point {k} image", " ; ".join(mpmath.nstr(c, 20) for c in coords))
    rep.add("relation_defect", _fmt(worst))
    ok = worst < mpmath.mpf(2) ** (-cfg.prec // 2)
    if args.check:
        check = special.chi_projection_check(desc, samples, cfg.prec, cfg.seed, store)
        rep.extend(check.lines())
        ok &= check.eliminant_max_residual < cfg.tolerance(numeval.hold_tol(cfg.prec))
    return rep.finish(cfg, ok)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--prec", type=int, default=None, help="working precision in bits (default 256)")
    common.add_argument("--trunc", type=int, default=None, help="q-expansion truncation (default 40*N)")
    common.add_argument("--seed", type=int, default=numeval.DEFAULT_SEED)
    common.add_argument("--samples", type=int, default=None)
    common.add_argument("--tol", type=float, default=None, help="pass threshold for residuals")
    common.add_argument("--out", type=Path, default=Path("out"), help="directory for polynomials and reports")

    parser = argparse.ArgumentParser(prog="chistar", description="Modular polynomials in j and chi*, and their checks.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dn", parents=[common], help="list the representatives D_N")
    p.add_argument("N", type=int)
    p.set_defaults(func=cmd_dn)

    p = sub.add_parser("phi", parents=[common], help="build the classical modular polynomial Phi_N")
    p.add_argument("N", type=int)
    p.set_defaults(func=cmd_phi)

    p = sub.add_parser("psi", parents=[common], help="build Psi_N(X, Y, Z)")
    p.add_argument("N", type=int)
    p.set_defaults(func=cmd_psi)

    p = sub.add_parser("eval", parents=[common], help="evaluate a function at a point")
    p.add_argument("--fn", choices=numeval.FUNCTIONS, required=True)
    p.add_argument("--tau", type=_parse_point, required=True, help='point such as "i" or "1/10+6i/5"')
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("verify", parents=[common], help="numeric certification runs")
    p.add_argument("kind", choices=("psi", "chi", "laws", "demo"))
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--g", type=_parse_matrix, default=None, help='matrix "a b c d" for verify chi')
    p.add_argument("--nmax", type=int, default=10, help="number of points for verify demo")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("cm", parents=[common], help="CM checks for a discriminant")
    p.add_argument("D", type=int)
    p.set_defaults(func=cmd_cm)

    p = sub.add_parser("special", parents=[common], help="special-variety checks")
    p.add_argument("sub", choices=("vn", "push"))
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--desc", type=str, default=None, help="descriptor file (text or .json)")
    p.add_argument("--fn", choices=("chi_star", "chi"), default="chi_star")
    p.add_argument("--project", action="store_true", help="print chi-coordinates only")
    p.add_argument("--check", action="store_true", help="evaluate the j-eliminant (n = 2, one relation)")
    p.set_defaults(func=cmd_special)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "special" and args.sub == "push" and not args.desc:
        parser.error("special push needs --desc")
    if args.command == "verify" and args.kind == "chi" and args.g is not None and args.g.det != args.n:
        parser.error(f"--g has determinant {args.g.det}, expected --n {args.n}")
    try:
        cfg = RunConfig(args.prec if args.prec is not None else numeval.DEFAULT_PREC,
                        args.trunc, args.seed, args.samples, args.tol, args.out)
    except ValueError as exc:
        parser.error(str(exc))
    try:
        return args.func(args, cfg)
    except ChiStarError as exc:
        print(f"error = {type(exc).__name__}: {exc}")
        print("status = FAIL")
        return 1


if __name__ == "__main__":
    sys.exit(main())
