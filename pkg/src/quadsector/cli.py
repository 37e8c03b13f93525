"""Command-line front end.

Exit codes: 0 ok, 1 property failure, 2 configuration error, 3 resource cap.
CSV cells carry 12 significant digits; JSON keeps full float precision and a
fixed key order so that reruns are byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .characters import ModulusTooLarge, characters_mod, hecke_char, residue_group
from .checks import SUITES, run_suite
from .decompositions import ParamDomain, PreconditionUViolated, VaughanParams, vaughan_terms
from .ideals import Ideal, enumerate_ideals, factor_ideal, prime_ideals_up_to, splitting_type, von_mangoldt
from .prime_counts import NotCoprime, Normalization, bv_lhs, error_terms, main_term, psi_S
from .quad_field import FieldCtx, FieldError, QuadInt, make_field
from .sectors import SectorSpec, parse_rational, sigma_sum
from .sieve_bounds import CapExceeded, charsum, family_build, family_matrix, gram_row_sums, landau_ratio, large_sieve_ratio

EXIT_OK, EXIT_PROPERTY, EXIT_CONFIG, EXIT_CAP = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    d: int
    spec: SectorSpec
    xs: tuple[int, ...]
    Q: int
    U: float | None
    V: float | None
    norm: str
    threads: int
    seed: int
    A: float | None = None

    @property
    def x(self) -> int:
        return self.xs[-1]


def _int(text: str, name: str) -> int:
    try:
        v = float(text)
    except ValueError:
        raise ConfigError(f"--{name}: not a number: {text!r}") from None
    if not v.is_integer():
        raise ConfigError(f"--{name}: expected an integer, got {text!r}")
    return int(v)


def _elem(text: str, d: int, name: str) -> QuadInt:
    parts = text.split(",")
    if len(parts) != 2:
        raise ConfigError(f"--{name}: expected 'u,v', got {text!r}")
    return QuadInt(_int(parts[0], name), _int(parts[1], name), d)


def _uv(text: str | None, x: int, name: str) -> float | None:
    if text is None or text == "paper":
        return None
    try:
        val = float(text)
    except ValueError:
        raise ConfigError(f"--{name}: expected a number or 'paper', got {text!r}") from None
    if not 1 <= val <= x:
        raise ConfigError(f"--{name}: need 1 <= {name} <= x, got {val}")
    return val


def build_config(args: argparse.Namespace) -> RunConfig:
    try:
        spec = SectorSpec(parse_rational(args.eta1), parse_rational(args.eta2))
    except (ValueError, ZeroDivisionError) as e:
        raise ConfigError(f"--eta1/--eta2: {e}") from None
    if args.x_grid:
        xs = tuple(sorted(_int(t, "x-grid") for t in args.x_grid.split(",")))
    else:
        xs = (_int(args.x, "x"),)
    if xs[0] < 2:
        raise ConfigError("--x: need x >= 2")
    Q = _int(args.Q, "Q")
    if Q < 1:
        raise ConfigError(f"--Q: need Q >= 1, got {Q}")
    if args.threads < 1:
        raise ConfigError("--threads: need at least 1")
    return RunConfig(args.d, spec, xs, Q, _uv(args.U, xs[-1], "U"), _uv(args.V, xs[-1], "V"), args.norm, args.threads, args.seed, args.A)


# ---------------------------------------------------------------- output


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.12g}"
    return str(v)


def write_csv(path: str, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_cell(c) for c in r])
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(buf.getvalue())


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, QuadInt):
        return [v.u, v.v]
    return v


def emit(obj: dict, as_json: bool, out) -> None:
    if as_json:
        out.write(json.dumps(_jsonable(obj), ensure_ascii=False) + "\n")
        return
    for k, v in obj.items():
        if isinstance(v, float):
            v = _cell(v)
        out.write(f"{k}: {v}\n")


def svg_loglog(points: Sequence[tuple[float, float]], title: str, xlabel: str, ylabel: str, width: int = 480, height: int = 320) -> str:
    """Log-log polyline with decade ticks."""
    pts = [(x, y) for x, y in points if x > 0 and y > 0]
    if not pts:
        pts = [(1.0, 1.0)]
    lx = [math.log10(x) for x, _ in pts]
    ly = [math.log10(y) for _, y in pts]
    x0, x1 = math.floor(min(lx)), math.ceil(max(lx))
    y0, y1 = math.floor(min(ly)), math.ceil(max(ly))
    x1, y1 = max(x1, x0 + 1), max(y1, y0 + 1)
    ml, mr, mt, mb = 60, 20, 30, 45
    pw, ph = width - ml - mr, height - mt - mb

    def px(a):
        return ml + (a - x0) / (x1 - x0) * pw

    def py(b):
        return mt + ph - (b - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="11">',
        f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
        f'<text x="{width / 2:.1f}" y="18" text-anchor="middle">{title}</text>',
    ]
    for k in range(x0, x1 + 1):
        out.append(f'<line x1="{px(k):.2f}" y1="{mt + ph}" x2="{px(k):.2f}" y2="{mt + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{px(k):.2f}" y="{mt + ph + 17}" text-anchor="middle">1e{k}</text>')
    for k in range(y0, y1 + 1):
        out.append(f'<line x1="{ml - 5}" y1="{py(k):.2f}" x2="{ml}" y2="{py(k):.2f}" stroke="black"/>')
        out.append(f'<text x="{ml - 8}" y="{py(k) + 4:.2f}" text-anchor="end">1e{k}</text>')
    out.append(f'<text x="{width / 2:.1f}" y="{height - 8}" text-anchor="middle">{xlabel}</text>')
    out.append(f'<text x="14" y="{mt + ph / 2:.1f}" text-anchor="middle" transform="rotate(-90 14 {mt + ph / 2:.1f})">{ylabel}</text>')
    coords = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(lx, ly))
    out.append(f'<polyline points="{coords}" fill="none" stroke="steelblue" stroke-width="1.5"/>')
    for a, b in zip(lx, ly):
        out.append(f'<circle cx="{px(a):.2f}" cy="{py(b):.2f}" r="2.5" fill="steelblue"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------- commands


def _field(d: int) -> FieldCtx:
    return make_field(d)


def cmd_field(args, out) -> int:
    ctx = _field(args.d)
    emit({
        "d": ctx.d,
        "eps": str(ctx.eps) if not args.json else ctx.eps,
        "eps_norm": ctx.eps.norm(),
        "log_eps": ctx.log_eps,
        "discriminant": ctx.disc,
        "class_number_one": ctx.class_number_one,
    }, args.json, out)
    return EXIT_OK


def cmd_ideals(args, out) -> int:
    ctx = _field(args.d)
    X = _int(args.x, "x")
    rows = []
    for I in enumerate_ideals(X, ctx):
        fac = " ".join(f"{P}^{e}" if e > 1 else str(P) for P, e in factor_ideal(I, ctx)) or "1"
        rows.append((I.norm, I.gen.u, I.gen.v, fac))
    if args.csv:
        write_csv(args.csv, ["norm", "gen_u", "gen_v", "factorization"], rows)
    if args.json:
        emit({"d": ctx.d, "X": X, "count": len(rows), "ideals": [list(r) for r in rows]}, True, out)
    elif not args.csv:
        for r in rows:
            out.write(f"{r[0]:>8} {str(QuadInt(r[1], r[2], ctx.d)):>16}  {r[3]}\n")
    return EXIT_OK


def cmd_primes(args, out) -> int:
    ctx = _field(args.d)
    X = _int(args.x, "x")
    rows = []
    for P in prime_ideals_up_to(X, ctx):
        # inert primes have norm p^2, the others norm p
        r = math.isqrt(P.norm)
        p = r if r * r == P.norm else P.norm
        kind = type(splitting_type(p, ctx)).__name__.lower()
        rows.append((P.norm, P.gen.u, P.gen.v, p, kind))
    if args.csv:
        write_csv(args.csv, ["norm", "gen_u", "gen_v", "p", "type"], rows)
    if args.json:
        emit({"d": ctx.d, "X": X, "count": len(rows), "primes": [list(r) for r in rows]}, True, out)
    elif not args.csv:
        for r in rows:
            out.write(f"{r[0]:>8} {str(QuadInt(r[1], r[2], ctx.d)):>16}  {r[4]}\n")
    return EXIT_OK


def _modulus(args, ctx) -> Ideal:
    g = _elem(args.q, ctx.d, "q")
    if not g:
        raise ConfigError("--q: the modulus must be nonzero")
    return Ideal.of(g, ctx)


def cmd_psi(args, out) -> int:
    cfg = build_config(args)
    ctx = _field(cfg.d)
    q = _modulus(args, ctx)
    a = _elem(args.a, ctx.d, "a")
    res = {"d": ctx.d, "sector": str(cfg.spec), "x": cfg.x, "modulus": q.gen, "N_q": q.norm, "a": a}
    res["psi"] = psi_S(cfg.x, q, a, cfg.spec, ctx)
    for n in _norms(cfg.norm):
        res[f"main_{n.value}"] = main_term(cfg.x, q, cfg.spec, ctx, n)
        res[f"E_{n.value}"] = error_terms(cfg.x, q, a, cfg.spec, ctx, n)[0]
    res["E_tilde"] = error_terms(cfg.x, q, a, cfg.spec, ctx)[1]
    if not args.json:
        res["modulus"], res["a"] = str(q.gen), str(a)
    emit(res, args.json, out)
    return EXIT_OK


def _norms(choice: str) -> list[Normalization]:
    # with both, the half-eta normalization fills the CSV columns
    return [Normalization.HALF_ETA, Normalization.PAPER_ETA] if choice == "both" else [Normalization(choice)]


BV_COLUMNS = ["N_q", "gen_u", "gen_v", "phi_q", "argmax_a_u", "argmax_a_v", "maxE", "maxEtilde"]


def cmd_bv(args, out) -> int:
    cfg = build_config(args)
    if cfg.Q > cfg.xs[0]:
        raise ConfigError(f"--Q: need Q <= x, got Q = {cfg.Q} and x = {cfg.xs[0]}")
    ctx = _field(cfg.d)
    norms = _norms(cfg.norm)
    reports = [bv_lhs(x, cfg.Q, cfg.spec, ctx, threads=cfg.threads) for x in cfg.xs]
    last = reports[-1]
    primary = norms[0].value
    if args.csv:
        rows = []
        for r in last.rows:
            a = r.argmax[primary]
            rows.append((r.modulus.norm, r.modulus.gen.u, r.modulus.gen.v, r.phi, a.u, a.v, r.max_e[primary], r.max_e_tilde))
        write_csv(args.csv, BV_COLUMNS, rows)
    grid = []
    for rep in reports:
        entry = {"x": rep.x}
        for n in Normalization:
            entry[f"total_{n.value}"] = rep.total(n)
            entry[f"ratio_{n.value}"] = rep.ratio(n)
        entry["total_tilde"] = rep.total_tilde
        if cfg.A is not None:
            # LHS * log^A x / x, the quantity the level-of-distribution bound keeps below a constant
            for n in Normalization:
                entry[f"scaled_{n.value}"] = rep.total(n) * math.log(rep.x) ** cfg.A / rep.x
        grid.append(entry)
    res = {"d": ctx.d, "eta1": str(cfg.spec.eta1), "eta2": str(cfg.spec.eta2), "Q": cfg.Q, "moduli": len(last.rows)}
    res.update(grid[-1])
    if len(grid) > 1:
        res["grid"] = grid
    if args.svg:
        pts = [(g["x"], g[f"ratio_{primary}"]) for g in grid]
        with open(args.svg, "w", encoding="utf-8", newline="") as f:
            f.write(svg_loglog(pts, f"sector {cfg.spec}, Q = {cfg.Q}", "x", "LHS / x"))
    emit(res, args.json, out)
    return EXIT_OK


def _dirichlet(args, q: Ideal, ctx):
    G = residue_group(q, ctx)
    if args.phases:
        phases = tuple(_int(t, "phases") for t in args.phases.split(","))
    else:
        phases = (0,) * len(G.orders)
    if len(phases) != len(G.orders):
        raise ConfigError(f"--phases: the group has {len(G.orders)} cyclic factors of orders {G.orders}")
    chars = {c.phases: c for c in characters_mod(q, ctx)}
    return chars[tuple(k % m for k, m in zip(phases, G.orders))]


def cmd_charsum(args, out) -> int:
    ctx = _field(args.d)
    X = _int(args.x, "x")
    q = _modulus(args, ctx)
    h = hecke_char(_dirichlet(args, q, ctx), args.n, ctx)
    s = charsum(h, X, ctx)
    res = {"d": ctx.d, "N_q": q.norm, "phases": list(h.chi.phases), "orders": list(h.chi.group.orders), "n": h.twist_n, "X": X,
           "tau": str(h.tau), "sum_re": s.real, "sum_im": s.imag, "abs_sum": abs(s)}
    res["landau_ratio"] = None if h.is_principal else landau_ratio(h, X, ctx)
    emit(res, args.json, out)
    return EXIT_OK


def cmd_large_sieve(args, out) -> int:
    ctx = _field(args.d)
    fam = family_build(args.P, args.N, ctx)
    K = _int(args.K, "K")
    if not fam.members:
        emit({"P": args.P, "N": args.N, "K": K, "family_size": 0}, args.json, out)
        return EXIT_OK
    Phi = family_matrix(fam, K, ctx)
    rows = gram_row_sums(Phi)
    rng = np.random.default_rng(args.seed)
    worst, worst_conj, bessel_ok = 0.0, 0.0, True
    for _ in range(args.draws):
        a = rng.choice([-1.0, 1.0], Phi.shape[1])
        r = large_sieve_ratio(fam, K, a, ctx, matrix=Phi, gram_rowsums=rows)
        bessel_ok &= r.lhs <= r.bessel * (1 + 1e-12)
        worst = max(worst, r.ratio)
        worst_conj = max(worst_conj, r.conjectural_ratio)
    emit({"P": args.P, "N": args.N, "K": K, "family_size": len(fam), "size_ratio": fam.size_ratio, "draws": args.draws,
          "bessel_holds": bool(bessel_ok), "max_ratio": worst, "max_conjectural_ratio": worst_conj}, args.json, out)
    return EXIT_OK if bessel_ok else EXIT_PROPERTY


def cmd_vaughan(args, out) -> int:
    ctx = _field(args.d)
    X = _int(args.x, "x")
    U = _uv(args.U, X, "U")
    V = _uv(args.V, X, "V")
    default = VaughanParams.default(X, args.P)
    U = default.U if U is None else U
    V = default.V if V is None else V
    worst, count = 0.0, 0
    for n in enumerate_ideals(X, ctx):
        if n.norm <= U:
            continue
        a1, a2, a3 = vaughan_terms(n, U, V, ctx)
        worst = max(worst, abs(a1 + a2 + a3 - von_mangoldt(n, ctx)))
        count += 1
    ok = worst <= 1e-9
    emit({"d": ctx.d, "X": X, "U": U, "V": V, "ideals": count, "max_abs_error": worst, "holds": ok}, args.json, out)
    return EXIT_OK if ok else EXIT_PROPERTY


def cmd_sigma(args, out) -> int:
    cfg = build_config(args)
    ctx = _field(cfg.d)
    rows = []
    for x in cfg.xs:
        Z = x if args.Z is None else args.Z
        s = sigma_sum(x, Z, ctx, cfg.spec)
        rows.append({"x": x, "Z": Z, "sigma": s, "sigma_over_x06": s / x ** 0.6})
    if args.csv:
        write_csv(args.csv, ["x", "Z", "sigma", "sigma_over_x06"], [list(r.values()) for r in rows])
    if args.svg:
        with open(args.svg, "w", encoding="utf-8", newline="") as f:
            f.write(svg_loglog([(r["x"], r["sigma"]) for r in rows], f"sector {cfg.spec}", "x", "Sigma"))
    emit({"d": ctx.d, "sector": str(cfg.spec), "rows": rows} if args.json else rows[-1], args.json, out)
    return EXIT_OK


def cmd_checks(args, out) -> int:
    if args.list:
        for name in SUITES:
            out.write(name + "\n")
        return EXIT_OK
    names = list(SUITES) if not args.only else args.only.split(",")
    unknown = [n for n in names + ([args.expect_fail] if args.expect_fail else []) if n not in SUITES]
    if unknown:
        raise ConfigError(f"unknown suite(s): {', '.join(unknown)}")
    if args.expect_fail:
        names = [args.expect_fail]
    results = [run_suite(n, seed=args.seed, inject=n == args.expect_fail) for n in names]
    if args.json:
        emit({"seed": args.seed, "injected": args.expect_fail, "passed": all(r.passed for r in results),
              "suites": [{"name": n, "criterion": r.criterion, "passed": r.passed, "measured": r.measured} for n, r in zip(names, results)]},
             True, out)
    else:
        for r in results:
            out.write(r.line() + "\n")
    return EXIT_OK if all(r.passed for r in results) else EXIT_PROPERTY


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--d", type=int, default=2, help="squarefree d = 2, 3 mod 4 with class number one")
    common.add_argument("--eta1", default="-1", help="lower sector parameter as p/q")
    common.add_argument("--eta2", default="1", help="upper sector parameter as p/q")
    common.add_argument("--x", default="10000")
    common.add_argument("--x-grid", default=None, help="comma-separated list of x values")
    common.add_argument("--Q", default="20")
    common.add_argument("--U", default="paper", help="number or 'paper' for x^(2/5) P^(-3/5)")
    common.add_argument("--V", default="paper")
    common.add_argument("--A", type=float, default=None, help="report LHS log^A(x) / x as well")
    common.add_argument("--norm", choices=["paper", "half", "both"], default="both")
    common.add_argument("--json", action="store_true")
    common.add_argument("--csv", default=None, metavar="PATH")
    common.add_argument("--svg", default=None, metavar="PATH")
    common.add_argument("--out-dir", default=None, help="directory for relative --csv/--svg paths")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--seed", type=int, default=0)

    p = argparse.ArgumentParser(prog="quadsector", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("field", parents=[common], help="fundamental unit and discriminant")
    sub.add_parser("ideals", parents=[common], help="ideals of norm <= x with factorizations")
    sub.add_parser("primes", parents=[common], help="prime ideals of norm <= x")
    s = sub.add_parser("psi", parents=[common], help="sector prime count in a residue class")
    s.add_argument("--q", default="3,0", help="modulus generator 'u,v'")
    s.add_argument("--a", default="1,0", help="residue class 'u,v'")
    sub.add_parser("bv", parents=[common], help="Bombieri-Vinogradov left side over N(q) <= Q")
    s = sub.add_parser("charsum", parents=[common], help="Hecke character sum over ideals of norm <= x")
    s.add_argument("--q", default="3,0")
    s.add_argument("--phases", default=None, help="comma-separated phases on the group generators")
    s.add_argument("--n", type=int, default=0, help="twist by xi^n")
    s = sub.add_parser("large-sieve", parents=[common], help="large-sieve ratio for a character family")
    s.add_argument("--P", type=float, default=8)
    s.add_argument("--N", type=int, default=0)
    s.add_argument("--K", default="1000")
    s.add_argument("--draws", type=int, default=20)
    s = sub.add_parser("vaughan", parents=[common], help="check Vaughan's identity on ideals of norm <= x")
    s.add_argument("--P", type=float, default=1.0, help="P in the default U = V = x^(2/5) P^(-3/5)")
    s = sub.add_parser("sigma", parents=[common], help="sum of T_Z(W) over ideals of norm <= x")
    s.add_argument("--Z", type=int, default=None, help="truncation length, default Z = x")
    s = sub.add_parser("checks", parents=[common], help="run the property suites")
    s.add_argument("--list", action="store_true", help="list suite names")
    s.add_argument("--only", default=None, help="comma-separated suite names")
    s.add_argument("--expect-fail", default=None, metavar="NAME", help="run NAME with a deliberately broken ingredient")
    return p


COMMANDS = {
    "field": cmd_field,
    "ideals": cmd_ideals,
    "primes": cmd_primes,
    "psi": cmd_psi,
    "bv": cmd_bv,
    "charsum": cmd_charsum,
    "large-sieve": cmd_large_sieve,
    "vaughan": cmd_vaughan,
    "sigma": cmd_sigma,
    "checks": cmd_checks,
}


def _resolve_outputs(args) -> None:
    if not args.out_dir:
        return
    try:
        os.makedirs(args.out_dir, exist_ok=True)
    except OSError as e:
        raise ConfigError(f"--out-dir: {e}") from None
    for key in ("csv", "svg"):
        path = getattr(args, key)
        if path and not os.path.isabs(path):
            setattr(args, key, os.path.join(args.out_dir, path))


def _join_negative(argv: list[str]) -> list[str]:
    """Glue "--eta1 -1/2" into "--eta1=-1/2"; argparse reads -1/2 as a flag."""
    out, i = [], 0
    while i < len(argv):
        if argv[i] in ("--eta1", "--eta2") and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{argv[i]}={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(_join_negative(list(sys.argv[1:] if argv is None else argv)))
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_CONFIG
    try:
        _resolve_outputs(args)
        return COMMANDS[args.command](args, out)
    except (CapExceeded, ModulusTooLarge) as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_CAP
    except (ConfigError, FieldError, NotCoprime, ParamDomain, PreconditionUViolated, ValueError, ZeroDivisionError) as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
