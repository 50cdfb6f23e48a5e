"""Batch front door: one subcommand per experiment.

Every run validates its parameters, calls the pure library code, and
writes CSV/JSON (and for some runs SVG) artifacts into the output
directory.  Outputs are byte-reproducible: shard boundaries and merge
order are fixed by the inputs, never by timing or worker count.

Exit codes: 0 success, 2 invalid parameters, 3 precision budget
exhausted.  Failures also print a single JSON object to stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .certified import DEFAULT_POLICY, Exponent, NAMED_CONSTANTS, PrecisionPolicy, rational_pow_cv
from .equidist import (
    equid_sample,
    equid_table,
    star_discrepancy,
    third_derivative_band,
    weyl_sum,
)
from .errors import DomainError, EmptyInput, PrecisionExhausted, PslabError
from .linear import count_fit, make_eq, solve_linear, solve_xyz, solutions_to_csv
from .measure import (
    DichotomyReport,
    MetricalParams,
    bc_statistics,
    bound_check_triples,
    count_triples,
    dichotomy_scan,
    set_E,
    set_F,
    set_G,
    set_H_sum,
)
from .output import write_csv, write_json, write_svg_histogram
from .parallel import run_sharded, shard_ranges
from .sequence import find_fs3, floor_pow, member_witness, root_ceil
from .systems import DiophSystem, cf_expand, solve_system_one, solve_system_two


@dataclass(frozen=True)
class RunConfig:
    """One validated invocation: where to write, how wide to fan out,
    how much precision to spend, and the raw per-subcommand options."""

    subcommand: str
    options: dict
    outdir: str
    workers: int
    policy: PrecisionPolicy


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse's own failures as JSON too
        print(json.dumps({"error": "UsageError", "message": message}),
              file=sys.stderr)
        self.exit(2)


def _frac(text) -> Fraction:
    return Fraction(str(text))


def _int(text) -> int:
    return int(str(text), 10)


def _int_list(text) -> list[int]:
    return [_int(t) for t in str(text).split(",") if t.strip()]


def _frac_list(text) -> list[Fraction]:
    return [_frac(t) for t in str(text).split(",") if t.strip()]


def _out(cfg: RunConfig, name: str) -> str:
    return os.path.join(cfg.outdir, name)


def _system_from(opt: dict) -> DiophSystem:
    return DiophSystem.make(_frac(opt["a"]), _frac(opt["c"]),
                            _frac(opt["gamma"]), _frac(opt["i_lo"]),
                            _frac(opt["i_hi"]))


# ---------------------------------------------------------------------------
# shard workers (module level so a process pool can import them)


def _gen_shard(job: tuple) -> list[tuple[int, int]]:
    alpha_txt, limit, lo, hi, bits = job
    alpha = Exponent.parse(alpha_txt)
    policy = PrecisionPolicy(start_bits=bits[0], max_bits=bits[1])
    rows = []
    for n in range(lo, hi + 1):
        m = floor_pow(n, alpha, policy)
        if m <= limit:
            rows.append((n, m))
    return rows


def _linear_shard(job: tuple):
    a_txt, b_txt, alpha_txt, lo, hi, bits = job
    policy = PrecisionPolicy(start_bits=bits[0], max_bits=bits[1])
    return solve_linear(make_eq(a_txt, b_txt), Exponent.parse(alpha_txt),
                        hi, policy, n_min=lo)


def _dicho_shard(job: tuple):
    sys_json, theta_txt, budget, bits = job
    sysm = DiophSystem.from_json(sys_json)
    policy = PrecisionPolicy(start_bits=bits[0], max_bits=bits[1])
    return dichotomy_scan(sysm, [Fraction(theta_txt)], budget, policy).rows[0]


# ---------------------------------------------------------------------------
# handlers


def _run_gen(cfg: RunConfig) -> None:
    opt = cfg.options
    alpha = Exponent.parse(opt["alpha"])
    limit = _int(opt["limit"])
    if limit < 1:
        raise DomainError("limit must be >= 1")
    n_hi = root_ceil(limit + 1, alpha, cfg.policy) + 1
    bits = (cfg.policy.start_bits, cfg.policy.max_bits)
    shards = [(str(alpha), limit, lo, hi, bits)
              for lo, hi in shard_ranges(1, n_hi, max(1, cfg.workers))]
    rows = [r for part in run_sharded(_gen_shard, shards, cfg.workers)
            for r in part]
    write_csv(_out(cfg, "gen.csv"), ["n", "value"], rows)
    members = [m for _, m in rows]
    summary = {"alpha": str(alpha), "limit": limit, "count": len(members)}
    if len(members) >= 2:
        gaps = [b - a for a, b in zip(members, members[1:])]
        summary["gap_min"] = min(gaps)
        summary["gap_max"] = max(gaps)
        write_svg_histogram(_out(cfg, "gen_gaps.svg"), [float(g) for g in gaps],
                            title=f"gaps, alpha={alpha}, limit={limit}")
    write_json(_out(cfg, "gen.json"), summary)


def _run_member(cfg: RunConfig) -> None:
    opt = cfg.options
    alpha = Exponent.parse(opt["alpha"])
    m = _int(opt["m"])
    if m < 1:
        raise DomainError("m must be >= 1")
    n = member_witness(m, alpha, cfg.policy)
    print("true" if n is not None else "false")
    write_json(_out(cfg, "member.json"),
               {"alpha": str(alpha), "m": m,
                "member": n is not None, "witness": n})


def _run_solve_linear(cfg: RunConfig) -> None:
    opt = cfg.options
    alpha = Exponent.parse(opt["alpha"])
    eq = make_eq(opt["a"], opt["b"])  # validates a, b
    n_top = _int(opt["n"])
    bits = (cfg.policy.start_bits, cfg.policy.max_bits)
    shards = [(opt["a"], opt["b"], str(alpha), lo, hi, bits)
              for lo, hi in shard_ranges(1, n_top, max(1, cfg.workers))]
    records = [r for part in run_sharded(_linear_shard, shards, cfg.workers)
               for r in part]
    solutions_to_csv(_out(cfg, "solve_linear.csv"), records)
    write_json(_out(cfg, "solve_linear.json"),
               {"alpha": str(alpha), "a": str(eq.a), "b": str(eq.b),
                "n": n_top, "solutions": len(records),
                "first_n": [r.n for r in records[:20]]})


def _run_count_fit(cfg: RunConfig) -> None:
    opt = cfg.options
    alpha = Exponent.parse(opt["alpha"])
    eq = make_eq(opt["a"], opt["b"])
    cps = _int_list(opt["checkpoints"])
    fit = count_fit(eq, alpha, cps, cfg.policy)
    write_csv(_out(cfg, "count_fit.csv"), ["checkpoint", "count", "used"],
              [(cp, ct, cp in fit.used)
               for cp, ct in zip(fit.checkpoints, fit.counts)])
    out = fit.as_dict()
    out.update({"alpha": str(alpha), "a": str(eq.a), "b": str(eq.b)})
    write_json(_out(cfg, "count_fit.json"), out)


def _run_solve_system(cfg: RunConfig) -> None:
    opt = cfg.options
    sysm = _system_from(opt)
    budget = _int(opt["budget"])
    if opt.get("alpha") and opt.get("theta"):
        raise DomainError("give exactly one of alpha (root form) or theta")
    if opt.get("alpha"):
        alpha = Exponent.parse(opt["alpha"])
        rep = solve_system_one(sysm, alpha, budget, policy=cfg.policy)
        mode = {"mode": "root", "alpha": str(alpha)}
    elif opt.get("theta"):
        theta = _frac(opt["theta"])
        rep = solve_system_two(sysm, theta, budget, cfg.policy)
        mode = {"mode": "slope", "theta": str(theta)}
    else:
        raise DomainError("give one of alpha (root form) or theta")
    rep.to_csv(_out(cfg, "solve_system.csv"))
    summary = {"system": json.loads(sysm.to_json()), "budget": budget,
               "solutions": len(rep), "scan_top": rep.scan_top,
               "candidates_tested": rep.candidates_tested,
               "warnings": list(rep.warnings),
               "ns_head": list(rep.ns[:50])}
    summary.update(mode)
    write_json(_out(cfg, "solve_system.json"), summary)


def _cf_target(token: str, policy: PrecisionPolicy):
    """Target forms: 'p/q', a named constant, or 'root:m:p/q' for m^(p/q)."""
    token = token.strip()
    if token.startswith("root:"):
        try:
            _, base_txt, expo_txt = token.split(":")
            base = _int(base_txt)
            expo = Fraction(expo_txt)
        except ValueError as exc:
            raise DomainError(f"bad root target {token!r}: want root:m:p/q") from exc
        if base < 1:
            raise DomainError("root base must be >= 1")
        provider = lambda bits: rational_pow_cv(Fraction(base), expo, bits)  # noqa: E731
        return provider(policy.start_bits), provider
    if token in NAMED_CONSTANTS:
        provider = NAMED_CONSTANTS[token]
        return provider(policy.start_bits), provider
    from .certified import CertifiedValue

    return CertifiedValue.exactly(_frac(token)), None


def _run_cf(cfg: RunConfig) -> None:
    opt = cfg.options
    terms = _int(opt["terms"])
    x, refine = _cf_target(opt["target"], cfg.policy)
    cf = cf_expand(x, terms, refine, cfg.policy)
    write_csv(_out(cfg, "cf.csv"), ["k", "quotient", "p", "q"],
              [(i, a, pq[0], pq[1])
               for i, (a, pq) in enumerate(zip(cf.quotients, cf.convergents))])
    write_json(_out(cfg, "cf.json"),
               {"target": opt["target"], "terms_asked": terms,
                "terms": list(cf.quotients),
                "exact_rational": cf.exact_rational,
                "last_convergent": [cf.convergents[-1][0],
                                    cf.convergents[-1][1]]})


def _run_equidist(cfg: RunConfig) -> None:
    opt = cfg.options
    a, gamma = _frac(opt["a"]), _frac(opt["gamma"])
    e1, e2 = _frac(opt["eta1"]), _frac(opt["eta2"])
    if not opt.get("n_grid") and not opt.get("n"):
        raise DomainError("give --n or --n-grid")
    if opt.get("n_grid"):
        grid = _int_list(opt["n_grid"])
        rows = equid_table(a, gamma, e1, e2, grid, cfg.policy)
        write_csv(_out(cfg, "equidist_table.csv"),
                  ["n", "points", "star_disc", "weyl1", "weyl2", "weyl3"], rows)
        write_json(_out(cfg, "equidist.json"),
                   {"a": str(a), "gamma": str(gamma), "eta1": str(e1),
                    "eta2": str(e2), "n_grid": grid,
                    "star_disc": [r[2] for r in rows]})
    else:
        n = _int(opt["n"])
        s = equid_sample(a, gamma, e1, e2, n, cfg.policy)
        if not s.points:
            raise EmptyInput(f"no sample points at n={n}")
        d = star_discrepancy(s.points)
        weyl = {b: weyl_sum(b, s.points) for b in (1, 2, 3)}
        write_csv(_out(cfg, "equidist.csv"), ["frac"],
                  [(p,) for p in s.points])
        write_svg_histogram(_out(cfg, "equidist_hist.svg"), list(s.points),
                            title=f"fractional parts, n={n}")
        write_json(_out(cfg, "equidist.json"),
                   {"a": str(a), "gamma": str(gamma), "eta1": str(e1),
                    "eta2": str(e2), "n": n, "points": s.count,
                    "flagged": len(s.flagged), "star_disc": d,
                    "weyl": {str(k): v for k, v in weyl.items()}})
    if opt.get("band_grid"):
        grid = _int_list(opt["band_grid"])
        band = third_derivative_band(a, gamma, e1, e2, grid)
        write_json(_out(cfg, "band.json"), {
            "sigma1": band.params.sigma1, "sigma2": band.params.sigma2,
            "c1": band.params.c1, "c2": band.params.c2,
            "n0": band.n0, "feasible": band.feasible,
            "violations": list(band.violations),
            "rows": [[r.n, r.m1, r.m2] for r in band.rows]})


def _set_csv(path: str, s) -> None:
    write_csv(path, ["lo", "hi", "left_closed", "right_closed"],
              [(p.lo, p.hi, p.left_closed, p.right_closed) for p in s])


def _run_measure(cfg: RunConfig) -> None:
    opt = cfg.options
    what = opt["what"]
    if what == "sets":
        params = MetricalParams.window(_system_from(opt), _frac(opt["theta1"]),
                                       _frac(opt["theta2"]), _frac(opt["eta"]))
        n = _int(opt["n"])
        e = set_E(n, params)
        f = set_F(n, params, cfg.policy)
        g = set_G(n, params, cfg.policy)
        _set_csv(_out(cfg, "measure_sets_e.csv"), e)
        _set_csv(_out(cfg, "measure_sets_f.csv"), f)
        _set_csv(_out(cfg, "measure_sets_g.csv"), g)
        write_json(_out(cfg, "measure_sets.json"), {
            "n": n, "E": {"components": len(e), "measure": float(e.measure)},
            "F": {"components": len(f), "measure": float(f.measure)},
            "G": {"components": len(g), "measure": float(g.measure)}})
    elif what == "bc":
        params = MetricalParams.window(_system_from(opt), _frac(opt["theta1"]),
                                       _frac(opt["theta2"]), _frac(opt["eta"]))
        st = bc_statistics(params, _int(opt["prime_limit"]), cfg.policy)
        write_csv(_out(cfg, "measure_bc.csv"), ["p", "measure"],
                  [(p, lam) for p, lam in zip(st.primes, st.singles)])
        write_json(_out(cfg, "measure_bc.json"), {
            "prime_limit": st.prime_limit, "primes": list(st.primes),
            "sum_single": float(st.sum_single),
            "sum_pairs": float(st.sum_pairs), "ratio": float(st.ratio),
            "kappa": float(st.kappa), "p0": st.p0})
    elif what == "hsum":
        rep = set_H_sum(_frac(opt["theta3"]), _system_from(opt),
                        _int(opt["n"]), float(opt.get("tol", "1e-4")),
                        cfg.policy)
        write_csv(_out(cfg, "measure_hsum.csv"), ["n", "partial"],
                  list(enumerate(rep.partials, start=1)))
        write_json(_out(cfg, "measure_hsum.json"), {
            "theta3": str(rep.theta3), "a": str(rep.a), "c": str(rep.c),
            "n_max": rep.n_max, "total": rep.total,
            "total_lo": float(rep.total_lo), "total_hi": float(rep.total_hi),
            "cauchy_from": rep.cauchy_from, "tol": rep.tol,
            "tail_bound": rep.tail_bound})
    elif what == "triples":
        e1, e2 = _frac(opt["eta1"]), _frac(opt["eta2"])
        if opt.get("grid"):
            grid = []
            for row in str(opt["grid"]).split(";"):
                if not row.strip():
                    continue
                parts = [t.strip() for t in row.split(",")]
                if len(parts) != 4:
                    raise DomainError("grid rows are 'N,Q,p,L' joined by ';'")
                grid.append((_int(parts[0]), _int(parts[1]), _int(parts[2]),
                             Fraction(parts[3])))
            rep = bound_check_triples(grid, e1, e2)
            write_json(_out(cfg, "measure_triples.json"), {
                "rows": [[r.n_max, r.q_lo, r.p, str(r.l_gap), r.count,
                          r.q_primes] for r in rep.rows],
                "k_unit": float(rep.k_unit), "c_fit": float(rep.c_fit),
                "k_fit": float(rep.k_fit)})
        else:
            cnt = count_triples(_int(opt["n"]), _int(opt["q"]),
                                _int(opt["p"]), _frac(opt["l"]), e1, e2)
            write_json(_out(cfg, "measure_triples.json"), {
                "n": _int(opt["n"]), "q": _int(opt["q"]), "p": _int(opt["p"]),
                "l": str(_frac(opt["l"])), "count": cnt})
    else:
        raise DomainError(f"unknown measure mode {what!r}")


def _run_dichotomy(cfg: RunConfig) -> None:
    opt = cfg.options
    sysm = _system_from(opt)
    thetas = _frac_list(opt["thetas"])
    if not thetas:
        raise EmptyInput("empty theta grid")
    budget = _int(opt["budget"])
    for th in thetas:  # validate the whole grid before any solving
        if th * th == sysm.a:
            raise DomainError(f"theta {th} sits exactly at sqrt(a)")
    bits = (cfg.policy.start_bits, cfg.policy.max_bits)
    jobs = [(sysm.to_json(), str(th), budget, bits) for th in thetas]
    rows = run_sharded(_dicho_shard, jobs, cfg.workers)
    rep = DichotomyReport(sysm, budget, tuple(rows))
    rep.to_csv(_out(cfg, "dichotomy.csv"))
    write_json(_out(cfg, "dichotomy.json"),
               {"system": json.loads(sysm.to_json()), "budget": budget,
                "sides": rep.side_totals()})


def _run_fs3(cfg: RunConfig) -> None:
    opt = cfg.options
    alpha = Exponent.parse(opt["alpha"])
    bound = _int(opt["bound"])
    w = find_fs3(alpha, bound)
    if w is None:
        write_json(_out(cfg, "fs3.json"),
                   {"alpha": str(alpha), "bound": bound, "found": False})
    else:
        write_json(_out(cfg, "fs3.json"),
                   {"alpha": str(alpha), "bound": bound, "found": True,
                    "x": w.x, "z": w.z, "values": list(w.values)})


def _run_xyz(cfg: RunConfig) -> None:
    opt = cfg.options
    alpha = Exponent.parse(opt["alpha"])
    n = _int(opt["n"])
    triples = solve_xyz(alpha, n, cfg.policy)
    write_csv(_out(cfg, "xyz.csv"), ["x", "y", "z"], triples)
    write_json(_out(cfg, "xyz.json"),
               {"alpha": str(alpha), "n": n, "count": len(triples)})


_HANDLERS: dict[str, Callable[[RunConfig], None]] = {
    "gen": _run_gen,
    "member": _run_member,
    "solve-linear": _run_solve_linear,
    "count-fit": _run_count_fit,
    "solve-system": _run_solve_system,
    "cf": _run_cf,
    "equidist": _run_equidist,
    "measure": _run_measure,
    "dichotomy": _run_dichotomy,
    "fs3": _run_fs3,
    "xyz": _run_xyz,
}


# ---------------------------------------------------------------------------
# wiring


def build_parser() -> _Parser:
    top = _Parser(prog="pslab", allow_abbrev=False,
                  description="Batch experiments on floor-power sequences.")
    top.add_argument("--out", default=None,
                     help="output directory (default: $PSLAB_OUT or '.')")
    top.add_argument("--workers", default="1",
                     help="worker processes; results are identical for any count")
    top.add_argument("--config", default=None,
                     help="JSON file whose entries override the flags")
    top.add_argument("--bits-start", default=None,
                     help="starting precision in bits")
    top.add_argument("--bits-max", default=None,
                     help="precision ceiling in bits")
    sub = top.add_subparsers(dest="cmd", required=True)

    def cmd(name, **flags):
        p = sub.add_parser(name, allow_abbrev=False)
        for flag, req in flags.items():
            p.add_argument(f"--{flag.replace('_', '-')}", dest=flag,
                           required=req, default=None)
        return p

    cmd("gen", alpha=True, limit=True)
    cmd("member", alpha=True, m=True)
    cmd("solve-linear", alpha=True, a=True, b=True, n=True)
    cmd("count-fit", alpha=True, a=True, b=True, checkpoints=True)
    p = cmd("solve-system", alpha=False, theta=False, a=True, c=True,
            gamma=True, i_lo=False, i_hi=False, budget=True)
    p.set_defaults(i_lo="0", i_hi="1")
    cmd("cf", target=True, terms=True)
    cmd("equidist", a=True, gamma=True, eta1=True, eta2=True, n=False,
        n_grid=False, band_grid=False)
    p = cmd("measure", what=True, a=True, c=True, gamma=True, i_lo=False,
            i_hi=False, theta1=False, theta2=False, eta=False, theta3=False,
            n=False, prime_limit=False, q=False, p=False, l=False,
            eta1=False, eta2=False, grid=False, tol=False)
    p.set_defaults(i_lo="0", i_hi="1")
    p = cmd("dichotomy", thetas=True, a=True, c=True, gamma=True,
            i_lo=False, i_hi=False, budget=True)
    p.set_defaults(i_lo="0", i_hi="1")
    cmd("fs3", alpha=True, bound=True)
    cmd("xyz", alpha=True, n=True)
    return top


_PLUMBING = {"cmd", "out", "workers", "config", "bits_start", "bits_max"}


def _apply_config(ns: argparse.Namespace) -> None:
    with open(ns.config, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise DomainError("config must be a JSON object")
    for key, val in data.items():
        dest = key.replace("-", "_")
        if not hasattr(ns, dest):
            raise DomainError(f"config key {key!r} unknown for this subcommand")
        if isinstance(val, list):
            val = ",".join(str(v) for v in val)
        setattr(ns, dest, str(val))


def _error_json(exc: Exception) -> None:
    print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
          file=sys.stderr)


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        if ns.config:
            _apply_config(ns)
        outdir = ns.out or os.environ.get("PSLAB_OUT", ".")
        os.makedirs(outdir, exist_ok=True)
        workers = _int(ns.workers)
        if workers < 1:
            raise DomainError("workers must be >= 1")
        if ns.bits_start or ns.bits_max:
            start = _int(ns.bits_start) if ns.bits_start else DEFAULT_POLICY.start_bits
            top = _int(ns.bits_max) if ns.bits_max else DEFAULT_POLICY.max_bits
            policy = PrecisionPolicy(start_bits=start, max_bits=top)
        else:
            policy = DEFAULT_POLICY
        options = {k: v for k, v in vars(ns).items()
                   if k not in _PLUMBING and v is not None}
        cfg = RunConfig(ns.cmd, options, outdir, workers, policy)
        _HANDLERS[ns.cmd](cfg)
        return 0
    except PrecisionExhausted as exc:
        _error_json(exc)
        return 3
    except KeyError as exc:
        _error_json(DomainError(f"missing parameter: {exc.args[0]}"))
        return 2
    except (PslabError, ValueError, OSError) as exc:
        _error_json(exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
