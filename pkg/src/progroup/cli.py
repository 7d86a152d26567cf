"""Command-line interface.

Exit status: 0 success, 1 usage or input error, 2 a computational bound was
exceeded, 3 an internal consistency check failed.  Output is JSON (big
integers and rationals as decimal strings) or, where rows make sense, CSV.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .errors import BoundExceeded, ConsistencyError, InputError

EXIT_OK, EXIT_INPUT, EXIT_BOUND, EXIT_INTERNAL = 0, 1, 2, 3


def frac_json(q: Fraction) -> dict:
    q = Fraction(q)
    return {"num": str(q.numerator), "den": str(q.denominator)}


@dataclass
class RunConfig:
    command: str
    options: dict = field(default_factory=dict)
    fmt: str = "json"
    output: Optional[str] = None
    catalog: Optional[str] = None

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        return cls(**json.loads(text))

    @classmethod
    def from_namespace(cls, ns: argparse.Namespace) -> "RunConfig":
        opts = {k: v for k, v in vars(ns).items()
                if k not in ("command", "format", "output", "catalog")}
        return cls(ns.command, opts, ns.format, ns.output, ns.catalog)


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's 2
        raise InputError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["json", "csv"], default="json",
                        help="output format (default: json)")
    common.add_argument("--output", default=None, help="write to this file instead of stdout")
    common.add_argument("--catalog", default=None,
                        help="JSON group catalog (default: $PROGROUP_CATALOG, else built-ins only)")

    ap = _Parser(prog="progroup", description="Random groups with pro-S presentations.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help_):
        return sub.add_parser(name, help=help_, parents=[common])

    def set_arg(p, required=True):
        p.add_argument("--set", dest="set", required=required,
                       help="comma-separated group names, or order<=L (L <= 15)")

    p = add("complete", "order and degree of the completion C_n")
    set_arg(p)
    p.add_argument("--n", type=int, required=True)

    p = add("measure", "mu_un and mu_u of one group H")
    set_arg(p)
    p.add_argument("--H", dest="H", required=True)
    p.add_argument("--n", type=int, default=None, help="free rank (default: d(H), at least 1)")
    p.add_argument("--u", type=int, default=0)

    p = add("table", "exact distribution of the quotient at (n, u)")
    set_arg(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--u", type=int, default=0)

    p = add("sample", "Monte Carlo sample of the random quotient")
    set_arg(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--u", type=int, default=0)
    p.add_argument("--count", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--model", choices=["haar", "words"], default="haar")
    p.add_argument("--len", dest="length", type=int, default=10, help="word length bound (words model)")
    p.add_argument("--reduced", action="store_true", help="draw reduced words (words model)")
    p.add_argument("--index-bound", type=int, default=None)
    p.add_argument("--compare", action="store_true", help="compare against the exact table")
    p.add_argument("--timing", action="store_true", help="include runtime in the report")

    p = add("cokernel", "cokernel partitions of random matrices over Z/p^j")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--j", type=int, default=1)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--u", type=int, default=0)
    p.add_argument("--count", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--timing", action="store_true")

    p = add("special", "closed-form measures for infinite S")
    p.add_argument("kind", choices=["trivial", "abelian", "pro-p"])
    p.add_argument("--u", type=int, required=True)
    p.add_argument("--prime-cutoff", type=int, default=10 ** 5)
    p.add_argument("--simple-cutoff", type=int, default=10 ** 6)
    p.add_argument("--simple-table", default=None, help="CSV order,name,aut_order")
    p.add_argument("--simple-complete-through", type=int, default=None)
    p.add_argument("--type", dest="types", action="append", default=[],
                   help="abelian: p:e1,e2,...[:rank], repeatable")
    p.add_argument("--primes", default=None, help="abelian: restrict to these primes (comma list)")
    p.add_argument("--p", type=int, default=None, help="pro-p: the prime")
    p.add_argument("--d", type=int, default=None, help="pro-p: generator rank")
    p.add_argument("--r", type=int, default=None, help="pro-p: relation rank")
    p.add_argument("--aut", type=int, default=None, help="pro-p: |Aut(H)|")
    p.add_argument("--order", type=int, default=None, help="pro-p: |H|")

    p = add("cf", "chief factor pairs of the closure of S")
    set_arg(p)

    p = add("extensions", "H-extensions with a given kernel")
    p.add_argument("--H", dest="H", required=True)
    p.add_argument("--kernel", required=True,
                   help="p:d for irreducible F_p-modules of dimension d, or a nonabelian simple group name")
    p.add_argument("--power", type=int, default=1, help="largest power j of a nonabelian kernel")
    set_arg(p, required=False)

    p = add("achievable", "is H achievable with d(H) generators and d(H)+u relations")
    set_arg(p)
    p.add_argument("--H", dest="H", required=True)
    p.add_argument("--u", type=int, default=0)

    p = add("catalog", "list or validate groups")
    p.add_argument("--validate", default=None, help="catalog file to validate")
    return ap


# ---------------------------------------------------------------------------
# handlers
# ---------------------------------------------------------------------------


def _catalog(cfg: RunConfig):
    from .catalog import Catalog
    return Catalog.default(cfg.catalog)


def _set(cfg: RunConfig):
    return _catalog(cfg).resolve_set(cfg.options["set"])


def _names(S) -> list:
    from .measure import group_name
    return [group_name(G) for G in S]


def cmd_complete(cfg: RunConfig):
    from .completion import cached_completion
    S = _set(cfg)
    n = cfg.options["n"]
    C = cached_completion(n, S)
    out = {"n": n, "set": _names(S), "order": str(C.order()), "degree": C.degree}
    return out, [out]


def cmd_measure(cfg: RunConfig):
    from . import intervals as I
    from .measure import engine_for, group_name
    from .smallgroup import rank

    S = _set(cfg)
    H = _catalog(cfg).group(cfg.options["H"])
    u = cfg.options["u"]
    n = cfg.options["n"] if cfg.options["n"] is not None else max(rank(H), 1)
    eng = engine_for(S)
    finite = eng.mu_un(H, n, u)
    limit = eng.mu_u(H, u)
    factors = []
    if eng.is_level(H):
        for G in eng.kernels(H):
            lv = eng.lam(H, G)
            factors.append({"kernel": G.describe(), "m": eng.multiplicity(n, H, G),
                            "lambda": frac_json(lv.value), "cross_checked": lv.cross_checked})
    lo, hi = limit.bounds
    mu_u = {"lo": I.decimal_floor(lo, 30), "hi": I.decimal_ceil(hi, 30)}
    out = {"H": group_name(H), "set": _names(S), "n": n, "u": u,
           "mu_un": frac_json(finite.exact), "mu_u": mu_u,
           "complete": finite.complete and limit.complete, "factors": factors}
    row = {"H": out["H"], "n": n, "u": u, "mu_un_num": out["mu_un"]["num"],
           "mu_un_den": out["mu_un"]["den"], "mu_u_lo": mu_u["lo"], "mu_u_hi": mu_u["hi"]}
    return out, [row]


def cmd_table(cfg: RunConfig):
    from .measure import distribution_table, group_name
    S = _set(cfg)
    n, u = cfg.options["n"], cfg.options["u"]
    tab = distribution_table(S, n, u)
    classes = [{"H": group_name(H), "order": str(H.order), "mu_un": frac_json(v.exact)}
               for H, v in tab.rows]
    total = sum((v.exact for _, v in tab.rows), Fraction(0))
    out = {"set": _names(S), "n": n, "u": u, "complete": tab.complete, "classes": classes,
           "sum": frac_json(total), "residual": frac_json(tab.residual)}
    rows = [{"H": c["H"], "order": c["order"], "num": c["mu_un"]["num"], "den": c["mu_un"]["den"]}
            for c in classes]
    return out, rows


def _report_rows(report) -> list:
    rows = [{"class": k, "count": v} for k, v in report.class_counts.items()]
    if report.oversize:
        rows.append({"class": "<oversize>", "count": report.oversize})
    return rows


def cmd_sample(cfg: RunConfig):
    from .measure import distribution_table
    from .sampler import compare, sample_haar, sample_words
    o = cfg.options
    S = _set(cfg)
    if o["model"] == "haar":
        rep = sample_haar(S, o["n"], o["u"], o["count"], o["seed"], o["workers"], o["index_bound"])
    else:
        rep = sample_words(S, o["n"], o["u"], o["length"], o["count"], o["seed"], o["workers"],
                           o["reduced"], o["index_bound"])
    out = rep.to_json(with_runtime=o["timing"])
    if o["compare"]:
        tab = distribution_table(S, o["n"], o["u"])
        cmp = compare(rep, tab.as_dict(), tab.residual)
        out["comparison"] = cmp.to_json()
    return out, _report_rows(rep)


def cmd_cokernel(cfg: RunConfig):
    from .sampler import sample_cokernel
    o = cfg.options
    rep = sample_cokernel(o["p"], o["j"], o["n"], o["u"], o["count"], o["seed"], o["workers"])
    return rep.to_json(with_runtime=o["timing"]), _report_rows(rep)


def _parse_type(text: str):
    from .special import AbelianPType
    parts = text.split(":")
    if len(parts) not in (2, 3):
        raise InputError(f"bad --type '{text}': expected p:e1,e2,...[:rank]")
    try:
        p = int(parts[0])
        exps = tuple(int(x) for x in parts[1].split(",") if x.strip())
        r = int(parts[2]) if len(parts) == 3 else 0
    except ValueError:
        raise InputError(f"bad --type '{text}'") from None
    return AbelianPType(p, exps, r)


def cmd_special(cfg: RunConfig):
    from . import special as SP
    o = cfg.options
    kind = o["kind"]
    if kind == "trivial":
        table = None
        if o["simple_table"]:
            table = SP.load_simple_groups(o["simple_table"], o["simple_complete_through"])
        val = SP.trivial_measure(o["u"], o["prime_cutoff"], o["simple_cutoff"], table)
    elif kind == "abelian":
        types = {}
        for t in o["types"]:
            at = _parse_type(t)
            if at.p in types:
                raise InputError(f"prime {at.p} given twice")
            types[at.p] = at
        primes = None
        if o["primes"]:
            primes = [int(x) for x in o["primes"].split(",") if x.strip()]
        val = SP.abelian_measure(types, o["u"], primes, o["prime_cutoff"])
    else:
        missing = [k for k in ("p", "d", "r", "aut", "order") if o[k] is None]
        if missing:
            raise InputError("pro-p needs --" + ", --".join(missing))
        val = SP.pro_p_measure(o["p"], o["d"], o["r"], o["u"], o["aut"], o["order"])
    out = {"kind": kind, "u": o["u"], "value": val.to_json()}
    row = {"kind": kind, "u": o["u"]}
    row.update({k: v for k, v in val.to_json().get("interval", {}).items()})
    if "exact" in out["value"]:
        row.update({"num": out["value"]["exact"]["num"], "den": out["value"]["exact"]["den"]})
    return out, [row]


def cmd_cf(cfg: RunConfig):
    from .catalog import identify
    from .chief import cf_of_set
    S = _set(cfg)
    pairs = []
    for pr in cf_of_set(S):
        pairs.append({"M": identify(pr.M), "M_order": str(pr.M.order), "A": identify(pr.A),
                      "A_order": str(pr.A.order), "abelian": pr.abelian})
    pairs.sort(key=lambda d: (int(d["M_order"]), d["M"], int(d["A_order"]), d["A"]))
    return {"set": _names(S), "pairs": pairs}, pairs


def cmd_extensions(cfg: RunConfig):
    from .catalog import identify
    from .extensions import (enumerate_abelian_extensions, enumerate_nonabelian_extensions,
                             irreducible_H_modules)
    o = cfg.options
    cat = _catalog(cfg)
    H = cat.group(o["H"])
    S = cat.resolve_set(o["set"]) if o["set"] else None
    spec = o["kernel"]
    runs = []
    if ":" in spec:
        try:
            p, d = (int(x) for x in spec.split(":"))
        except ValueError:
            raise InputError(f"bad kernel '{spec}': expected p:d") from None
        from .special import is_prime
        if not is_prime(p) or d < 1:
            raise InputError(f"bad kernel '{spec}'")
        for G in irreducible_H_modules(H, p, d):
            if G.dim == d:
                runs.append((G.describe(), enumerate_abelian_extensions(H, G, S)))
    else:
        gamma = cat.group(spec)
        runs.append((f"{spec}^j, j <= {o['power']}", enumerate_nonabelian_extensions(H, gamma, o["power"], S)))
    items, rows = [], []
    for kernel, res in runs:
        for ext in res:
            row = {"kernel": kernel, "E": identify(ext.E), "order": str(ext.E.order),
                   "aut_H": str(ext.aut_H), "split": ext.is_split()}
            if S is not None:
                row["level"] = ext.is_level(S)
            rows.append(row)
        items.append({"kernel": kernel, "complete": res.complete,
                      "extensions": [r for r in rows if r["kernel"] == kernel],
                      "unexplored": list(res.unexplored), "notes": list(res.notes)})
    return {"H": identify(H), "set": _names(S) if S else None, "results": items}, rows


def cmd_achievable(cfg: RunConfig):
    from .measure import engine_for, group_name
    S = _set(cfg)
    H = _catalog(cfg).group(cfg.options["H"])
    u = cfg.options["u"]
    ok = engine_for(S).achievable(H, u)
    out = {"H": group_name(H), "set": _names(S), "u": u, "achievable": ok}
    return out, [out]


def cmd_catalog(cfg: RunConfig):
    from .catalog import parse_catalog
    if cfg.options["validate"]:
        entries = parse_catalog(cfg.options["validate"])
        rows = [{"name": e.name, "degree": e.degree, "order": str(e.finite_group().order())}
                for e in entries]
        return {"valid": True, "groups": rows}, rows
    cat = _catalog(cfg)
    rows = []
    for name, e in cat.entries.items():
        rows.append({"name": name, "degree": e.degree, "order": str(e.finite_group().order())})
    return {"groups": rows}, rows


HANDLERS = {
    "complete": cmd_complete, "measure": cmd_measure, "table": cmd_table, "sample": cmd_sample,
    "cokernel": cmd_cokernel, "special": cmd_special, "cf": cmd_cf, "extensions": cmd_extensions,
    "achievable": cmd_achievable, "catalog": cmd_catalog,
}


def _to_csv(rows: list) -> str:
    buf = io.StringIO()
    if rows:
        keys = list(rows[0].keys())
        for r in rows[1:]:
            keys += [k for k in r if k not in keys]
        w = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow(r)
    return buf.getvalue()


def run(cfg: RunConfig) -> str:
    """Execute a configuration and return the rendered output."""
    handler = HANDLERS.get(cfg.command)
    if handler is None:
        raise InputError(f"unknown subcommand '{cfg.command}'")
    doc, rows = handler(cfg)
    if cfg.fmt == "csv":
        return _to_csv(rows)
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        ns = build_parser().parse_args(argv)
        cfg = RunConfig.from_namespace(ns)
        text = run(cfg)
        if cfg.output:
            with open(cfg.output, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        return EXIT_OK
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except BoundExceeded as exc:
        print(f"bound exceeded: {exc}", file=sys.stderr)
        return EXIT_BOUND
    except ConsistencyError as exc:
        print(f"internal check failed: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
