"""Command-line interface.

Exit codes: 0 success, 2 validation failure, 3 search budget exceeded.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from typing import List, Optional

import numpy as np

from . import blocks as blk
from .certify import certify_contrast, certify_estimation
from .criteria import eigenvalues, parse_criterion
from .design import contrast_info, design_info, lift_to_ternary, signed_info
from .errors import CapExceeded, DesignError
from .records import DesignRecord, read_records, table1_records, write_records
from .search import canonical_design, default_cap, exhaustive_best
from .sequences import (
    BinaryDesign,
    default_m_sequence,
    insert_zeros,
    m_sequence,
    paley_hadamard_sequence,
    taps_from_exponents,
)
from .simulate import GroundTruth, NoiseSpec, monte_carlo, theoretical_covariance


def _jsonable(x):
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, np.generic):
        return _jsonable(x.item())
    return x


def _emit(obj, out) -> None:
    obj = {"schema": 1, **obj}
    out.write(json.dumps(_jsonable(obj), sort_keys=True, indent=2, ensure_ascii=False) + "\n")


def _parse_taps(text: str, degree: int) -> int:
    if "," in text:
        return taps_from_exponents(int(e) for e in text.split(","))
    return int(text, 0)


def _source_design(args) -> BinaryDesign:
    if args.design:
        return _single(args.design).to_binary()
    if args.source == "paley":
        if args.n is None:
            raise DesignError("--n is required for a Paley sequence")
        return paley_hadamard_sequence(args.n)
    if args.source == "mseq":
        if args.degree is None:
            raise DesignError("--degree is required for an m-sequence")
        if args.taps is None:
            return default_m_sequence(args.degree)
        return m_sequence(args.degree, _parse_taps(args.taps, args.degree), args.seed)
    raise DesignError(f"unknown source {args.source!r}")


def _single(path) -> DesignRecord:
    recs = read_records(path)
    return recs[0]


def cmd_construct(args, out) -> int:
    method = args.method
    if method == "paley":
        args.source = "paley"
        d = _source_design(args)
        rec_name, params = "paley", {"N": d.N}
    elif method == "mseq":
        args.source = "mseq"
        d = _source_design(args)
        rec_name, params = "mseq", {k: d.meta[k] for k in ("degree", "taps", "seed")}
    elif method in ("insert1", "insert2"):
        parent = _source_design(args)
        d = insert_zeros(parent, 1 if method == "insert1" else 2)
        rec_name, params = method, {"from": args.source if not args.design else "file", "source_N": parent.N}
    elif method == "contrast_lift":
        parent = _source_design(args)
        u = lift_to_ternary(parent, args.variant)
        if args.canonical:
            u = np.array(canonical_design(u, "ternary_two_stim"))
        rec = DesignRecord.from_ternary(u, "contrast_lift", variant=args.variant, source_N=parent.N)
        write_records([rec], out)
        return 0
    else:
        raise DesignError(f"unknown construction {method!r}")
    if args.canonical:
        d = d.canonical()
    rec = DesignRecord.from_binary(d, rec_name, **params)
    write_records([rec], out)
    return 0


def _criteria(args) -> List[str]:
    names = [c for c in (args.criterion or "phi0,phi1,phiinf").split(",") if c]
    for p in args.p or []:
        names.append(f"phi{p}")
    return names


def cmd_evaluate(args, out) -> int:
    rec = _single(args.design)
    K = args.k
    if not 1 <= K <= rec.N:
        raise DesignError(f"K must satisfy 1 <= K <= N (got K={K}, N={rec.N})")
    report = {"N": rec.N, "K": K, "alphabet": rec.alphabet}
    if rec.alphabet == "binary":
        S = signed_info(rec.values(), K)
        M = S.matrix
        report["information"] = "signed M_b(X_d~) = 4 M_b(X_d)"
        report["scaled_Mb_signed"] = S.scaled.tolist()
        report["scaled_Mb_binary"] = design_info(rec.values(), K).scaled.tolist()
        report["divisor"] = S.divisor
    else:
        M = contrast_info(rec.values(), K)
        report["information"] = "contrast M_u"
        report["Mu"] = M.tolist()
    lam = eigenvalues(M)
    report["spectrum"] = lam.tolist()
    values = {}
    for name in _criteria(args):
        spec = parse_criterion(name)
        v = spec.from_spectrum(lam)
        entry = {"value": v}
        if spec.kind == "phi_p" and spec.p == 1:
            entry["raw_trace"] = v * K if math.isfinite(v) else v
            entry["convention"] = "phi_1 = tr(M^-1)/K"
        values[spec.label] = entry
    report["criteria"] = values
    _emit(report, out)
    return 0


def cmd_certify(args, out) -> int:
    rec = _single(args.design)
    if rec.alphabet == "binary":
        cert = certify_estimation(rec.to_binary(), args.k, args.p_cap)
    else:
        cert = certify_contrast(rec.values(), args.k, args.p_cap)
    if args.format == "text":
        out.write(cert.summary() + "\n")
    else:
        _emit(cert.to_dict(), out)
    return 0


def cmd_search(args, out) -> int:
    spec = parse_criterion(args.criterion if args.p is None else f"phi{args.p}")
    cap = args.cap if args.cap is not None else default_cap()
    report = exhaustive_best(args.space, args.n, args.k, spec, not args.no_reduce, cap, args.threads)
    _emit(report.to_dict(), out)
    return 0


def cmd_simulate(args, out) -> int:
    rec = _single(args.design)
    K = args.k
    objective = "estimate_hrf" if rec.alphabet == "binary" else "contrast"
    if args.noise == "iid":
        noise = NoiseSpec("iid", args.sigma2)
    else:
        noise = NoiseSpec.compound(rec.N, args.sigma2, args.alpha)
    if objective == "estimate_hrf":
        truth = GroundTruth(0.0, h=np.ones(K))
    else:
        truth = GroundTruth(0.0, h1=np.ones(K), h2=np.zeros(K))
    res = monte_carlo(rec.values(), truth, noise, args.replicates, args.seed, objective, args.threads)
    theory = theoretical_covariance(rec.values(), K, noise, objective)
    rel = np.abs(res.covariance - theory) / np.abs(theory)
    diag = np.diag(rel)
    off = rel[~np.eye(K, dtype=bool)] if K > 1 else np.zeros(0)
    _emit({
        "N": rec.N, "K": K, "objective": objective, "noise": args.noise, "seed": args.seed,
        "replicates": res.replicates,
        "mean": res.mean.tolist(), "truth": res.truth.tolist(),
        "empirical_cov": res.covariance.tolist(), "theoretical_cov": theory.tolist(),
        "max_rel_err_diag": float(diag.max()),
        "max_rel_err_offdiag": float(off.max()) if off.size else 0.0,
    }, out)
    return 0


def cmd_blocks(args, out) -> int:
    res = blk.min_block_trace(args.n, args.k)
    rows = [
        {
            "partition": list(p.sizes),
            "first": blk.block_trace_inverse(args.n, p, "first"),
            "second": blk.block_trace_inverse(args.n, p, "second"),
        }
        for p, _ in res.ranking
    ]
    _emit({
        "N": args.n, "K": args.k,
        "minimizer": list(res.best.sizes), "value": res.value,
        "n0": res.n0, "bound_applies": res.bound_applies,
        "two_contiguous_sizes": res.two_contiguous_sizes,
        "ranking": rows, "notes": res.notes,
    }, out)
    return 0


def cmd_table1(args, out) -> int:
    dh_rec, d1_rec = table1_records()
    dh = paley_hadamard_sequence(151)
    d1 = insert_zeros(paley_hadamard_sequence(131), 1)
    golden1 = d1_rec.to_binary()
    report = {
        "d_H_151_exact": str(dh) == dh_rec.sequence,
        "d_1gH_132_up_to_rotation": d1.canonical().bits == golden1.canonical().bits,
    }
    _emit(report, out)
    return 0 if all(report.values()) else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="circdesign", description="Optimal circulant fMRI designs")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("construct", help="build a named design")
    c.add_argument("method", choices=["paley", "mseq", "insert1", "insert2", "contrast_lift"])
    c.add_argument("--n", type=int)
    c.add_argument("--degree", type=int)
    c.add_argument("--taps", help="polynomial exponents, e.g. 5,2,0, or a bit mask")
    c.add_argument("--seed", type=int, default=1, help="LFSR initial state")
    c.add_argument("--from", dest="source", choices=["paley", "mseq"], default="paley")
    c.add_argument("--design", help="read the parent design from a record file")
    c.add_argument("--variant", choices=["j+d", "2j-d"], default="j+d")
    c.add_argument("--canonical", action="store_true", help="rotate to the lexicographic minimum")
    c.add_argument("--out")
    c.set_defaults(func=cmd_construct)

    e = sub.add_parser("evaluate", help="criterion values of a design")
    e.add_argument("--design", required=True)
    e.add_argument("--k", type=int, required=True)
    e.add_argument("--criterion", help="comma list: phi0,phi1,phi2,phiinf,A,D,E,inv,neglog")
    e.add_argument("--p", type=float, action="append")
    e.add_argument("--out")
    e.set_defaults(func=cmd_evaluate)

    ce = sub.add_parser("certify", help="structural optimality certificate")
    ce.add_argument("--design", required=True)
    ce.add_argument("--k", type=int, required=True)
    ce.add_argument("--p-cap", type=float, default=1.0)
    ce.add_argument("--format", choices=["json", "text"], default="json")
    ce.add_argument("--out")
    ce.set_defaults(func=cmd_certify)

    s = sub.add_parser("search", help="exhaustive search at small N")
    s.add_argument("--space", choices=["binary", "signed", "ternary_two_stim"], default="binary")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--criterion", default="phi1")
    s.add_argument("--p", type=float)
    s.add_argument("--cap", type=int, help="evaluation budget (default $CIRCDESIGN_CAP or 2^24)")
    s.add_argument("--threads", type=int, default=1)
    s.add_argument("--no-reduce", action="store_true", help="skip symmetry reduction")
    s.add_argument("--out")
    s.set_defaults(func=cmd_search)

    m = sub.add_parser("simulate", help="Monte-Carlo estimator covariance")
    m.add_argument("--design", required=True)
    m.add_argument("--k", type=int, required=True)
    m.add_argument("--replicates", type=int, default=10_000)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--noise", choices=["iid", "compound"], default="iid")
    m.add_argument("--sigma2", type=float, default=1.0)
    m.add_argument("--alpha", type=float, default=1.0)
    m.add_argument("--threads", type=int, default=1)
    m.add_argument("--out")
    m.set_defaults(func=cmd_simulate)

    b = sub.add_parser("blocks", help="block-matrix trace ranking")
    b.add_argument("--n", type=int, required=True)
    b.add_argument("--k", type=int, required=True)
    b.add_argument("--out")
    b.set_defaults(func=cmd_blocks)

    t = sub.add_parser("table1", help="check the published designs against the constructions")
    t.add_argument("--out")
    t.set_defaults(func=cmd_table1)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out = open(args.out, "w", encoding="utf-8") if getattr(args, "out", None) else sys.stdout
    try:
        return args.func(args, out)
    except CapExceeded as exc:
        sys.stderr.write(json.dumps({"error": "cap_exceeded", "required": exc.required, "cap": exc.cap}) + "\n")
        return 3
    except (DesignError, ValueError) as exc:
        sys.stderr.write(json.dumps({"error": "validation", "message": str(exc)}, ensure_ascii=False) + "\n")
        return 2
    finally:
        if out is not sys.stdout:
            out.close()


if __name__ == "__main__":
    sys.exit(main())
