"""twistlab command line.

Exit status: 0 on success, 1 when a verification check fails, 2 on usage or
hypothesis errors.  Errors are reported on stderr as a JSON envelope
``{"code", "message", "clause"}``.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import shutil
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import census as census_mod
from . import verify
from .curve import (
    CurveProfile,
    WeierstrassCurve,
    build_profile,
    greenberg_criterion_partial,
)
from .errors import NotFound, TwistlabError
from .lmfdb import fetch_curve
from .twist import certify, classify_prime, construct_d_with_lambda, matsuno_lambda

log = logging.getLogger("twistlab")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(TwistlabError):
    code = "UsageError"


@dataclass
class RunConfig:
    label: str | None = None
    curve_file: Path | None = None
    mu2: int | None = None
    lambda2: int | None = None
    root_number: int | None = None
    limit: int | None = None
    targets: list[int] = field(default_factory=list)
    fmt: str = "table"
    offline: bool = False
    workers: int = 1
    out: Path | None = None

    def __post_init__(self):
        if (self.label is None) == (self.curve_file is None):
            raise UsageError("exactly one of --label and --curve-file is required", clause="one curve source")

    def profile(self) -> CurveProfile:
        if self.label is not None:
            rec = fetch_curve(self.label, offline=self.offline)
            ainvs, label = rec.a_invariants, rec.label
            base = {"mu2": rec.mu2, "lambda2": rec.lambda2, "root_number": rec.root_number, "rank": rec.rank}
        else:
            try:
                doc = json.loads(Path(self.curve_file).read_text(encoding="utf-8"))
                ainvs = [int(a) for a in doc["a_invariants"]]
            except FileNotFoundError as exc:
                raise NotFound(f"curve file {self.curve_file} not found") from exc
            except (ValueError, KeyError, TypeError) as exc:
                raise UsageError(f"bad curve file {self.curve_file}: {exc}", clause="curve file format") from exc
            label = doc.get("label")
            base = {k: doc.get(k) for k in ("mu2", "lambda2", "root_number", "rank")}
        for k in ("mu2", "lambda2", "root_number"):
            if getattr(self, k) is not None:
                base[k] = getattr(self, k)
        return build_profile(WeierstrassCurve.from_ainvs(ainvs), label=label, **base)


# --- output --------------------------------------------------------------------

def emit(rows: list[dict], fmt: str, stream=None) -> None:
    stream = stream or sys.stdout
    if fmt == "json":
        json.dump(rows if len(rows) != 1 else rows[0], stream, indent=2, sort_keys=True, default=str)
        stream.write("\n")
    elif fmt == "csv":
        w = csv.DictWriter(stream, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    else:
        for i, row in enumerate(rows):
            if i:
                stream.write("\n")
            width = max(len(k) for k in row)
            for k, v in row.items():
                stream.write(f"{k.ljust(width)}  {v}\n")


def _sign(v: int | None) -> str:
    return "unknown" if v is None else f"{v:+d}"


# --- commands ------------------------------------------------------------------

def cmd_analyze(cfg: RunConfig, args) -> int:
    P = cfg.profile()
    img = P.mod2_image
    row = {
        "curve": P.name,
        "a_invariants": list(P.curve.ainvs),
        "conductor": P.conductor,
        "bad primes": ", ".join(f"{ld.p} {ld.reduction.value}" for ld in P.local),
        "root number": _sign(P.root_number),
        "ordinary at 2": P.ordinary_at_2,
        "E(Q)[2]": "nontrivial" if P.two_torsion_rational else "trivial",
        "mod-2 image": img.value,
        "predicted density(Omega)": str(img.omega_density),
        "cm": P.cm,
        "mu2": P.mu2,
        "lambda2": P.lambda2,
    }
    if P.computed_root_number != P.root_number:
        row["computed root number"] = _sign(P.computed_root_number)
    if P.two_torsion_rational:
        row["note"] = "E(Q)[2] != 0; all good primes in Omega"
    if P.ordinary_at_2:
        g = greenberg_criterion_partial(P)
        row["#E(F_2)"] = g.points_mod_2
        row["tamagawa"] = ", ".join(f"c_{p}={c}" for p, c in sorted(g.tamagawa.items()))
        row["greenberg (p=2)"] = (
            f"#E(F_2) odd: {g.points_mod_2_odd}; all c_l odd: {g.tamagawa_odd}; Selmer condition {g.selmer_condition}"
        )
    if cfg.fmt == "table":
        print(f"mod-2 image: {img.value}; predicted density(Omega)={img.omega_density}; omega={_sign(P.root_number)}")
    emit([row], cfg.fmt)
    return EXIT_OK


def cmd_classify_prime(cfg: RunConfig, args) -> int:
    P = cfg.profile()
    pc = classify_prime(P, args.ell)
    row = {
        "ell": pc.ell,
        "mod4": pc.residue_mod4,
        "mod8": pc.residue_mod8,
        "in_omega": pc.in_omega,
        "n_ell": pc.n_ell,
        "chi(-N)": pc.chi_minus_N,
        "decomposition in K": "split" if pc.split_in_K else "inert",
        "splits in F": pc.splits_fully_F,
        "in_M": pc.in_M,
        "in_P": pc.in_P,
        "in_Q": pc.in_Q_construct,
        "lambda weight": pc.lambda_weight,
    }
    emit([row], cfg.fmt)
    return EXIT_OK


def cmd_twist(cfg: RunConfig, args) -> int:
    P = cfg.profile()
    cert = certify(P, args.d)
    d = cert.as_dict()
    row = {
        "d": d["d"],
        "factors": " * ".join(map(str, d["factors"])) or "1",
        "lambda2_twist": d["lambda2_twist"],
        "omega_twist": _sign(d["omega_twist"]),
        "parity": d["corank_parity"],
        "conclusion": "; ".join(d["conclusions"]),
        "rank_note": d["rank_note"],
    }
    emit([row] if cfg.fmt != "json" else [d], cfg.fmt)
    return EXIT_OK


def cmd_construct(cfg: RunConfig, args) -> int:
    P = cfg.profile()
    d = construct_d_with_lambda(P, args.lam, pool_limit=args.pool_limit)
    row = {"target": args.lam, "d": d.value, "factors": " * ".join(map(str, d.factors)) or "1",
           "lambda2_twist": matsuno_lambda(P, d)}
    emit([row], cfg.fmt)
    return EXIT_OK


def _write_census(P: CurveProfile, cfg: RunConfig, out: Path) -> census_mod.CensusReport:
    X = cfg.limit
    with open(out / "primes.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["ell", "mod8", "chi", "in_omega", "n_ell", "in_M", "in_P"])
        census_mod.prime_census(P, min(X, census_mod.PRIME_CAP), workers=cfg.workers,
                                row_sink=lambda t: w.writerows(census_mod.prime_rows(t)))
    with open(out / "twists.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["d", "lambda_twist", "omega_twist", "conclusion"])
        report = census_mod.squarefree_census(P, X, cfg.targets, workers=cfg.workers, row_sink=w.writerows)
    (out / "report.json").write_text(report.to_json() + "\n", encoding="utf-8")
    with open(out / "ratio.tsv", "w") as fh:
        fh.write("# series\talpha\tX\tcount\tratio\n")
        for name, fit in sorted(report.fit.items()):
            counts = dict(report.series[name])
            alpha = fit.get("alpha_expected")
            for x, r in fit.get("ratio_series", []):
                fh.write(f"{name}\t{alpha}\t{x}\t{counts[x]}\t{r:.8g}\n")
            fh.write("\n\n")
    return report


def cmd_census(cfg: RunConfig, args) -> int:
    P = cfg.profile()
    cfg.limit = args.limit
    cfg.targets = args.targets
    out = Path(cfg.out or f"census-{P.name}-{cfg.limit}")
    existed = out.exists()
    out.mkdir(parents=True, exist_ok=True)
    names = ("primes.csv", "twists.csv", "report.json", "ratio.tsv")
    try:
        report = _write_census(P, cfg, out)
    except BaseException:
        for n in names:
            (out / n).unlink(missing_ok=True)
        if not existed:
            shutil.rmtree(out, ignore_errors=True)
        raise
    dens = report.prime_counts["densities"]
    row = {
        "curve": P.name,
        "X": report.X,
        "population": report.population,
        **{f"density({k})": f"{v:.5f}" for k, v in dens.items()},
        "n_prime_1": report.n_prime_1,
        "n_E1_lower": report.n_E1_lower,
        "n_Omega": report.n_Omega,
        "m_EN": ", ".join(f"{k}:{v}" for k, v in sorted(report.m_EN.items()) if not cfg.targets or k in cfg.targets),
    }
    for name, fit in sorted(report.fit.items()):
        if "exponent_hat" in fit:
            row[f"exponent({name})"] = f"{fit['exponent_hat']:.4f} (expected {fit['alpha_expected']})"
    row["output"] = str(out)
    emit([row], cfg.fmt)
    return EXIT_OK


def cmd_verify_paper(args) -> int:
    checks = verify.run_checks(args.fixtures, prime_limit=args.prime_limit, sf_limit=args.limit,
                               workers=args.workers)
    if args.format == "json":
        print(verify.summary_json(checks))
    else:
        for c in checks:
            print(c.line())
    status = verify.exit_status(checks)
    failed = [c.name for c in checks if c.verdict == verify.FAIL]
    if failed:
        print("failed checks: " + ", ".join(failed), file=sys.stderr)
    return status


# --- parser --------------------------------------------------------------------

def _targets(s: str) -> list[int]:
    try:
        return [int(t) for t in s.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad target list {s!r}") from exc


def _root(s: str) -> int:
    v = int(s)
    if v not in (1, -1):
        raise argparse.ArgumentTypeError("root number must be +1 or -1")
    return v


def _global_flags(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = argparse.SUPPRESS if suppress else None
    src = p.add_mutually_exclusive_group()
    src.add_argument("--label", default=d, help="Cremona or LMFDB curve label")
    src.add_argument("--curve-file", type=Path, default=d, help="JSON file with a_invariants and optional overrides")
    p.add_argument("--offline", action="store_true", default=d, help="fixtures and cache only")
    p.add_argument("--format", choices=("table", "csv", "json"), default=d if suppress else "table")
    p.add_argument("--workers", type=int, default=d if suppress else census_mod.default_workers())
    p.add_argument("--out", type=Path, default=d, help="output directory for census files")
    p.add_argument("--mu2", type=int, default=d)
    p.add_argument("--lambda2", type=int, default=d)
    p.add_argument("--root-number", type=_root, default=d)
    p.add_argument("-v", "--verbose", action="store_true", default=d)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="twistlab", description="2-adic lambda-invariants of quadratic twists")
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help):
        sp = sub.add_parser(name, help=help)
        _global_flags(sp, suppress=True)
        return sp

    add("analyze", "curve invariants, mod-2 image and partial Greenberg report")
    sp = add("classify-prime", "membership of a prime in Omega, M, P and Q")
    sp.add_argument("--ell", type=int, required=True)
    sp = add("twist", "corank certificate for the twist by d")
    sp.add_argument("--d", type=int, required=True)
    sp = add("census", "prime and squarefree sweeps with fits")
    sp.add_argument("--limit", type=int, required=True)
    sp.add_argument("--targets", type=_targets, default=[])
    sp = add("construct", "smallest twist with a prescribed lambda-invariant")
    sp.add_argument("--lambda", dest="lam", type=int, required=True)
    sp.add_argument("--pool-limit", type=int, default=10**6)
    sp = add("verify-paper", "reproduce the published examples")
    sp.add_argument("--fixtures", type=Path, default=None)
    sp.add_argument("--limit", type=int, default=census_mod.SQUAREFREE_CAP, help="squarefree sweep bound")
    sp.add_argument("--prime-limit", type=int, default=census_mod.PRIME_CAP)
    return parser


COMMANDS = {
    "analyze": cmd_analyze,
    "classify-prime": cmd_classify_prime,
    "twist": cmd_twist,
    "census": cmd_census,
    "construct": cmd_construct,
}


def _envelope(exc: TwistlabError) -> None:
    print(json.dumps(exc.envelope(), sort_keys=True), file=sys.stderr)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.offline:
        os.environ["TWISTLAB_OFFLINE"] = "1"
    try:
        if args.workers < 1:
            raise UsageError("--workers must be >= 1", clause="workers >= 1")
        if args.command == "verify-paper":
            return cmd_verify_paper(args)
        cfg = RunConfig(
            label=args.label, curve_file=args.curve_file, mu2=args.mu2, lambda2=args.lambda2,
            root_number=args.root_number, fmt=args.format, offline=bool(args.offline),
            workers=args.workers, out=args.out,
        )
        return COMMANDS[args.command](cfg, args)
    except TwistlabError as exc:
        _envelope(exc)
        return EXIT_USAGE
    except ValueError as exc:
        _envelope(UsageError(str(exc)))
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
