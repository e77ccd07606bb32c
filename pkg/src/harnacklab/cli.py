"""Command-line driver producing deterministic verification reports.

Exit codes: 0 all checks pass, 1 a verified inequality/identity fails,
2 invalid input or unmet preconditions, 3 exploratory run (conclusion
holds but a hypothesis flag is raised; never reported as a clean pass).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from . import fdcheck, geodesics
from .green import check_power_laplacian, compute_profile, default_grid
from .harnack import (
    INEQ_TOL, HarnackState, audit_proof_terms, consistency_hess_vs_H,
    minimal_C, verify_theorem,
)
from .models import ModelError, hypothesis_report, model_from_id
from .symbolic import verify_all, verify_identity

EXIT_PASS, EXIT_FAIL, EXIT_INVALID, EXIT_EXPLORATORY = 0, 1, 2, 3

DEFAULT_LAMBDAS = (0.0, 0.25, 0.5, 0.75, 1.0)


@dataclass
class RunConfig:
    model: str = "euclidean"
    n: int = 4
    C: float = 10.0
    r_min: float = 1e-2
    r_max: float = 1e2
    grid_size: int = 512
    tol: float = INEQ_TOL
    lambdas: tuple = DEFAULT_LAMBDAS
    seed: int = 0
    output_dir: str = ""

    @classmethod
    def load(cls, args) -> "RunConfig":
        cfg = cls()
        if getattr(args, "config", None):
            data = json.loads(Path(args.config).read_text())
            for key, val in data.items():
                if not hasattr(cfg, key):
                    raise ModelError(f"unknown config key {key!r}")
                setattr(cfg, key, val)
        for key in dataclasses.asdict(cfg):
            val = getattr(args, key, None)
            if val is not None:
                setattr(cfg, key, val)
        cfg.n = int(cfg.n)
        cfg.lambdas = tuple(float(x) for x in cfg.lambdas)
        return cfg

    def echo(self) -> dict:
        d = dataclasses.asdict(self)
        d["lambdas"] = list(d["lambdas"])
        return d


def _enc(x):
    """17-significant-digit floats, recursively; keeps reports byte-stable."""
    if isinstance(x, bool):
        return x
    if isinstance(x, float):
        return float(format(x, ".17g"))
    if isinstance(x, dict):
        return {k: _enc(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_enc(v) for v in x]
    return x


def _emit(payload: dict, command: str, output_dir: str) -> None:
    text = json.dumps(_enc(payload), sort_keys=True, indent=2) + "\n"
    sys.stdout.write(text)
    if output_dir:
        out = Path(output_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{command.replace(' ', '_')}.json").write_text(text)


def _write_artifact(output_dir: str, name: str, text: str) -> None:
    if output_dir:
        out = Path(output_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / name).write_text(text)


def _envelope(command: str, cfg: RunConfig, verdict: str, body: dict) -> dict:
    return {
        "version": __version__,
        "command": command,
        "config": cfg.echo(),
        "verdict": verdict,
        **body,
    }


# -- commands -----------------------------------------------------------------


def cmd_verify(args) -> int:
    cfg = RunConfig.load(args)
    model = model_from_id(cfg.model, cfg.n)
    report = verify_theorem(
        model, cfg.C, r_min=cfg.r_min, r_max=cfg.r_max,
        grid_size=cfg.grid_size, tol=cfg.tol,
        exploratory=bool(args.exploratory), D=args.D,
    )
    if not report.passed:
        verdict = "fail"
    elif report.exploratory:
        verdict = "exploratory"
    else:
        verdict = "pass"
    payload = _envelope("verify", cfg, verdict, {"report": json.loads(report.to_json())})
    _emit(payload, "verify", cfg.output_dir)
    return {"pass": EXIT_PASS, "fail": EXIT_FAIL,
            "exploratory": EXIT_EXPLORATORY}[verdict]


def cmd_min_c(args) -> int:
    cfg = RunConfig.load(args)
    model = model_from_id(cfg.model, cfg.n)
    value = minimal_C(model, cfg.r_min, cfg.r_max, cfg.grid_size)
    payload = _envelope("min-c", cfg, "pass", {"minimal_C": value})
    _emit(payload, "min-c", cfg.output_dir)
    return EXIT_PASS


def _sample_triples(cfg: RunConfig, count: int):
    rng = np.random.default_rng(cfg.seed)
    r = np.exp(rng.uniform(math.log(0.5), math.log(3.0), size=(count, 2)))
    phi = rng.uniform(0.0, math.pi, size=count)
    return [
        (geodesics.SlicePoint(float(r[k, 0]), 0.0),
         geodesics.SlicePoint(float(r[k, 1]), float(phi[k])))
        for k in range(count)
    ]


def cmd_corollary(args) -> int:
    cfg = RunConfig.load(args)
    model = model_from_id(cfg.model, cfg.n)
    profile = compute_profile(model, default_grid(cfg.r_min, cfg.r_max, cfg.grid_size))
    rows = []
    worst = math.inf
    for y, z in _sample_triples(cfg, args.triples):
        for t in geodesics.corollary_check(model, profile, y, z, cfg.C, cfg.lambdas):
            worst = min(worst, t.slack)
            rows.append(t)
    csv = ["y_r,y_phi,z_r,z_phi,lambda,d_yz,b2_w,rhs,slack,through_tip"]
    for t in rows:
        csv.append(",".join(
            [format(v, ".17g") for v in
             (t.y.r, t.y.phi, t.z.r, t.z.phi, t.lam, t.d_yz, t.b2_w, t.rhs, t.slack)]
            + [str(int(t.through_tip_region))]))
    _write_artifact(cfg.output_dir, "corollary.csv", "\n".join(csv) + "\n")

    hyp = hypothesis_report(model, cfg.r_min, cfg.r_max)
    ok = worst >= -cfg.tol
    exploratory = cfg.C < 10 or not all(hyp.flags().values())
    verdict = "fail" if not ok else ("exploratory" if exploratory else "pass")
    payload = _envelope("corollary", cfg, verdict, {
        "triples": args.triples,
        "worst_slack": float(worst),
        "hypothesis_flags": hyp.flags(),
    })
    _emit(payload, "corollary", cfg.output_dir)
    return {"pass": EXIT_PASS, "fail": EXIT_FAIL,
            "exploratory": EXIT_EXPLORATORY}[verdict]


def cmd_audit(args) -> int:
    cfg = RunConfig.load(args)
    model = model_from_id(cfg.model, cfg.n)
    profile = compute_profile(model, default_grid(cfg.r_min, cfg.r_max, cfg.grid_size))
    audit = audit_proof_terms(model, profile, args.r, cfg.C)
    groups = {
        "group_curv1": audit.group_curv1,
        "group_curv2": audit.group_curv2,
        "group_Hsq": audit.group_Hsq,
        "group_Csq": audit.group_Csq,
        "group_mixed": audit.group_mixed,
    }
    ok = all(v <= cfg.tol for v in groups.values())
    exploratory = bool(audit.hypothesis_flags)
    verdict = "fail" if not ok else ("exploratory" if exploratory else "pass")
    payload = _envelope("audit", cfg, verdict, {"audit": dataclasses.asdict(audit)})
    _emit(payload, "audit", cfg.output_dir)
    return {"pass": EXIT_PASS, "fail": EXIT_FAIL,
            "exploratory": EXIT_EXPLORATORY}[verdict]


def cmd_symbolic(args) -> int:
    cfg = RunConfig.load(args)
    if args.action != "verify-all" and not args.name:
        raise ModelError("symbolic supports: verify-all, or verify --name <id>")
    results = [verify_identity(args.name)] if args.name else verify_all()
    table = [
        {"name": r.name, "zero": r.zero, "expected_zero": r.expect_zero,
         "ok": r.ok, "note": r.note,
         "residual": None if r.residual is None else repr(r.residual)}
        for r in results
    ]
    ok = all(r.ok for r in results)
    verdict = "pass" if ok else "fail"
    payload = _envelope("symbolic", cfg, verdict, {
        "identities": table,
        "zero_count": sum(r.zero for r in results),
    })
    _emit(payload, "symbolic", cfg.output_dir)
    return EXIT_PASS if ok else EXIT_FAIL


def cmd_oracle(args) -> int:
    cfg = RunConfig.load(args)
    if args.what != "commutators":
        raise ModelError("oracle supports: commutators")
    chart = fdcheck.chart_by_name(args.chart, n=cfg.n)
    f = fdcheck.default_test_function(chart)
    rng = np.random.default_rng(cfg.seed)
    base = fdcheck.default_probe_point(chart)
    gate = 100.0 * args.h**2
    rows = []
    worst = 0.0
    for k in range(args.probes):
        point = base + rng.uniform(-0.05, 0.05, size=chart.dim)
        res = fdcheck.check_lemma31(chart, f, point, args.h)
        worst = max(worst, float(np.max(res)))
        rows.append({"probe": k, "point": [float(v) for v in point],
                     "residuals": [float(v) for v in res]})
    ok = worst <= gate
    payload = _envelope("oracle", cfg, "pass" if ok else "fail", {
        "chart": args.chart,
        "h": args.h,
        "gate": gate,
        "worst_residual": worst,
        "probes": rows,
    })
    _emit(payload, "oracle", cfg.output_dir)
    return EXIT_PASS if ok else EXIT_FAIL


def cmd_models(args) -> int:
    cfg = RunConfig.load(args)
    if args.action != "list":
        raise ModelError("models supports: list")
    payload = _envelope("models", cfg, "pass", {
        "presets": [
            {"id": "euclidean", "description": "flat space, f(r) = r"},
            {"id": "cone:<c>", "description": "metric cone, f(r) = c r, 0 < c <= 1"},
            {"id": "smoothed-cone:<c>:<r0>",
             "description": "f = r near the tip, c r beyond r0, C^2 blend"},
            {"id": "custom:<path>", "description": "CSV table with header r,f"},
        ],
    })
    _emit(payload, "models", cfg.output_dir)
    return EXIT_PASS


def cmd_export_profile(args) -> int:
    cfg = RunConfig.load(args)
    model = model_from_id(cfg.model, cfg.n)
    profile = compute_profile(model, default_grid(cfg.r_min, cfg.r_max, cfg.grid_size))
    csv = profile.to_csv()
    if cfg.output_dir:
        _write_artifact(cfg.output_dir, "profile.csv", csv)
        payload = _envelope("export-profile", cfg, "pass", {
            "rows": cfg.grid_size, "artifact": "profile.csv"})
        _emit(payload, "export-profile", cfg.output_dir)
    else:
        sys.stdout.write(csv)
    return EXIT_PASS


# -- argument plumbing --------------------------------------------------------


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--model", help="model id (euclidean | cone:<c> | ...)")
    p.add_argument("--n", type=int, help="dimension, >= 3")
    p.add_argument("--C", type=float, help="Harnack constant")
    p.add_argument("--r-min", dest="r_min", type=float)
    p.add_argument("--r-max", dest="r_max", type=float)
    p.add_argument("--grid-size", dest="grid_size", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--output-dir", dest="output_dir")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="harnacklab",
        description="Verification lab for the matrix bound Hess b^2 <= C g "
                    "on rotationally symmetric model manifolds.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="check Hess b^2 <= C g over the grid")
    _add_common(p)
    p.add_argument("--exploratory", action="store_true",
                   help="allow C < 10 / unmet hypotheses (exit 3 on success)")
    p.add_argument("--D", type=float, default=None,
                   help="also check the eigenvalue lower bound for Hess b^2 <= D g")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("min-c", help="measure the least C with Hess b^2 <= C g")
    _add_common(p)
    p.set_defaults(func=cmd_min_c)

    p = sub.add_parser("corollary", help="geodesic interpolation bound on b^2")
    _add_common(p)
    p.add_argument("--triples", type=int, default=100)
    p.add_argument("--lambdas", type=float, nargs="+", default=None)
    p.set_defaults(func=cmd_corollary)

    p = sub.add_parser("audit", help="sign audit of the pointwise estimate")
    _add_common(p)
    p.add_argument("--r", type=float, default=1.0, help="radius to audit")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("symbolic", help="exact tensor identity catalogue")
    _add_common(p)
    p.add_argument("action", choices=["verify-all", "verify"])
    p.add_argument("--name", help="single identity to verify")
    p.set_defaults(func=cmd_symbolic)

    p = sub.add_parser("oracle", help="finite-difference commutator residuals")
    _add_common(p)
    p.add_argument("what", choices=["commutators"])
    p.add_argument("--chart", default="s2xr2",
                   choices=["euclidean", "round_sphere", "s2xr2", "cone"])
    p.add_argument("--h", type=float, default=fdcheck.DEFAULT_H)
    p.add_argument("--probes", type=int, default=10)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("models", help="list model presets")
    _add_common(p)
    p.add_argument("action", choices=["list"])
    p.set_defaults(func=cmd_models)

    p = sub.add_parser("export-profile", help="dump the Green profile as CSV")
    _add_common(p)
    p.set_defaults(func=cmd_export_profile)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad usage and 0 on --help; pass both through
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ModelError, OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
