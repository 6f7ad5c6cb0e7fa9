"""Command-line front end: eval / synthesize / verify / generate.

Exit codes: 0 success, 1 malformed input or arguments, 2 singular
evaluation, 3 synthesis stage failure, 4 a verification check failed.
"""

import argparse
import json
import sys

import numpy as np

from . import io as artifact_io
from . import pipeline, verify
from .aglerkit import KneseWitness, inner_check, rational_handle, verify_knese
from .bessmertnyi import (
    LongResolventPencil,
    PencilDecomposition,
    homogeneous_structure_check,
    pencil_decomposition,
)
from .cayley import TupleOfMatrices
from .errors import (
    ArtifactError,
    EvaluationSingular,
    LongResolventError,
)
from .herglotz import HerglotzRealization
from .numerics import Tolerances, mnorm
from .polyalg import MatrixPolynomial
from .realization import GivoneRoesserRealization, verify_realization
from .sampling import SamplePlan, SampleReport


def _tolerances(args) -> Tolerances:
    return Tolerances(
        identity_atol=args.atol,
        rank_rtol=args.rank_rtol,
        psd_atol=args.psd_atol,
    )


def _add_tol_flags(sub):
    sub.add_argument("--atol", type=float, default=1e-9,
                     help="absolute tolerance for algebraic identities")
    sub.add_argument("--rank-rtol", type=float, default=1e-10,
                     help="relative singular-value cutoff for rank decisions")
    sub.add_argument("--psd-atol", type=float, default=1e-10,
                     help="minimum-eigenvalue slack for PSD checks")


def _format_matrix(M):
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    return json.dumps(
        [[[float(v.real), float(v.imag)] for v in row] for row in M])


def _parse_point(text, d):
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != d:
        raise ArtifactError(f"point needs {d} coordinates, got {len(parts)}")
    try:
        return np.array([complex(p.replace(" ", "")) for p in parts])
    except ValueError as exc:
        raise ArtifactError(f"bad point {text!r}: {exc}") from exc


def _load_points(path, d):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ArtifactError(f"cannot read points file: {exc}") from exc
    pts = doc["points"] if isinstance(doc, dict) else doc
    out = np.zeros((len(pts), d), dtype=complex)
    for i, row in enumerate(pts):
        if len(row) != d:
            raise ArtifactError(f"point {i} has {len(row)} coordinates")
        for k, pair in enumerate(row):
            out[i, k] = complex(float(pair[0]), float(pair[1]))
    return out


def cmd_eval(args):
    obj = artifact_io.load_artifact(args.input)
    if args.tuple is not None:
        if not isinstance(obj, GivoneRoesserRealization):
            raise ArtifactError("--tuple evaluation needs a gr_realization")
        tup = artifact_io.load_artifact(args.tuple)
        if not isinstance(tup, TupleOfMatrices):
            raise ArtifactError("--tuple file must hold a matrix_tuple")
        print(_format_matrix(obj.eval_transfer_tuple(tup)))
        return 0

    if isinstance(obj, LongResolventPencil):
        d, evaluate = obj.d, obj.eval
    elif isinstance(obj, GivoneRoesserRealization):
        d, evaluate = obj.d, obj.eval_transfer
    elif isinstance(obj, HerglotzRealization):
        d, evaluate = obj.d, obj.eval
    elif isinstance(obj, list) and obj and isinstance(obj[0], MatrixPolynomial):
        d = obj[0].d

        def evaluate(z, polys=obj):
            return np.concatenate([p.eval(z) for p in polys], axis=0)
    else:
        raise ArtifactError(f"artifact kind does not support eval")

    if args.point is not None:
        pts = _parse_point(args.point, d)[None, :]
    elif args.points is not None:
        pts = _load_points(args.points, d)
    else:
        raise ArtifactError("provide --point or --points")
    for z in pts:
        print(_format_matrix(evaluate(z)))
    return 0


def _synth_reports(result, pcl, tol):
    reports = [SampleReport(
        name=f"stage:{k}", samples=1, skipped=0, max_residual=float(v),
        threshold=float("inf"), passed=True, worst_point=None)
        for k, v in result.stages.items()]
    if pcl.tag in ("homogeneous", "real_homogeneous"):
        reports.append(homogeneous_structure_check(result.herglotz,
                                                   threshold=1e-8))
    return reports


def cmd_synthesize(args):
    tol = _tolerances(args)
    obj = artifact_io.load_artifact(args.input)
    if not isinstance(obj, LongResolventPencil):
        raise ArtifactError("synthesize expects a pencil artifact")
    hermitian = True if args.hermitian else None
    real = True if args.real else None
    report_path = args.report or (args.output + ".report.json")
    reports = []
    try:
        if args.target == "decomposition":
            deco = pencil_decomposition(obj, tol=tol)
            artifact_io.save_artifact(args.output, deco)
            reports.append(SampleReport(
                name="decomposition_ranks", samples=len(deco.ranks),
                skipped=0, max_residual=0.0, threshold=float("inf"),
                passed=True, worst_point=None,
                details={f"rank_{k}": float(r)
                         for k, r in enumerate(deco.ranks)}))
        elif args.target == "gr":
            re = pipeline.schur_agler_realization(
                obj, seed=args.seed, tol=tol,
                hermitian=hermitian if hermitian is not None else None)
            artifact_io.save_artifact(args.output, re)
            from .cayley import double_cayley

            reports.append(verify_realization(
                re, double_cayley(obj.handle()), tol=tol))
        elif args.target == "herglotz":
            result = pipeline.pencil_to_herglotz(
                obj, hermitian=hermitian, real=real, seed=args.seed, tol=tol)
            artifact_io.save_artifact(args.output, result.herglotz)
            reports.extend(_synth_reports(result, obj, tol))
        elif args.target == "pencil_roundtrip":
            recon, result, report = pipeline.pencil_roundtrip(
                obj, seed=args.seed, tol=tol, hermitian=hermitian, real=real)
            artifact_io.save_artifact(args.output, recon)
            reports.extend(_synth_reports(result, obj, tol))
            reports.append(report)
        else:
            raise ArtifactError(f"unknown target {args.target!r}")
    except LongResolventError as exc:
        if isinstance(exc, ArtifactError):
            raise
        if reports:
            artifact_io.save_artifact(report_path, reports)
        print(f"synthesis failed at {type(exc).__name__}: {exc}",
              file=sys.stderr)
        return 3
    artifact_io.save_artifact(report_path, reports)
    for rep in reports:
        print(rep)
    return 0


def _pencil_checks(obj, args, tol):
    seed, samples = args.seed, args.samples
    f = obj.handle()
    out = {
        "cayley_inner": lambda: verify.check_cayley_inner(
            f, SamplePlan("polyhalfplane", seed, samples), tol=tol),
        "herglotz_positivity": lambda: verify.check_herglotz_positivity(
            f, SamplePlan("polyhalfplane", seed, max(samples, 500)), tol=tol),
        "decomposition_psd": lambda: _decomposition_psd(obj, seed, tol),
    }
    if obj.tag in ("homogeneous", "real_homogeneous"):
        out["homogeneous"] = lambda: verify.check_homogeneous(
            f, SamplePlan("scaling_rays", seed, max(10, samples // 5)),
            tol=tol)
    if obj.tag == "real_homogeneous":
        out["real"] = lambda: verify.check_real(
            f, SamplePlan("conjugation_pairs", seed, samples), tol=tol)
    return out


def _decomposition_psd(pcl, seed, tol):
    deco = pencil_decomposition(pcl, tol=tol)
    handles = deco.handles()
    worst = None
    for k, phi in enumerate(handles):
        def kernel(w, z, phi=phi):
            return phi(w).conj().T @ phi(z)

        rep = verify.check_positive_kernel(
            kernel, pcl.d, SamplePlan("polyhalfplane", seed + k, 6), tol=tol)
        if worst is None or rep.max_residual > worst.max_residual:
            worst = rep
    return SampleReport(
        name="decomposition_psd", samples=worst.samples * len(handles),
        skipped=0, max_residual=worst.max_residual,
        threshold=worst.threshold, passed=worst.passed,
        worst_point=worst.worst_point)


def _gr_checks(obj, args, tol):
    seed, samples = args.seed, args.samples
    F = obj.transfer_handle()
    out = {
        "unitary": lambda: SampleReport(
            name="unitary", samples=1, skipped=0,
            max_residual=mnorm(
                obj.U.conj().T @ obj.U - np.eye(obj.m + obj.n)),
            threshold=tol.identity_atol,
            passed=mnorm(obj.U.conj().T @ obj.U
                         - np.eye(obj.m + obj.n)) <= tol.identity_atol,
            worst_point=None),
        "schur_contractive": lambda: verify.check_schur_contractive(
            F, SamplePlan("polydisk", seed, samples), tol=tol),
        "agler_decomposition": lambda: verify.check_agler_decomposition(
            obj, pairs=samples, seed=seed, tol=tol),
        "inner": lambda: inner_check(
            F, SamplePlan("torus", seed, samples), threshold=1e-8, tol=tol),
    }
    if obj.hermitian:
        out["difference_identity"] = lambda: verify.check_agler_decomposition(
            obj, pairs=samples, seed=seed, tol=tol, difference=True)
    return out


def _herglotz_checks(obj, args, tol):
    seed, samples = args.seed, args.samples
    F = obj.handle()

    def structure():
        beta_res = mnorm(obj.beta + obj.beta.conj().T)
        w_res = mnorm(obj.W.conj().T @ obj.W - np.eye(obj.m))
        worst = max(beta_res, w_res)
        return SampleReport(
            name="structure", samples=2, skipped=0, max_residual=worst,
            threshold=tol.identity_atol, passed=worst <= tol.identity_atol,
            worst_point=None,
            details={"beta_skew": beta_res, "w_unitary": w_res})

    return {
        "structure": structure,
        "herglotz_positivity": lambda: verify.check_herglotz_positivity(
            F, SamplePlan("polydisk", seed, max(samples, 500)), tol=tol),
        "boundary_skew": lambda: verify.check_boundary_skew(
            F, SamplePlan("torus", seed, samples), tol=tol),
        "homogeneous_structure": lambda: homogeneous_structure_check(
            obj, threshold=1e-8, tol=tol),
    }


def _witness_checks(obj, args, tol):
    def knese():
        residual, ok = verify_knese(obj.p, obj.q, list(obj.psis), tol)
        return SampleReport(
            name="knese", samples=1, skipped=0, max_residual=residual,
            threshold=tol.identity_atol, passed=ok, worst_point=None)

    def inner():
        F = rational_handle(obj.q, obj.p)
        return inner_check(F, SamplePlan("torus", args.seed, args.samples),
                           threshold=1e-8, tol=tol)

    return {"knese": knese, "inner": inner}


def _tuple_checks(obj, args, tol):
    def commuting():
        worst = 0.0
        for i in range(obj.d):
            for j in range(i + 1, obj.d):
                worst = max(worst, mnorm(
                    obj.mats[i] @ obj.mats[j] - obj.mats[j] @ obj.mats[i]))
        return SampleReport(
            name="commuting", samples=obj.d * (obj.d - 1) // 2, skipped=0,
            max_residual=worst, threshold=obj.commutation_tol,
            passed=worst <= obj.commutation_tol, worst_point=None)

    def contractive():
        worst = max(mnorm(m) for m in obj.mats)
        resid = max(0.0, worst - (1.0 - 1e-10))
        return SampleReport(
            name="contractive", samples=obj.d, skipped=0,
            max_residual=resid, threshold=0.0, passed=resid <= 0.0,
            worst_point=None, details={"max_norm": worst})

    return {"commuting": commuting, "contractive": contractive}


def _deco_checks(obj: PencilDecomposition, args, tol):
    def kernel_identity():
        pcl = obj.pencil
        plan = SamplePlan("polyhalfplane", args.seed, 12)
        pts = plan.points(pcl.d)
        half = pts.shape[0] // 2
        ws, zs = pts[:half], pts[half: 2 * half]
        handles = obj.handles()
        fw = pcl.eval_many(ws)
        fz = pcl.eval_many(zs)
        worst, worst_pt = 0.0, tuple(ws[0])
        for i in range(half):
            lhs = fw[i].conj().T + fz[i]
            rhs = np.zeros_like(lhs)
            for k, h in enumerate(handles):
                coef = np.conj(ws[i, k]) + zs[i, k]
                rhs += coef * h(ws[i]).conj().T @ h(zs[i])
            r = mnorm(lhs - rhs)
            if r > worst:
                worst, worst_pt = r, tuple(ws[i])
        return SampleReport(
            name="kernel_identity", samples=half, skipped=0,
            max_residual=worst, threshold=tol.identity_atol,
            passed=worst <= tol.identity_atol, worst_point=worst_pt)

    return {"kernel_identity": kernel_identity}


def cmd_verify(args):
    tol = _tolerances(args)
    obj = artifact_io.load_artifact(args.input)
    if isinstance(obj, LongResolventPencil):
        registry = _pencil_checks(obj, args, tol)
    elif isinstance(obj, GivoneRoesserRealization):
        registry = _gr_checks(obj, args, tol)
    elif isinstance(obj, HerglotzRealization):
        registry = _herglotz_checks(obj, args, tol)
    elif isinstance(obj, KneseWitness):
        registry = _witness_checks(obj, args, tol)
    elif isinstance(obj, TupleOfMatrices):
        registry = _tuple_checks(obj, args, tol)
    elif isinstance(obj, PencilDecomposition):
        registry = _deco_checks(obj, args, tol)
    else:
        raise ArtifactError("artifact kind has no verification checks")

    if args.checks:
        wanted = [c.strip() for c in args.checks.split(",") if c.strip()]
        unknown = [c for c in wanted if c not in registry]
        if unknown:
            raise ArtifactError(
                f"unknown checks {unknown}; available: {sorted(registry)}")
    else:
        # opt-in checks are excluded from the default sweep
        wanted = [c for c in registry
                  if c not in ("inner", "homogeneous_structure")]

    reports = [registry[name]() for name in wanted]
    out_path = args.output or (args.input + ".report.json")
    artifact_io.save_artifact(out_path, reports)
    for rep in reports:
        print(rep)
    return 0 if all(r.passed for r in reports) else 4


def cmd_generate(args):
    dims = {}
    if args.state_dims:
        dims["state_dims"] = tuple(
            int(v) for v in args.state_dims.split(","))
    try:
        obj = verify.gen_instance(args.kind, args.seed, d=args.d, n=args.n,
                                  m=args.m, size=args.size, **dims)
    except LongResolventError as exc:
        raise ArtifactError(str(exc)) from exc
    artifact_io.save_artifact(args.output, obj)
    print(f"wrote {args.kind} (seed {args.seed}) to {args.output}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="longres",
        description="Linear-pencil Schur complements, Givone-Roesser "
                    "colligations and Herglotz realizations: evaluate, "
                    "convert, verify, generate.")
    subs = parser.add_subparsers(dest="command", required=True)

    p_eval = subs.add_parser("eval", help="evaluate an artifact at points")
    p_eval.add_argument("--input", required=True)
    p_eval.add_argument("--point", help="inline point: comma-separated "
                                        "complex literals, e.g. '0.5,1+2j'")
    p_eval.add_argument("--points", help="JSON points file")
    p_eval.add_argument("--tuple", help="matrix_tuple artifact: evaluate a "
                                        "gr_realization on an operator tuple")
    _add_tol_flags(p_eval)
    p_eval.set_defaults(func=cmd_eval)

    p_syn = subs.add_parser("synthesize",
                            help="convert a pencil to downstream artifacts")
    p_syn.add_argument("--input", required=True)
    p_syn.add_argument("--output", required=True)
    p_syn.add_argument("--report", help="report path (default derived)")
    p_syn.add_argument("--target", required=True,
                       choices=["decomposition", "gr", "herglotz",
                                "pencil_roundtrip"])
    p_syn.add_argument("--hermitian", action="store_true",
                       help="force a Hermitian colligation")
    p_syn.add_argument("--real", action="store_true",
                       help="force a real orthogonal colligation")
    p_syn.add_argument("--seed", type=int, default=0)
    _add_tol_flags(p_syn)
    p_syn.set_defaults(func=cmd_synthesize)

    p_ver = subs.add_parser("verify", help="run sampled property checks")
    p_ver.add_argument("--input", required=True)
    p_ver.add_argument("--checks", help="comma-separated check names "
                                        "(default: all applicable)")
    p_ver.add_argument("--seed", type=int, default=0)
    p_ver.add_argument("--samples", type=int, default=100)
    p_ver.add_argument("--output", help="report path (default derived)")
    _add_tol_flags(p_ver)
    p_ver.set_defaults(func=cmd_verify)

    p_gen = subs.add_parser("generate", help="write a seeded instance")
    p_gen.add_argument("--kind", required=True,
                       choices=["pencil_nonhomogeneous", "pencil_homogeneous",
                                "pencil_real", "herglotz_realization",
                                "gr_unitary", "gr_hermitian_unitary",
                                "commuting_contractions"])
    p_gen.add_argument("--output", required=True)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--d", type=int, default=2)
    p_gen.add_argument("--n", type=int, default=1)
    p_gen.add_argument("--m", type=int, default=1)
    p_gen.add_argument("--size", type=int, default=3)
    p_gen.add_argument("--state-dims")
    _add_tol_flags(p_gen)
    p_gen.set_defaults(func=cmd_generate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ArtifactError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except EvaluationSingular as exc:
        where = f" at {exc.point}" if exc.point is not None else ""
        print(f"singular evaluation{where}: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except LongResolventError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
