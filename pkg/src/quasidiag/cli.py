"""Batch command-line front end.

Every pipeline is a subcommand with deterministic, machine-readable output:
JSON by default, CSV where the result is tabular.  Exit status 0 means
success, 1 is reserved for mathematical assertion failures (a
theorem-backed check did not hold), 2 for usage and input errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import cayley, finrep, groups, modulus, regrep, witnesses

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_MATH_FAILURE = 1
EXIT_USAGE = 2
EXIT_UNEXPECTED = 4


class CliInputError(Exception):
    """Bad flag combination or unreadable input; maps to exit status 2."""


class MathAssertionFailure(Exception):
    """A theorem-backed check failed; maps to exit status 1."""


def _round_floats(obj):
    if isinstance(obj, float):
        return float(format(obj, ".12g"))
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    return obj


def write_report(data, args, *, csv_rows=None, csv_header=None):
    """Emit the report as JSON (default) or CSV when rows are provided."""
    fmt = getattr(args, "format", "json")
    if fmt == "csv":
        if csv_rows is None:
            raise CliInputError("this subcommand has no CSV form")
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(csv_header)
        for row in csv_rows:
            writer.writerow(row)
        text = buf.getvalue()
    else:
        payload = {"schema": SCHEMA_VERSION}
        payload.update(data)
        text = json.dumps(_round_floats(payload), sort_keys=True, indent=2) + "\n"
    output = getattr(args, "output", None)
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _fmt_float(x: float) -> str:
    return format(x, ".12g")


def apply_config(args, argv, parser_defaults):
    """Overlay values from a JSON config file for flags not given on argv."""
    path = getattr(args, "config", None)
    if not path:
        return args
    try:
        with open(path, encoding="utf-8") as fh:
            config = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise CliInputError(f"cannot read config file {path}: {exc}") from None
    if not isinstance(config, dict):
        raise CliInputError("config file must hold a JSON object")
    for key, value in config.items():
        dest = key.replace("-", "_")
        if not hasattr(args, dest):
            raise CliInputError(f"unknown config key {key!r}")
        flag = "--" + key.replace("_", "-")
        if flag in argv:
            continue
        setattr(args, dest, value)
    return args


# ---------------------------------------------------------------------------
# Subcommand implementations
# ---------------------------------------------------------------------------


def cmd_spheres(args) -> int:
    if args.group == "free2":
        ball_index = cayley.f2_ball(args.radius)
    elif args.group == "heisenberg":
        ball_index = cayley.ball(groups.HeisenbergElement(),
                                 cayley.heisenberg_generators(), args.radius)
    else:
        raise CliInputError(f"unknown group {args.group!r}")
    rows = []
    json_rows = []
    for n in range(args.radius + 1):
        size = ball_index.sphere_sizes[n]
        if args.group == "free2":
            first_a = sum(1 for w in ball_index.sphere_elements(n)
                          if w.first_letter() == "a")
        else:
            first_a = ""
        rows.append([n, size, first_a])
        json_rows.append({"n": n, "size": size,
                          "sizeFirstLetterA": first_a if first_a != "" else None})
    write_report({"group": args.group, "radius": args.radius, "spheres": json_rows},
                 args, csv_rows=rows, csv_header=["n", "size", "sizeFirstLetterA"])
    return EXIT_OK


def cmd_xi(args) -> int:
    n = args.n
    radius = args.radius if args.radius is not None else n + 1
    if radius < n:
        raise CliInputError(f"radius {radius} is too small for depth {n}")
    ball_index = cayley.f2_ball(radius)
    vec = modulus.sphere_vector(n, ball_index)
    data = {
        "n": n,
        "radius": radius,
        "coefficients": list(vec.coefficients),
        "norm": float(np.linalg.norm(vec.vector)),
        "pairingClosedForm": modulus.pairing_closed_form(n),
        "commutatorClosedForm": modulus.commutator_closed_form(n),
    }
    if radius >= n + 1:
        rep = regrep.build_f2_rep(ball_index)
        data["pairingNumeric"] = {
            g: modulus.pairing_numeric(g, n, rep) for g in ("a", "b", "A", "B")
        }
    write_report(data, args)
    return EXIT_OK


def _load_projection(args, rep) -> regrep.FiniteProjection:
    support_radius = rep.radius - 1
    if args.xi_n is not None:
        if args.xi_n > support_radius:
            raise CliInputError(
                f"--xi-n {args.xi_n} needs radius >= {args.xi_n + 1}")
        vec = modulus.sphere_vector(args.xi_n, rep.ball)
        return modulus.projection_from_vector(rep.ball, vec.vector, args.xi_n)
    if args.projection_file is None:
        raise CliInputError("provide either --xi-n or --projection-file")
    vectors = []
    try:
        with open(args.projection_file, encoding="utf-8") as fh:
            for raw in fh:
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                vec = np.zeros(rep.dim)
                for token in line.split():
                    idx_text, value_text = token.split(":", 1)
                    vec[int(idx_text)] = float(value_text)
                vectors.append(vec)
    except (OSError, ValueError) as exc:
        raise CliInputError(f"cannot read projection file: {exc}") from None
    if not vectors:
        raise CliInputError("projection file holds no vectors")
    frame = np.column_stack(vectors)
    if args.orthonormalize:
        frame, _ = np.linalg.qr(frame)
    cut = rep.ball.size_within(support_radius)
    if np.any(frame[cut:, :] != 0):
        raise CliInputError(
            f"projection vectors must be supported in the ball of radius {support_radius}")
    try:
        return regrep.FiniteProjection(rep.ball, frame, support_radius)
    except ValueError as exc:
        raise CliInputError(str(exc)) from None


def cmd_commutator(args) -> int:
    if args.generator not in ("a", "b", "A", "B"):
        raise CliInputError("generator must be one of a, b, A, B")
    ball_index = cayley.f2_ball(args.radius)
    rep = regrep.build_f2_rep(ball_index)
    projection = _load_projection(args, rep)
    try:
        result = regrep.commutator_norm(rep, args.generator, projection, tol=args.tol)
    except regrep.SupportError as exc:
        raise CliInputError(str(exc)) from None
    write_report({"value": result.value, "exact": result.exact_on_full_space,
                  "radius": result.radius, "generator": result.generator,
                  "rank": projection.rank}, args)
    return EXIT_OK


def _certificate(name: str) -> modulus.ParadoxicalCertificate:
    if name == "standard":
        return modulus.f2_standard_certificate()
    if name == "five-piece":
        return modulus.f2_five_piece_certificate()
    raise CliInputError(f"unknown certificate {name!r}")


def cmd_paradox(args) -> int:
    if args.action != "verify":
        raise CliInputError(f"unknown paradox action {args.action!r}")
    cert = _certificate(args.certificate)
    report = modulus.verify_certificate(cert, args.radius)
    write_report({
        "ok": report.ok,
        "radius": report.radius,
        "checked": report.checked,
        "pieces": cert.n_pieces,
        "violations": [{"kind": k, "witness": w, "detail": d}
                       for k, w, d in report.violations],
    }, args)
    return EXIT_OK if report.ok else EXIT_MATH_FAILURE


def cmd_cf_lower(args) -> int:
    cert = _certificate(args.certificate)
    report = modulus.verify_certificate(cert, args.radius)
    if not report.ok:
        write_report({"ok": False, "violations": len(report.violations)}, args)
        return EXIT_MATH_FAILURE
    bound = modulus.cf_lower_bound(cert, min_verified_radius=args.radius)
    write_report({
        "bound": float(bound.bound),
        "boundExact": f"{bound.bound.numerator}/{bound.bound.denominator}",
        "pieces": bound.pieces,
        "translators": list(bound.translators),
        "verifiedRadius": cert.verified_radius,
        "alsoBoundsLiminfModulus": True,
    }, args)
    return EXIT_OK


def cmd_cf_upper(args) -> int:
    result = modulus.cf_upper_search(args.dim)
    write_report({
        "dim": args.dim,
        "value": result.value,
        "pairing": result.pairing,
        "converged": result.converged,
        "sweeps": result.sweeps,
        "profile": list(result.profile),
    }, args)
    return EXIT_OK


def cmd_trace_lemma(args) -> int:
    summary = modulus.random_trace_lemma_trials(args.trials, max_dim=args.max_dim,
                                                seed=args.seed)
    write_report({
        "trials": summary.trials,
        "seed": summary.seed,
        "maxDim": args.max_dim,
        "violations": summary.violations,
        "maxRatio": summary.max_ratio,
    }, args)
    return EXIT_OK if summary.violations == 0 else EXIT_MATH_FAILURE


def cmd_qr_audit(args) -> int:
    if args.support_radius > args.radius - 1:
        raise CliInputError("support radius must leave one layer of headroom")
    ball_index = cayley.f2_ball(args.radius)
    rep = regrep.build_f2_rep(ball_index)
    cert = modulus.f2_standard_certificate()
    verification = modulus.verify_certificate(cert, 6)
    if not verification.ok:
        raise MathAssertionFailure("standard certificate failed verification")
    summary = modulus.random_audit_trials(rep, cert, args.trials,
                                          max_rank=args.max_rank,
                                          support_radius=args.support_radius,
                                          seed=args.seed)
    write_report({
        "trials": summary.trials,
        "seed": summary.seed,
        "radius": args.radius,
        "supportRadius": summary.support_radius,
        "maxRank": summary.max_rank,
        "minEpsilon": summary.min_epsilon,
        "minSlack": summary.min_slack,
        "floor": 0.5,
        "floorFailures": summary.floor_failures,
        "inequalityFailures": summary.inequality_failures,
    }, args)
    ok = summary.floor_failures == 0 and summary.inequality_failures == 0
    return EXIT_OK if ok else EXIT_MATH_FAILURE


def _load_table_file(path: str) -> groups.FiniteGroup:
    rows = []
    try:
        with open(path, encoding="utf-8") as fh:
            for raw in fh:
                line = raw.split("#", 1)[0].strip()
                if line:
                    rows.append([int(tok) for tok in line.split()])
    except (OSError, ValueError) as exc:
        raise CliInputError(f"cannot read table file: {exc}") from None
    try:
        return groups.FiniteGroup(np.array(rows, dtype=np.int64))
    except ValueError as exc:
        raise CliInputError(str(exc)) from None


def cmd_induce(args) -> int:
    kind, _, param = args.group.partition(":")
    center: list[int] | None = None
    if kind == "cyclic":
        group = groups.cyclic_group(int(param))
    elif kind == "heisenberg-mod":
        group, _, center = groups.heisenberg_mod(int(param))
    elif kind == "table":
        group = _load_table_file(param)
    else:
        raise CliInputError(f"unknown group spec {args.group!r}")
    if args.subgroup == "center":
        if center is None:
            raise CliInputError("subgroup spec 'center' needs a heisenberg-mod group")
        subgroup = center
    else:
        try:
            subgroup = [int(tok) for tok in args.subgroup.split(",")]
        except ValueError:
            raise CliInputError("subgroup must be 'center' or comma-separated indices") from None
    try:
        character = finrep.cyclic_character(group, subgroup, args.char)
        rep = finrep.induce_central(group, character)
    except ValueError as exc:
        raise CliInputError(str(exc)) from None
    separation = finrep.check_induced_separation(rep, subgroup)
    restriction_ok = finrep.check_induced_restriction(rep, character)
    write_report({
        "groupOrder": group.order,
        "subgroupOrder": len(subgroup),
        "char": args.char,
        "dim": rep.dim,
        "minSeparation": separation.min_norm,
        "separationOk": separation.ok,
        "restrictionOk": restriction_ok,
    }, args)
    return EXIT_OK if separation.ok and restriction_ok else EXIT_MATH_FAILURE


def _parse_int_list(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise CliInputError(f"expected a comma-separated integer list, got {text!r}") from None


def cmd_mf(args) -> int:
    if args.action != "run":
        raise CliInputError(f"unknown mf action {args.action!r}")
    instance = witnesses.get_instance(args.instance, args.p)
    moduli = _parse_int_list(args.moduli) if args.moduli else None
    probes = None
    if args.probes:
        try:
            with open(args.probes, encoding="utf-8") as fh:
                elements = groups.parse_element_lines(fh, args.instance, prime=args.p)
        except (OSError, ValueError) as exc:
            raise CliInputError(f"cannot read probes file: {exc}") from None
        probes = [(f"probe{i}", x) for i, x in enumerate(elements)]
    try:
        run = witnesses.run_mf(instance, moduli=moduli, stages=args.stages,
                               probes=probes, cap=args.cap)
    except ValueError as exc:
        raise CliInputError(str(exc)) from None
    report = witnesses.separation_report(run, instance)
    stage_payload = []
    for record in run.stages:
        stage_payload.append({
            "stage": record.stage,
            "modulus": record.modulus,
            "tolerance": record.tolerance,
            "index": record.index,
            "dim": record.dim,
            "skipped": record.skipped,
            "skipReason": record.skip_reason,
            "gamma": list(record.gamma),
            "gammaIsFallback": record.gamma_is_fallback,
            "identityOk": record.identity_ok,
            "charMatches": [{"param": r.param, "charIndex": r.char_index,
                             "discrepancy": r.discrepancy, "matched": r.matched}
                            for r in record.char_results],
            "probes": [{"probe": p.label, "norm": p.norm,
                        "inCenterImage": p.in_center_image}
                       for p in record.probe_rows],
        })
    csv_rows = [[r.stage, r.modulus, r.probe, r.classification,
                 _fmt_float(r.norm), r.in_center_image, r.covered,
                 r.separating_matched] for r in report.rows]
    write_report({
        "instance": run.instance,
        "cap": run.cap,
        "moduli": run.moduli,
        "stages": stage_payload,
        "separation": {
            "ok": report.ok,
            "stagesCompleted": report.stages_completed,
            "stagesSkipped": report.stages_skipped,
            "violations": report.violations,
        },
    }, args, csv_rows=csv_rows,
        csv_header=["stage", "modulus", "probe", "class", "norm",
                    "inCenterImage", "covered", "separatingMatched"])
    return EXIT_OK if report.ok else EXIT_MATH_FAILURE


def cmd_lef(args) -> int:
    if args.instance != "free2":
        raise CliInputError(f"unknown LEF instance {args.instance!r}")
    ball_index = cayley.f2_ball(args.radius)
    schedule = (_parse_int_list(args.moduli_schedule) if args.moduli_schedule
                else witnesses.DEFAULT_LEF_SCHEDULE)
    try:
        witness = witnesses.lef_witness_search(ball_index.elements, schedule)
    except witnesses.LefSearchError as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_MATH_FAILURE
    report = witnesses.verify_lef_witness(witness)
    if not report.ok:
        return EXIT_MATH_FAILURE
    _, min_distance = witnesses.lef_to_unitaries(witness)
    lines = [
        f"# lef witness: instance=free2 radius={args.radius} modulus={witness.modulus}",
        f"# groupOrder={witness.group.order} minPairwiseDistance={_fmt_float(min_distance)}",
    ]
    for w in witness.elements:
        mat = witnesses.sl2_word_image(w, witness.modulus)
        lines.append(f"{w} {mat[0][0]} {mat[0][1]} {mat[1][0]} {mat[1][1]}")
    text = "\n".join(lines) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if min_distance < witnesses.SQRT2 - 1e-12:
        return EXIT_MATH_FAILURE
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _add_common(sub, *, formats=("json",)):
    sub.add_argument("--output", help="write the report to this path instead of stdout")
    sub.add_argument("--format", choices=list(formats), default=formats[0])
    sub.add_argument("--config", help="JSON file with defaults for these flags")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="quasidiag",
                                     description=__doc__.splitlines()[0])
    subs = parser.add_subparsers(dest="command", required=True)

    sub = subs.add_parser("spheres", help="sphere sizes in a Cayley graph")
    sub.add_argument("--radius", type=int, required=True)
    sub.add_argument("--group", choices=["free2", "heisenberg"], default="free2")
    _add_common(sub, formats=("csv", "json"))
    sub.set_defaults(func=cmd_spheres)

    sub = subs.add_parser("xi", help="radial sphere vector diagnostics")
    sub.add_argument("--n", type=int, required=True)
    sub.add_argument("--radius", type=int, default=None)
    _add_common(sub)
    sub.set_defaults(func=cmd_xi)

    sub = subs.add_parser("commutator", help="exact commutator norm on a ball")
    sub.add_argument("--radius", type=int, required=True)
    sub.add_argument("--xi-n", type=int, default=None)
    sub.add_argument("--projection-file", default=None)
    sub.add_argument("--orthonormalize", action="store_true")
    sub.add_argument("--generator", default="a")
    sub.add_argument("--tol", type=float, default=regrep.DEFAULT_NORM_TOL)
    _add_common(sub)
    sub.set_defaults(func=cmd_commutator)

    sub = subs.add_parser("paradox", help="verify a paradoxical certificate")
    sub.add_argument("action", choices=["verify"])
    sub.add_argument("--radius", type=int, default=6)
    sub.add_argument("--certificate", choices=["standard", "five-piece"],
                     default="standard")
    _add_common(sub)
    sub.set_defaults(func=cmd_paradox)

    sub = subs.add_parser("cf-lower", help="certified commutator floor")
    sub.add_argument("--radius", type=int, default=6,
                     help="verification radius for the certificate")
    sub.add_argument("--certificate", choices=["standard", "five-piece"],
                     default="standard")
    _add_common(sub)
    sub.set_defaults(func=cmd_cf_lower)

    sub = subs.add_parser("cf-upper", help="radial upper-bound search")
    sub.add_argument("--dim", type=int, required=True)
    _add_common(sub)
    sub.set_defaults(func=cmd_cf_upper)

    sub = subs.add_parser("trace-lemma", help="randomized trace inequality trials")
    sub.add_argument("--trials", type=int, default=1000)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--max-dim", type=int, default=40)
    _add_common(sub)
    sub.set_defaults(func=cmd_trace_lemma)

    sub = subs.add_parser("qr-audit", help="randomized lower-bound audit")
    sub.add_argument("--trials", type=int, default=200)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--radius", type=int, default=7)
    sub.add_argument("--support-radius", type=int, default=6)
    sub.add_argument("--max-rank", type=int, default=5)
    _add_common(sub)
    sub.set_defaults(func=cmd_qr_audit)

    sub = subs.add_parser("induce", help="induce a central character")
    sub.add_argument("--group", required=True,
                     help="cyclic:N | heisenberg-mod:M | table:FILE")
    sub.add_argument("--subgroup", required=True,
                     help="'center' or comma-separated element indices")
    sub.add_argument("--char", type=int, default=1)
    _add_common(sub)
    sub.set_defaults(func=cmd_induce)

    sub = subs.add_parser("mf", help="finite-quotient witness pipeline")
    sub.add_argument("action", choices=["run"])
    sub.add_argument("--instance", choices=["abels", "heisenberg"], default="abels")
    sub.add_argument("--p", type=int, default=2)
    sub.add_argument("--moduli", default=None, help="comma-separated modulus schedule")
    sub.add_argument("--stages", type=int, default=None)
    sub.add_argument("--probes", default=None, help="element file with probe lines")
    sub.add_argument("--cap", type=int, default=witnesses.DIMENSION_CAP)
    _add_common(sub, formats=("json", "csv"))
    sub.set_defaults(func=cmd_mf)

    sub = subs.add_parser("lef", help="finite-group witness for a ball")
    sub.add_argument("--instance", default="free2")
    sub.add_argument("--radius", type=int, default=2)
    sub.add_argument("--moduli-schedule", default=None)
    sub.add_argument("--output", help="write the witness file to this path")
    sub.add_argument("--config", help="JSON file with defaults for these flags")
    sub.set_defaults(func=cmd_lef)

    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args = apply_config(args, argv, parser)
        return args.func(args)
    except CliInputError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except MathAssertionFailure as exc:
        sys.stderr.write(f"assertion failure: {exc}\n")
        return EXIT_MATH_FAILURE
    except (cayley.BallCapExceeded, regrep.PowerIterationError) as exc:
        sys.stderr.write(f"resource error: {exc}\n")
        return EXIT_USAGE
    except Exception as exc:  # pragma: no cover - defensive
        sys.stderr.write(f"unexpected error: {type(exc).__name__}: {exc}\n")
        return EXIT_UNEXPECTED


if __name__ == "__main__":
    sys.exit(main())
