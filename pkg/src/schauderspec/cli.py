"""Batch front door: operator-description files in, reports and CSV out.

``schauderspec run spec.json --out results/`` parses the document, runs
the requested analysis, and writes ``report.json`` (plus CSV artifacts
with ``--csv``).  The ``results`` section of a report is deterministic:
two runs on the same document produce byte-identical bytes there, with
wall time kept outside it.

Exit codes: 0 success, 1 schema error, 2 unsupported operator class,
3 precondition violation, 4 certificate failure (step cap exceeded).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path

from . import __version__
from .errors import (
    ConvergenceFailureError,
    EmptyInputError,
    NotCompactError,
    NotSummableError,
    PreconditionViolatedError,
    SchauderSpecError,
    SpecFormatError,
    StepCapExceededError,
    UnsupportedClassError,
)
from .op_algebra import recognize_shift_form, truncate_complex
from .schauder import (
    audit_deflation,
    classify_compact,
    deflate,
    is_compact_structural,
    schauder_spectrum,
)
from .serde import (
    certificate_to_json,
    parse_spec_document,
    report_to_json,
    sequence_to_json,
    validate_document,
)
from .spectral import (
    CertificateGridConfig,
    adjoint_exclusion,
    check_single_orbit,
    dense_eigs,
    lambda_grid,
    shift_eigen_exclude,
    sup_abs_weight,
)

EXIT_OK = 0
EXIT_SCHEMA = 1
EXIT_UNSUPPORTED = 2
EXIT_PRECONDITION = 3
EXIT_CERTIFICATE = 4

_ERROR_KINDS = (
    (SpecFormatError, EXIT_SCHEMA, "schema-error"),
    (UnsupportedClassError, EXIT_UNSUPPORTED, "unsupported-class"),
    (StepCapExceededError, EXIT_CERTIFICATE, "certificate-failure"),
    (ConvergenceFailureError, EXIT_CERTIFICATE, "certificate-failure"),
    (PreconditionViolatedError, EXIT_PRECONDITION, "precondition-violation"),
    (NotSummableError, EXIT_PRECONDITION, "precondition-violation"),
    (NotCompactError, EXIT_PRECONDITION, "precondition-violation"),
    (EmptyInputError, EXIT_PRECONDITION, "precondition-violation"),
)


def _grid_config(params: dict) -> CertificateGridConfig:
    return CertificateGridConfig(
        moduli=params.get("grid-moduli", 16),
        phases=params.get("grid-phases", 8),
        min_modulus=params.get("min-modulus", 1e-3),
        max_modulus=params.get("max-modulus"),
        bound=params.get("bound", 1e12),
        step_cap=params.get("step-cap", 100_000),
        epsilon=params.get("epsilon", 0.01),
    )


def _run_analysis(spec, cfg: CertificateGridConfig, truncation: int) -> dict:
    """The deterministic results section for one parsed document."""
    if spec.analysis == "schauder-spectrum":
        report = schauder_spectrum(spec.operator, cfg)
        return {"analysis": spec.analysis, "report": report_to_json(report)}
    if spec.analysis == "classify":
        report = schauder_spectrum(spec.operator, cfg)
        compact = is_compact_structural(spec.operator)
        if compact is None:
            raise UnsupportedClassError("compactness is not structurally decidable")
        case = classify_compact(report, compact)
        return {
            "analysis": spec.analysis,
            "classificationCase": case,
            "report": report_to_json(report),
        }
    if spec.analysis == "deflate":
        result = deflate(spec.operator, cfg)
        exact, worst = audit_deflation(result, truncation)
        return {
            "analysis": spec.analysis,
            "lemmaPath": result.lemma_path,
            "coveredRegion": result.covered_region,
            "zeroCheck": {
                "injective": result.zero_check.injective,
                "denseRange": result.zero_check.dense_range,
                "certified": result.zero_check.certified,
                "detail": result.zero_check.detail,
            },
            "audit": {"window": truncation, "exact": exact, "maxAbsDiff": worst},
            "spreads": [
                {"domain": sequence_to_json(s.domain),
                 "image": sequence_to_json(s.image)}
                for s in result.spreads
            ],
            "notes": list(result.notes),
            "schauderSpectrum": {"kind": "empty"},
            "certificates": [certificate_to_json(c) for c in result.certificates],
        }
    if spec.analysis == "certify":
        rec = recognize_shift_form(spec.operator, window=64)
        if rec is None:
            raise UnsupportedClassError(
                "certify needs a shift-form recognizable operator"
            )
        if not check_single_orbit(rec.shift.perm):
            raise UnsupportedClassError(
                "certify needs a single-orbit shift permutation"
            )
        certs = []
        for lam in lambda_grid(cfg, sup_abs_weight(rec.shift.weights)):
            certs.append(shift_eigen_exclude(rec.shift, lam, cfg.bound,
                                             cfg.step_cap))
            certs.append(adjoint_exclusion(rec.shift, lam, cfg.bound,
                                           cfg.step_cap))
        return {
            "analysis": spec.analysis,
            "certificates": [certificate_to_json(c) for c in certs],
        }
    raise UnsupportedClassError(f"unknown analysis {spec.analysis!r}")


def _write_csv_artifacts(outdir: Path, spec, results: dict, truncation: int) -> list:
    written = []
    certs = results.get("certificates") or results.get("report", {}).get(
        "certificates", [])
    if certs:
        path = outdir / "certificates.csv"
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow([
                "lambda_re", "lambda_im", "side", "kind", "regime", "block",
                "witness_index", "magnitude", "bound",
            ])
            for c in certs:
                writer.writerow([
                    repr(c["lambdaRe"]), repr(c["lambdaIm"]), c["side"],
                    c["kind"], c["regime"], c["details"].get("block", 0),
                    c["witnessIndex"], repr(c["magnitude"]), repr(c["bound"]),
                ])
        written.append(path.name)
    M = truncate_complex(spec.operator, truncation)
    path = outdir / "matrix.csv"
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["i", "j", "re", "im"])
        for i in range(truncation):
            for j in range(truncation):
                v = M[i, j]
                if v != 0:
                    writer.writerow([i + 1, j + 1, repr(v.real), repr(v.imag)])
    written.append(path.name)
    eig_n = min(truncation, 512)
    eigs = dense_eigs(M[:eig_n, :eig_n])
    path = outdir / "eigs.csv"
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["re", "im"])
        for e in eigs:
            writer.writerow([repr(e.real), repr(e.imag)])
    written.append(path.name)
    return written


def _error_block(exc: Exception):
    for klass, code, kind in _ERROR_KINDS:
        if isinstance(exc, klass):
            block = {"kind": kind, "exitCode": code, "message": str(exc)}
            if isinstance(exc, SpecFormatError):
                block["path"] = exc.path
            return code, block
    if isinstance(exc, SchauderSpecError):
        return EXIT_PRECONDITION, {
            "kind": "precondition-violation",
            "exitCode": EXIT_PRECONDITION,
            "message": str(exc),
        }
    raise exc


def run(spec_path: str, outdir: str, overrides: dict, write_csv: bool) -> int:
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()
    try:
        with open(spec_path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        print(f"error: cannot read {spec_path}: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except json.JSONDecodeError as exc:
        report = {
            "toolVersion": __version__,
            "error": {"kind": "schema-error", "exitCode": EXIT_SCHEMA,
                      "message": f"invalid JSON: {exc}"},
        }
        (out / "report.json").write_text(json.dumps(report, indent=2,
                                                    sort_keys=True) + "\n")
        print(f"error: invalid JSON in {spec_path}: {exc}", file=sys.stderr)
        return EXIT_SCHEMA

    try:
        spec = parse_spec_document(doc)
        params = dict(spec.params)
        params.update({k: v for k, v in overrides.items() if v is not None})
        cfg = _grid_config(params)
        truncation = params.get("truncation", 64)
        results = _run_analysis(spec, cfg, truncation)
    except Exception as exc:  # mapped to exit codes below
        code, block = _error_block(exc)
        report = {
            "toolVersion": __version__,
            "inputs": doc,
            "error": block,
            "wallTime": time.perf_counter() - started,
        }
        (out / "report.json").write_text(json.dumps(report, indent=2,
                                                    sort_keys=True) + "\n")
        print(f"error[{block['kind']}]: {block['message']}", file=sys.stderr)
        return code

    artifacts = []
    if write_csv:
        artifacts = _write_csv_artifacts(out, spec, results, truncation)
    report = {
        "toolVersion": __version__,
        "inputs": spec.raw,
        "results": results,
        "auditedWindows": [truncation],
        "artifacts": artifacts,
        "wallTime": time.perf_counter() - started,
    }
    (out / "report.json").write_text(json.dumps(report, indent=2,
                                                sort_keys=True) + "\n")
    print(f"ok: {spec.analysis} report written to {out / 'report.json'}")
    return EXIT_OK


def validate(spec_path: str) -> int:
    try:
        with open(spec_path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        print(f"error: cannot read {spec_path}: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except json.JSONDecodeError as exc:
        print(f"$: invalid JSON: {exc}")
        return EXIT_SCHEMA
    diagnostics = validate_document(doc)
    for path, message in diagnostics:
        print(f"{path}: {message}")
    if diagnostics:
        return EXIT_SCHEMA
    print("ok: document is schema-valid")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="schauderspec",
        description="Schauder spectra, classification and deflation for "
                    "structured operators on l2",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    runp = sub.add_parser("run", help="run an analysis from a spec file")
    runp.add_argument("spec", help="operator-description JSON file")
    runp.add_argument("--out", default=".", help="output directory")
    runp.add_argument("--truncation", type=int, default=None)
    runp.add_argument("--grid-moduli", type=int, default=None)
    runp.add_argument("--grid-phases", type=int, default=None)
    runp.add_argument("--bound", type=float, default=None)
    runp.add_argument("--step-cap", type=int, default=None)
    runp.add_argument("--epsilon", type=float, default=None)
    runp.add_argument("--min-modulus", type=float, default=None)
    runp.add_argument("--max-modulus", type=float, default=None)
    runp.add_argument("--csv", action="store_true",
                      help="write matrix/certificate/eigenvalue CSV artifacts")

    valp = sub.add_parser("validate", help="schema-check a spec file")
    valp.add_argument("spec", help="operator-description JSON file")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "validate":
        return validate(args.spec)
    overrides = {
        "truncation": args.truncation,
        "grid-moduli": args.grid_moduli,
        "grid-phases": args.grid_phases,
        "bound": args.bound,
        "step-cap": args.step_cap,
        "epsilon": args.epsilon,
        "min-modulus": args.min_modulus,
        "max-modulus": args.max_modulus,
    }
    return run(args.spec, args.out, overrides, args.csv)


if __name__ == "__main__":
    sys.exit(main())
