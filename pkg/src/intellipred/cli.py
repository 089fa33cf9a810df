"""Command-line entry point: file-based pipeline orchestration.

Subcommands compose via CSV/JSON/interchange files only; no stage couples to
another in memory, so any stage can be replaced by an external producer.
Exit codes: 0 success, 1 validation error, 2 I/O error. Diagnostics go to
stderr; data goes to files or stdout.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import os
import sys
from pathlib import Path

from . import calibration, corpus_sim, cpc2, interchange, intrusive, metrics, nonintrusive

_EXIT_OK = 0
_EXIT_VALIDATION = 1
_EXIT_IO = 2


class _Parser(argparse.ArgumentParser):
    """argparse that exits 1 (not 2) on usage errors, as the pipeline contract requires."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(_EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def _resolve_jobs(value) -> int:
    if value is not None:
        return max(1, int(value))
    env = os.environ.get("INTELLIPRED_JOBS")
    return max(1, int(env)) if env else 1


def _cmd_simulate(args) -> int:
    spec = corpus_sim.load_spec(args.spec)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.snr_low is not None:
        overrides["snr_low"] = args.snr_low
    if args.snr_high is not None:
        overrides["snr_high"] = args.snr_high
    if args.weighting is not None:
        overrides["weighting"] = corpus_sim.load_weighting(args.weighting)
    if overrides:
        spec = dataclasses.replace(spec, **overrides)  # re-runs invariant checks
    entries = corpus_sim.simulate_corpus(spec, channel=args.channel,
                                         jobs=_resolve_jobs(args.jobs))
    manifest_path = args.manifest or str(Path(spec.output_dir) / "manifest.csv")
    corpus_sim.write_manifest(entries, manifest_path)
    _log(f"simulated {len(entries)} utterances into {spec.output_dir} "
         f"(manifest: {manifest_path})")
    return _EXIT_OK


def _cmd_predict_intrusive(args) -> int:
    n = intrusive.score_pairing_csv(args.pairing, args.out, band=args.band,
                                    jobs=_resolve_jobs(args.jobs))
    _log(f"scored {n} utterance pairs -> {args.out}")
    return _EXIT_OK


def _cmd_predict_nonintrusive(args) -> int:
    n = nonintrusive.score_beam_csv(args.pairing, args.out,
                                    length_norm=args.length_norm,
                                    jobs=_resolve_jobs(args.jobs))
    _log(f"scored {n} beams -> {args.out}")
    return _EXIT_OK


def _read_score_rows(path, metadata_path):
    """Rows (subset, utterance_id, score, target) from either a pre-joined CSV
    or a raw predictions CSV joined against listener metadata."""
    if metadata_path:
        records = cpc2.load_metadata(metadata_path)
        predictions = intrusive.read_predictions_csv(path)
        join = cpc2.join_predictions(records, predictions)
        if join.unmatched_records or join.unmatched_predictions:
            _log(f"{path}: unmatched records: {join.unmatched_records}, "
                 f"unmatched predictions: {join.unmatched_predictions}")
        return list(join.rows)
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header == ["subset", "utterance_id", "score", "intelligibility"]:
            return [(r[0], r[1], float(r[2]), float(r[3])) for r in reader if r]
        if header == calibration.FIT_CSV_HEADER:
            return [("", r[0], float(r[1]), float(r[2])) for r in reader if r]
    raise ValueError(
        f"{path}: expected header subset,utterance_id,score,intelligibility or "
        f"{','.join(calibration.FIT_CSV_HEADER)} (or pass --metadata with a predictions CSV)"
    )


def _cmd_fit_map(args) -> int:
    rows = _read_score_rows(args.input, args.metadata)
    has_subsets = any(subset for subset, *_ in rows)
    per_partition = has_subsets if args.per_partition is None else args.per_partition
    if per_partition and not has_subsets:
        raise ValueError("--per-partition needs subset information "
                         "(4-column input or --metadata)")
    if per_partition:
        by_subset: dict[str, list[tuple[float, float]]] = {}
        for subset, _, score, target in rows:
            by_subset.setdefault(subset, []).append((score, target))
        fitted = {}
        for subset in sorted(by_subset):
            try:
                fitted[subset] = calibration.fit_logistic(by_subset[subset])
            except ValueError as e:
                raise ValueError(f"subset {subset}: {e}") from e
        calibration.save_params_map(fitted, args.out)
        _log(f"fitted {len(fitted)} per-subset mappings -> {args.out}")
    else:
        params = calibration.fit_logistic([(s, t) for _, _, s, t in rows])
        calibration.save_params(params, args.out)
        _log(f"fitted global mapping (a={params.a:.6g}, b={params.b:.6g}) -> {args.out}")
    return _EXIT_OK


def _cmd_apply_map(args) -> int:
    keyed = calibration.is_params_map(args.params)
    with open(args.input, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        rows = [r for r in reader if r]
    if keyed:
        params_map = calibration.load_params_map(args.params)
        if header == ["subset"] + intrusive.PREDICTIONS_HEADER:
            triples = [(r[0], r[1], float(r[2])) for r in rows]
        elif header == intrusive.PREDICTIONS_HEADER and args.metadata:
            records = cpc2.load_metadata(args.metadata)
            subset_of = {r.signal_id: str(r.partition) for r in records}
            triples = []
            for r in rows:
                if r[0] not in subset_of:
                    raise ValueError(f"{args.input}: no metadata for utterance {r[0]!r}")
                triples.append((subset_of[r[0]], r[0], float(r[1])))
        else:
            raise ValueError(
                f"{args.input}: per-subset params need subset,utterance_id,score "
                f"input or --metadata"
            )
        out_rows = []
        for subset, utterance_id, score in triples:
            if subset not in params_map:
                raise ValueError(f"no mapping fitted for subset {subset!r}")
            out_rows.append(
                (subset, utterance_id,
                 calibration.logistic_apply(params_map[subset], score))
            )
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["subset"] + intrusive.PREDICTIONS_HEADER)
            for subset, utterance_id, score in out_rows:
                writer.writerow([subset, utterance_id, format(score, ".6f")])
    else:
        params = calibration.load_params(args.params)
        if header != intrusive.PREDICTIONS_HEADER:
            raise ValueError(
                f"{args.input}: expected header {intrusive.PREDICTIONS_HEADER}, got {header}"
            )
        mapped = [(r[0], calibration.logistic_apply(params, float(r[1]))) for r in rows]
        intrusive.write_predictions_csv(mapped, args.out)
    _log(f"applied mapping -> {args.out}")
    return _EXIT_OK


def _cmd_evaluate(args) -> int:
    labels = list(args.label or [])
    if len(labels) > len(args.inputs):
        raise ValueError("more --label values than inputs")
    labels += [Path(p).stem for p in args.inputs[len(labels):]]
    csv_outs = list(args.csv or [])
    if csv_outs and len(csv_outs) != len(args.inputs):
        raise ValueError("--csv must be given once per input")

    groups = []
    for label, path in zip(labels, args.inputs):
        if args.metadata:
            rows = _read_score_rows(path, args.metadata)
        else:
            rows = metrics.read_eval_rows(path)
        reports = metrics.evaluate(rows)
        groups.append((label, reports))
    sys.stdout.write(metrics.format_report_table(groups))
    for out_path, (_, reports) in zip(csv_outs, groups):
        metrics.write_report_csv(reports, out_path)
    return _EXIT_OK


def _cmd_validate_interchange(args) -> int:
    findings_total = 0
    for path in args.files:
        findings = interchange.validate_file(path)
        findings_total += len(findings)
        for finding in findings:
            print(f"{path}: FAIL: {finding}")
        if not findings:
            print(f"{path}: ok")
    if findings_total:
        _log(f"{findings_total} finding(s)")
        return _EXIT_VALIDATION
    return _EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="intellipred",
                     description="ASR-based speech intelligibility prediction pipeline")
    sub = parser.add_subparsers(dest="command", required=True, metavar="SUBCOMMAND")

    p = sub.add_parser("simulate", help="generate a noisy-reverberant corpus from a spec JSON")
    p.add_argument("spec", help="SimulationSpec JSON file")
    p.add_argument("--manifest", help="manifest CSV output path (default: <output_dir>/manifest.csv)")
    p.add_argument("--seed", type=int, help="override the spec seed")
    p.add_argument("--snr-low", type=float, help="override the lower SNR bound (dB)")
    p.add_argument("--snr-high", type=float, help="override the upper SNR bound (dB)")
    p.add_argument("--weighting", help="weighting-filter coefficient file")
    p.add_argument("--channel", choices=("left", "right", "mean"), default="mean",
                   help="stereo collapse mode (default: mean)")
    p.add_argument("--jobs", type=int, help="worker processes (env INTELLIPRED_JOBS)")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("predict-intrusive",
                       help="similarity scores from reference/processed representation pairs")
    p.add_argument("pairing", help="CSV: utterance_id,ref_repr_path,proc_repr_path")
    p.add_argument("--out", required=True, help="predictions CSV output")
    p.add_argument("--band", type=int, help="Sakoe-Chiba band half-width (default: unbanded)")
    p.add_argument("--jobs", type=int, help="worker processes (env INTELLIPRED_JOBS)")
    p.set_defaults(func=_cmd_predict_intrusive)

    p = sub.add_parser("predict-nonintrusive",
                       help="negative-entropy confidence scores from decoding beams")
    p.add_argument("pairing", help="CSV: utterance_id,beam_path")
    p.add_argument("--out", required=True, help="predictions CSV output")
    p.add_argument("--length-norm", action="store_true",
                   help="divide hypothesis scores by token count before softmax")
    p.add_argument("--jobs", type=int, help="worker processes (env INTELLIPRED_JOBS)")
    p.set_defaults(func=_cmd_predict_nonintrusive)

    p = sub.add_parser("fit-map", help="fit the logistic score-to-intelligibility mapping")
    p.add_argument("input", help="CSV: [subset,]utterance_id,score,intelligibility, "
                                 "or a predictions CSV with --metadata")
    p.add_argument("--out", required=True, help="params JSON output")
    p.add_argument("--metadata", help="listener metadata JSON to join against")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--per-partition", dest="per_partition", action="store_true",
                       default=None, help="fit one mapping per subset (default when "
                                          "subset info is present)")
    group.add_argument("--global", dest="per_partition", action="store_false",
                       help="pool all rows into one mapping")
    p.set_defaults(func=_cmd_fit_map)

    p = sub.add_parser("apply-map", help="apply fitted mapping to raw scores")
    p.add_argument("input", help="predictions CSV (utterance_id,score or "
                                 "subset,utterance_id,score)")
    p.add_argument("--params", required=True, help="params JSON from fit-map")
    p.add_argument("--out", required=True, help="mapped predictions CSV output")
    p.add_argument("--metadata", help="listener metadata JSON (to look up subsets)")
    p.set_defaults(func=_cmd_apply_map)

    p = sub.add_parser("evaluate", help="RMSE/NCC/KT per evaluation subset")
    p.add_argument("inputs", nargs="+",
                   help="CSV: subset,utterance_id,pred,truth (or predictions CSV "
                        "with --metadata)")
    p.add_argument("--label", action="append",
                   help="display label per input (repeatable; default: file stem)")
    p.add_argument("--csv", action="append", help="report CSV output per input (repeatable)")
    p.add_argument("--metadata", help="listener metadata JSON to join against")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("validate-interchange",
                       help="check representation/beam files against their format contracts")
    p.add_argument("files", nargs="+", help="interchange files to validate")
    p.set_defaults(func=_cmd_validate_interchange)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args)
    except ValueError as e:  # covers all toolkit validation/format errors
        _log(f"error: {e}")
        return _EXIT_VALIDATION
    except OSError as e:
        _log(f"i/o error: {e}")
        return _EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
