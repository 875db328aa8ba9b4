"""Command-line entry point: ``impostorkit <subcommand> ...``."""
from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import replace

from .conditions import BASELINE, PoseLabel, condition_stem, parse_condition
from .dataset import load_manifest, one_per_subject, pool_filter, write_manifest
from .errors import ImpostorKitError
from .imageio import write_image
from .matcher import export_scores, score_matrix, train_eigenmodel
from .pipeline import FaceSource, load_config, run_e1, run_e2
from .report import emit_report, rerender

log = logging.getLogger("impostorkit")


def _matcher_value(value):
    if value is None:
        return None
    if value == "eigen" or value.startswith("scores:"):
        return value
    raise argparse.ArgumentTypeError("expected 'eigen' or 'scores:<dir>'")


def _add_run_flags(p):
    p.add_argument("--config", required=True, help="key = value experiment config")
    p.add_argument("--manifest", help="override the config's manifest")
    p.add_argument("--seed", type=int, help="override master_seed")
    p.add_argument("--out", help="output directory (overrides output_dir)")
    p.add_argument("--matcher", type=_matcher_value, help="eigen | scores:<dir>")
    p.add_argument("--jobs", type=int, help="worker threads")


def _cmd_run(args, runner):
    cfg = load_config(args.config, manifest_path=args.manifest and os.path.abspath(args.manifest),
                      master_seed=args.seed, matcher=args.matcher, jobs=args.jobs,
                      output_dir=args.out and os.path.abspath(args.out))
    out = cfg.output_dir or "."
    result = runner(cfg)
    for path in emit_report(result, out, cfg):
        print(path)
    return 0


def _cmd_degrade(args):
    manifest = load_manifest(args.manifest)
    cond = parse_condition(args.condition)
    if isinstance(cond, PoseLabel):
        raise ImpostorKitError("pose is a capture property; it cannot be applied as a degradation")
    accept = pool_filter(args.session or None)
    entries = sorted((e for e in manifest.entries if accept(e)), key=lambda e: e.image_path)
    source = FaceSource(manifest, args.seed)
    os.makedirs(args.out, exist_ok=True)
    out_entries = []
    for e in entries:
        rel = os.path.join(condition_stem(cond), os.path.splitext(e.image_path)[0] + ".png")
        dest = os.path.join(args.out, rel)
        os.makedirs(os.path.dirname(dest), exist_ok=True)
        write_image(dest, source.degraded(e, cond))
        out_entries.append(replace(e, image_path=rel.replace(os.sep, "/"), condition=cond))
    path = os.path.join(args.out, "manifest.csv")
    write_manifest(path, out_entries)
    print(path)
    return 0


def _cmd_match(args):
    manifest = load_manifest(args.manifest)
    cond = parse_condition(args.condition)
    source = FaceSource(manifest, args.seed, args.jobs)
    train = sorted((e for e in manifest.entries if e.condition == BASELINE), key=lambda e: e.image_path)
    model = train_eigenmodel(source.faces((e, BASELINE) for e in train), args.eigen_k)
    probe_cond = cond if isinstance(cond, PoseLabel) else BASELINE
    probes = one_per_subject(e for e in manifest.entries
                             if pool_filter(args.probe_session, (probe_cond,))(e))
    gallery = one_per_subject(e for e in manifest.entries if pool_filter(args.gallery_session)(e))
    p_faces = source.faces((e, cond) for e in probes.values())
    g_faces = source.faces((e, BASELINE) for e in gallery.values())
    m = score_matrix(model, list(zip(probes, p_faces)), list(zip(gallery, g_faces)))
    export_scores(m, args.out)
    print(args.out)
    return 0


def _cmd_report(args):
    for path in rerender(args.out):
        print(path)
    return 0


def _cmd_synth(args):
    from .synthetic import write_average_face, write_synthetic_dataset

    poses = [("L30", 0.3), ("R30", -0.3)] if args.poses else ()
    manifest = write_synthetic_dataset(args.out, n_subjects=args.subjects, n_external=args.external,
                                       seed=args.seed, poses=poses)
    le, re = write_average_face(os.path.join(args.out, "probe.png"))
    pose_conds = "".join(f", pose:{p}" for p, _ in poses)
    with open(os.path.join(args.out, "e1.cfg"), "w", encoding="utf-8") as fh:
        fh.write("manifest = manifest.csv\nexperiment = e1\n"
                 f"conditions = baseline{pose_conds}\n"
                 "blur_lengths = 3, 5, 7, 13, 17, 29, 31\n"
                 "noise_variances = 0.007, 0.03, 0.07, 0.1, 0.3\n"
                 "gallery_sessions = s1, s2\n"
                 f"probe_image = probe.png\nprobe_left_eye = {le[0]}, {le[1]}\n"
                 f"probe_right_eye = {re[0]}, {re[1]}\nmaster_seed = 7\noutput_dir = out_e1\n")
    with open(os.path.join(args.out, "e2.cfg"), "w", encoding="utf-8") as fh:
        fh.write("manifest = manifest.csv\nexperiment = e2\n"
                 f"conditions = baseline{pose_conds}\n"
                 "blur_lengths = 5, 9, 17, 31\nnoise_variances = 0.03, 0.07, 0.1, 0.3\n"
                 "reference_session = s1\nvaried_session = s2\n"
                 "master_seed = 7\noutput_dir = out_e2\n")
    print(manifest)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="impostorkit",
                                     description="Impostor-score uniqueness stability toolkit")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("degrade", help="apply one quality condition to manifest images")
    p.add_argument("--manifest", required=True)
    p.add_argument("--condition", required=True, help="blur:<N> or noise:<variance>")
    p.add_argument("--session", action="append", help="restrict to session (repeatable)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=_cmd_degrade)

    p = sub.add_parser("match", help="write an eigenface score matrix")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True, help="score-matrix file to write")
    p.add_argument("--probe-session", action="append")
    p.add_argument("--gallery-session", action="append")
    p.add_argument("--condition", default="baseline", help="quality condition of the probes")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--eigen-k", type=int)
    p.add_argument("--matcher", type=_matcher_value, default="eigen",
                   help="only 'eigen' produces scores")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=_cmd_match)

    for name, runner in (("e1", run_e1), ("e2", run_e2)):
        p = sub.add_parser(name, help=f"run experiment {name.upper()}")
        _add_run_flags(p)
        p.set_defaults(func=lambda a, r=runner: _cmd_run(a, r))

    p = sub.add_parser("report", help="re-render SVG figures from CSV results")
    p.add_argument("--out", required=True, help="directory holding stability.csv / boxstats.csv")
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("synth", help="generate the synthetic demo dataset and configs")
    p.add_argument("--out", required=True)
    p.add_argument("--subjects", type=int, default=40)
    p.add_argument("--external", type=int, default=80)
    p.add_argument("--seed", type=int, default=2013)
    p.add_argument("--poses", action="store_true", help="also render two pose-labelled views")
    p.set_defaults(func=_cmd_synth)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if getattr(args, "matcher", "eigen") not in (None, "eigen") and args.command == "match":
        print("error: match only runs the built-in eigen matcher", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except (ImpostorKitError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
