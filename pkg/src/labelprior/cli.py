"""Command-line entry points: gen, stats, train, eval, detect, transform.

Exit codes: 0 on success, 1 on usage or configuration errors, 2 on
numerical failure (Dirichlet singularity or overflow).
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

import numpy as np

from . import dataio, metrics, model, synth
from .annotations import AgreementGroup, AnnotationSet, Evaluation, classify_agreement
from .dirichlet import CategoricalDist, SingularityError, from_logits, predictive_mean
from .losses import LOGIT_CLAMP, LossConfig, LossKind

__all__ = ["main"]

_LOSS_NAMES = {kind.value: kind for kind in LossKind}


def _comma_floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated floats, got {text!r}")


def _comma_ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="labelprior",
        description="Label-ambiguity modelling with per-utterance Dirichlet priors",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a synthetic dataset")
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--k", type=int, default=5)
    gen.add_argument("--d", type=int, default=16)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--annotators", type=int, default=3)
    gen.add_argument("--multi-tag-prob", type=float, default=0.04)
    gen.add_argument("--noise-sigma", type=float, default=0.1)
    gen.add_argument("--group-mix", type=_comma_floats, default=(0.237, 0.513, 0.250))
    gen.add_argument("--precisions", type=_comma_floats, default=(120.0, 12.0, 5.0))
    gen.add_argument("--test-frac", type=float, default=0.2)
    gen.add_argument("--out", required=True)

    st = sub.add_parser("stats", help="print label statistics of a dataset")
    st.add_argument("--data", required=True)

    tr = sub.add_parser("train", help="train a classifier on the train split")
    tr.add_argument("--data", required=True)
    tr.add_argument("--loss", choices=sorted(_LOSS_NAMES), required=True)
    tr.add_argument("--eps1", type=float, default=None)
    tr.add_argument("--eps2", type=float, default=None)
    tr.add_argument("--lambda", dest="lam", type=float, default=None)
    tr.add_argument("--epochs", type=int, default=30)
    tr.add_argument("--lr", type=float, default=1e-2)
    tr.add_argument("--batch", type=int, default=32)
    tr.add_argument("--hidden", type=_comma_ints, default=(64,))
    tr.add_argument("--seed", type=int, default=0)
    tr.add_argument("--out", required=True)
    tr.add_argument("--log", default=None, help="training log path (default: <out>.log)")

    ev = sub.add_parser("eval", help="evaluate a checkpoint on the test split")
    ev.add_argument("--data", required=True)
    ev.add_argument("--ckpt", required=True)
    ev.add_argument("--out", required=True)

    de = sub.add_parser("detect", help="PR curves for no-majority detection")
    de.add_argument("--data", required=True)
    de.add_argument("--ckpt", required=True)
    de.add_argument("--out-prefix", required=True)

    tf = sub.add_parser("transform", help="apply vote-and-replace to a dataset")
    tf.add_argument("--data", required=True)
    tf.add_argument("--out", required=True)
    return parser


def _loss_config(args: argparse.Namespace) -> LossConfig:
    kind = _LOSS_NAMES[args.loss]
    base = LossConfig.default_for(kind)
    return LossConfig(
        kind=kind,
        eps1=base.eps1 if args.eps1 is None else args.eps1,
        eps2=base.eps2 if args.eps2 is None else args.eps2,
        lam=base.lam if args.lam is None else args.lam,
    )


def _predict_dists(
    params: model.ModelParams, features: Sequence[np.ndarray], eps2: float
) -> list[CategoricalDist]:
    """Predictive distributions for a batch of feature vectors."""
    dists = []
    for x in features:
        z = np.clip(model.forward(params, x), -LOGIT_CLAMP, LOGIT_CLAMP)
        dists.append(predictive_mean(from_logits(z, eps2)))
    return dists


def _cmd_gen(args: argparse.Namespace) -> int:
    config = synth.SynthConfig(
        n=args.n,
        k=args.k,
        d=args.d,
        annotators=args.annotators,
        seed=args.seed,
        group_mix=args.group_mix,
        regime_precisions=args.precisions,
        multi_tag_prob=args.multi_tag_prob,
        noise_sigma=args.noise_sigma,
    )
    if not 0.0 <= args.test_frac <= 1.0:
        raise ValueError("test-frac must lie in [0, 1]")
    utterances, space = synth.generate(config)
    n_train = round(config.n * (1.0 - args.test_frac))
    records = [
        dataio.DatasetRecord(
            uid=u.uid,
            split="train" if u.uid < n_train else "test",
            features=u.features,
            evaluations=u.evaluations,
        )
        for u in utterances
    ]
    dataio.write_dataset(args.out, space, records)
    print(synth.stats([u.annotations for u in utterances]).format_table())
    print(f"wrote {len(records)} records to {args.out}")
    return 0


def _cmd_stats(args: argparse.Namespace) -> int:
    space, records = dataio.read_dataset(args.data)
    sets = [AnnotationSet(rec.evaluations, space) for rec in records]
    print(synth.stats(sets).format_table())
    return 0


def _cmd_train(args: argparse.Namespace) -> int:
    space, records = dataio.read_dataset(args.data)
    train_records = [rec for rec in records if rec.split == "train"]
    if not train_records:
        raise ValueError(f"{args.data}: no 'train' split records")
    examples = [dataio.record_to_example(rec, space) for rec in train_records]
    config = model.TrainConfig(
        loss=_loss_config(args),
        learning_rate=args.lr,
        batch_size=args.batch,
        epochs=args.epochs,
        seed=args.seed,
        hidden=args.hidden,
    )
    params, losses = model.train(examples, config)
    dataio.write_checkpoint(args.out, params, space, config)
    dataio.write_train_log(args.log if args.log else f"{args.out}.log", losses)
    print(f"trained {config.loss.kind.value} for {config.epochs} epochs; "
          f"final mean loss {losses[-1]:.6f}")
    return 0


def _test_views(args: argparse.Namespace):
    space, records = dataio.read_dataset(args.data)
    test_records = [rec for rec in records if rec.split == "test"]
    if not test_records:
        raise ValueError(f"{args.data}: no 'test' split records")
    params, ckpt_space, config = dataio.read_checkpoint(args.ckpt)
    if ckpt_space.names != space.names:
        raise ValueError("checkpoint and dataset class names differ")
    examples = [dataio.record_to_example(rec, space) for rec in test_records]
    preds = _predict_dists(params, [e.features for e in examples], config.loss.eps2)
    return space, examples, preds


def _cmd_eval(args: argparse.Namespace) -> int:
    _, examples, preds = _test_views(args)
    report = metrics.build_report(
        [e.group for e in examples],
        [e.majority for e in examples],
        [e.soft for e in examples],
        preds,
    )
    dataio.write_report(args.out, report)
    print(f"wa {report.wa:.6f}  ua {report.ua:.6f}  mean_kl {report.mean_kl:.6f}  "
          f"mean_entropy {report.mean_entropy:.6f}")
    print(f"aupr_maxp {report.aupr_maxp:.6f}  aupr_ent {report.aupr_ent:.6f}")
    return 0


def _cmd_detect(args: argparse.Namespace) -> int:
    _, examples, preds = _test_views(args)
    groups = [e.group for e in examples]
    maxp_curve, ent_curve, aupr_maxp, aupr_ent = metrics.detect_report(groups, preds)
    dataio.write_curve(f"{args.out_prefix}_maxp.csv", maxp_curve)
    dataio.write_curve(f"{args.out_prefix}_ent.csv", ent_curve)
    print(f"aupr_maxp {aupr_maxp:.6f}")
    print(f"aupr_ent {aupr_ent:.6f}")
    return 0


def _cmd_transform(args: argparse.Namespace) -> int:
    space, records = dataio.read_dataset(args.data)
    out_records = []
    for rec in records:
        group, majority = classify_agreement(rec.evaluations, space)
        if group == AgreementGroup.NONE:
            out_records.append(rec)
            continue
        n_labels = sum(len(ev.tags) for ev in rec.evaluations)
        evaluations = tuple(Evaluation((majority,)) for _ in range(n_labels))
        out_records.append(
            dataio.DatasetRecord(rec.uid, rec.split, rec.features, evaluations)
        )
    dataio.write_dataset(args.out, space, out_records)
    print(f"wrote {len(out_records)} records to {args.out}")
    return 0


_COMMANDS = {
    "gen": _cmd_gen,
    "stats": _cmd_stats,
    "train": _cmd_train,
    "eval": _cmd_eval,
    "detect": _cmd_detect,
    "transform": _cmd_transform,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exit_:
        return 0 if exit_.code in (0, None) else 1
    try:
        return _COMMANDS[args.command](args)
    except (SingularityError, OverflowError, FloatingPointError) as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
