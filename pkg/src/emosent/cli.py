"""Operator commands covering the full pipeline.

Commands: preprocess, build-vocab, train, evaluate, predict, gradcheck,
report. All randomness flows from one seed fanned out by stage name, and
every command writes byte-identical artifacts given identical inputs.
Exit codes: 0 success, 1 failed check, 2 usage or configuration error.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .checkpoint import load_checkpoint, save_checkpoint
from .config import ConfigError, RunConfig, load_run_config, require_files
from .model import MODES, ModelConfig, forward, init_parameters
from .nd import grad_check
from .preprocess import SegmentationLexicon, join, normalize
from .resources import (
    EMOTIONS,
    EncodedExample,
    Example,
    OTHER_SENTIMENT,
    SENTIMENTS,
    Thesaurus,
    build_vocab,
    encode_corpus,
    encode_example,
    load_corpus,
    load_embeddings,
    vocab_embedding_rows,
)
from .train import evaluate, joint_loss, train as train_model, write_report
from .metrics import parse_metrics, render_table

GRADCHECK_TOLERANCE = 1e-3


def _load_config(args, required: bool) -> RunConfig:
    if args.config is None:
        if required:
            raise ConfigError("this command needs --config")
        cfg = RunConfig()
    else:
        cfg = load_run_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out is not None:
        cfg.out_dir = args.out
    return cfg


def _ensure_out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _staged(stage: str, fn, *args, **kwargs):
    """Run one pipeline stage; a failure names the stage and its cause."""
    try:
        return fn(*args, **kwargs)
    except ValueError as exc:
        raise ConfigError(f"{stage}: {exc}") from None


def _load_lexicon(cfg: RunConfig) -> SegmentationLexicon:
    if cfg.lexicon is None:
        return SegmentationLexicon({})
    require_files(cfg, "lexicon")
    return _staged("lexicon", SegmentationLexicon.from_file, cfg.lexicon)


def _load_thesaurus(cfg: RunConfig) -> Thesaurus | None:
    if cfg.thesaurus is None:
        return None
    require_files(cfg, "thesaurus")
    return _staged("thesaurus", Thesaurus.from_file, cfg.thesaurus)


def cmd_preprocess(args) -> int:
    cfg = _load_config(args, required=args.config is not None)
    if not Path(args.input).is_file():
        raise ConfigError(f"input: no such file: {args.input}")
    lexicon = _load_lexicon(cfg)
    out_dir = _ensure_out_dir(cfg)
    lines = Path(args.input).read_text(encoding="utf-8").splitlines()
    rendered = "".join(join(normalize(line, lexicon)) + "\n" for line in lines)
    target = out_dir / "preprocessed.txt"
    target.write_text(rendered, encoding="utf-8")
    print(f"wrote {target} ({len(lines)} lines)")
    return 0


def cmd_build_vocab(args) -> int:
    cfg = _load_config(args, required=True)
    require_files(cfg, "embeddings", "corpus.train")
    embeddings = _staged(
        "embeddings", load_embeddings, cfg.embeddings, cfg.embed_dim, seed=cfg.seed
    )
    thesaurus = _load_thesaurus(cfg)
    corpus = _staged("corpus.train", load_corpus, cfg.corpus_train)
    vocab = build_vocab(corpus, embeddings, thesaurus, cfg.dt_k)
    out_dir = _ensure_out_dir(cfg)
    target = out_dir / "vocab.txt"
    target.write_text("".join(w + "\n" for w in vocab.words), encoding="utf-8")
    print(f"wrote {target} ({len(vocab.words)} words)")
    return 0


def cmd_train(args) -> int:
    cfg = _load_config(args, required=True)
    model_cfg = cfg.model_config()
    train_cfg = cfg.train_config()
    require_files(cfg, "embeddings", "corpus.train")
    embeddings = _staged(
        "embeddings", load_embeddings, cfg.embeddings, cfg.embed_dim, seed=cfg.seed
    )
    thesaurus = _load_thesaurus(cfg)
    lexicon = _load_lexicon(cfg)
    train_corpus = _staged("corpus.train", load_corpus, cfg.corpus_train)
    vocab = build_vocab(train_corpus, embeddings, thesaurus, cfg.dt_k)
    rows = vocab_embedding_rows(vocab, embeddings)
    train_examples = encode_corpus(train_corpus, vocab, thesaurus, cfg.dt_k)
    if cfg.corpus_test is not None:
        require_files(cfg, "corpus.test")
        test_corpus = _staged("corpus.test", load_corpus, cfg.corpus_test)
        eval_examples = encode_corpus(test_corpus, vocab, thesaurus, cfg.dt_k)
    else:
        eval_examples = train_examples
    params = init_parameters(model_cfg, embedding_rows=rows, seed=cfg.seed)
    params, log = _staged("train", train_model, train_examples, params, train_cfg, model_cfg)
    report = _staged(
        "evaluate",
        evaluate,
        eval_examples,
        params,
        model_cfg,
        threshold=cfg.threshold,
        seed=cfg.seed,
        epoch=len(log),
    )
    out_dir = _ensure_out_dir(cfg)
    save_checkpoint(
        out_dir / "checkpoint.bin",
        model_cfg,
        params,
        vocab,
        thesaurus=thesaurus,
        lexicon=lexicon,
        meta={
            "epochs": len(log),
            "final_loss": log[-1],
            "seed": cfg.seed,
            "threshold": cfg.threshold,
        },
    )
    write_report(report, out_dir / "metrics.txt", out_dir / "table.txt")
    (out_dir / "train_log.txt").write_text(
        "".join(f"{epoch}\t{loss!r}\n" for epoch, loss in enumerate(log, start=1)),
        encoding="utf-8",
    )
    print(f"trained {model_cfg.mode} for {len(log)} epochs, final loss {log[-1]:.6f}")
    print(f"wrote {out_dir / 'checkpoint.bin'}")
    print(f"wrote {out_dir / 'metrics.txt'}")
    return 0


def cmd_evaluate(args) -> int:
    cfg = _load_config(args, required=True)
    ckpt_path = Path(args.checkpoint) if args.checkpoint else Path(cfg.out_dir) / "checkpoint.bin"
    if not ckpt_path.is_file():
        raise ConfigError(f"checkpoint: no such file: {ckpt_path}")
    ckpt = _staged("checkpoint", load_checkpoint, ckpt_path)
    require_files(cfg, "corpus.test")
    corpus = _staged("corpus.test", load_corpus, cfg.corpus_test)
    examples = encode_corpus(corpus, ckpt.vocab, ckpt.thesaurus, ckpt.config.dt_k)
    report = _staged(
        "evaluate",
        evaluate,
        examples,
        ckpt.params,
        ckpt.config,
        threshold=cfg.threshold,
        seed=cfg.seed,
    )
    out_dir = _ensure_out_dir(cfg)
    write_report(report, out_dir / "eval_metrics.txt")
    print(render_table(report))
    return 0


def cmd_predict(args) -> int:
    if not Path(args.checkpoint).is_file():
        raise ConfigError(f"checkpoint: no such file: {args.checkpoint}")
    ckpt = _staged("checkpoint", load_checkpoint, args.checkpoint)
    if not args.text.strip():
        raise ConfigError("empty input text; pass the message to classify")
    tokens = normalize(args.text, ckpt.lexicon)
    if not tokens:
        raise ConfigError("input text produced no tokens")
    example = encode_example(
        Example("input", tokens, OTHER_SENTIMENT, tuple(0 for _ in EMOTIONS)),
        ckpt.vocab,
        ckpt.thesaurus,
        ckpt.config.dt_k,
    )
    trace = _staged("predict", forward, example, ckpt.params, ckpt.config)
    threshold = float(ckpt.meta.get("threshold", 0.5))
    print(f"tokens: {join(tokens)}")
    if "sentiment" in trace.probabilities:
        probs = trace.probabilities["sentiment"]
        print(f"sentiment: {SENTIMENTS[trace.predictions['sentiment']]}")
        print(
            "sentiment probabilities: "
            + " ".join(f"{n}={p:.6f}" for n, p in zip(SENTIMENTS, probs))
        )
    if "emotion" in trace.probabilities:
        probs = trace.probabilities["emotion"]
        active = [n for n, p in zip(EMOTIONS, probs) if p >= threshold]
        print(f"emotions: {' '.join(active)}")
        print(
            "emotion probabilities: "
            + " ".join(f"{n}={p:.6f}" for n, p in zip(EMOTIONS, probs))
        )
    return 0


def _gradcheck_mode(mode: str, seed: int):
    """Tiny random model and loss for one architecture.

    The probe was chosen so no parameter coordinate has a near-zero true
    gradient: central differences on such coordinates amplify float64
    rounding of the loss into relative errors at the 1e-3 tolerance.
    """
    config = ModelConfig(
        mode=mode,
        embed_dim=6,
        lstm_hidden=3,
        context_dim=2,
        dt_k=2,
        dropout_rate=0.0,
        train_embeddings=True,
    )
    params = init_parameters(config, vocab_size=9, seed=seed)
    example = EncodedExample(
        "probe",
        [1, 2, 3],
        [[4, 5], [5, 6], [7, 8]],
        "negative",
        np.array([0, 1, 1, 0, 0, 1, 0, 1], dtype=np.float64),
    )

    def loss_fn(p):
        return joint_loss(forward(example, p, config), example, config)

    return grad_check(loss_fn, params)


def cmd_gradcheck(args) -> int:
    cfg = _load_config(args, required=False)
    modes = [m.strip() for m in args.modes.split(",") if m.strip()]
    if not modes:
        raise ConfigError("no modes requested")
    for mode in modes:
        if mode not in MODES:
            raise ConfigError(f"unknown mode {mode!r}; choose from {', '.join(MODES)}")
    failing: list[str] = []
    for mode in modes:
        report = _gradcheck_mode(mode, cfg.seed)
        status = "ok" if report.ok(GRADCHECK_TOLERANCE) else "FAIL"
        print(
            f"{mode}: max_rel_err={report.max_rel_err:.3e} "
            f"worst={report.worst_param} {status}"
        )
        if not report.ok(GRADCHECK_TOLERANCE):
            failing.extend(
                f"{mode}:{name}"
                for name, err in sorted(report.per_param.items())
                if err >= GRADCHECK_TOLERANCE
            )
    if failing:
        print("failing tensors: " + " ".join(failing))
        return 1
    print(f"gradcheck: all modes below {GRADCHECK_TOLERANCE:g}")
    return 0


def cmd_report(args) -> int:
    cfg = _load_config(args, required=args.metrics is None)
    path = Path(args.metrics) if args.metrics else Path(cfg.out_dir) / "metrics.txt"
    if not path.is_file():
        raise ConfigError(f"metrics: no such file: {path}")
    report = _staged("metrics", parse_metrics, path.read_text(encoding="utf-8"))
    print(render_table(report))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="emosent",
        description="Multi-task sentiment and emotion classifier for tweets.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name: str, func, help_text: str):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="run config file (flat key = value lines)")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--out", help="override the config out_dir")
        p.set_defaults(func=func)
        return p

    p = command("preprocess", cmd_preprocess, "tokenize raw tweets, one per line")
    p.add_argument("input", help="text file with one raw tweet per line")
    command("build-vocab", cmd_build_vocab, "write the vocabulary for a corpus")
    command("train", cmd_train, "train a model and write all artifacts")
    p = command("evaluate", cmd_evaluate, "score a checkpoint on the test corpus")
    p.add_argument("--checkpoint", help="checkpoint path (default: out_dir/checkpoint.bin)")
    p = command("predict", cmd_predict, "classify one message with a checkpoint")
    p.add_argument("checkpoint", help="checkpoint file from a train run")
    p.add_argument("text", help="the message to classify")
    p = command("gradcheck", cmd_gradcheck, "verify gradients against finite differences")
    p.add_argument(
        "--modes",
        default=",".join(MODES),
        help="comma-separated architecture list (default: all six)",
    )
    p = command("report", cmd_report, "render a metrics file as a table")
    p.add_argument("--metrics", help="metrics path (default: out_dir/metrics.txt)")
    return parser


def entrypoint(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(entrypoint())
