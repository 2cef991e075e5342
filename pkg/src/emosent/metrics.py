"""Classification metrics, confusion matrices, and metric report files.

Conventions fixed here: confusion matrices have rows = actual and columns
= predicted; sentiment macro-F1 averages the negative and positive class
F1 over examples whose gold label is one of the two (the "other" label is
never scored); emotion micro metrics come from TP/FP/FN summed across the
eight labels; any zero denominator yields 0 rather than an error.

The metrics file is flat `key = value` text. Floats are written with
repr, so parse(render(report)) reproduces the report exactly.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .resources import EMOTIONS

Confusion = tuple[tuple[int, int], tuple[int, int]]


@dataclass(frozen=True)
class ClassPRF:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class SentimentMetrics:
    confusion: Confusion
    negative: ClassPRF
    positive: ClassPRF
    macro_f1: float


@dataclass(frozen=True)
class EmotionMetrics:
    confusions: dict[str, Confusion]
    per_label: dict[str, ClassPRF]
    micro: ClassPRF


@dataclass(frozen=True)
class MetricsReport:
    mode: str
    seed: int
    epoch: int
    sentiment: SentimentMetrics | None
    emotion: EmotionMetrics | None


def prf(tp: int, fp: int, fn: int) -> ClassPRF:
    """Precision/recall/F1 from counts; zero denominators give zero."""
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = (
        2.0 * precision * recall / (precision + recall)
        if precision + recall
        else 0.0
    )
    return ClassPRF(precision, recall, f1)


def confusion_counts(gold: Sequence[int], predicted: Sequence[int]) -> Confusion:
    """2x2 counts for binary labels; rows actual (0 then 1), columns predicted."""
    if len(gold) != len(predicted):
        raise ValueError(
            f"gold and predicted lengths differ: {len(gold)} vs {len(predicted)}"
        )
    cells = [[0, 0], [0, 0]]
    for g, p in zip(gold, predicted):
        cells[int(g)][int(p)] += 1
    return ((cells[0][0], cells[0][1]), (cells[1][0], cells[1][1]))


def sentiment_metrics_from_counts(tn: int, fp: int, fn: int, tp: int) -> SentimentMetrics:
    """Sentiment scores from the 2x2 counts (positive is class 1).

    The negative class swaps roles: its true positives are the TN cell.
    """
    negative = prf(tp=tn, fp=fn, fn=fp)
    positive = prf(tp=tp, fp=fp, fn=fn)
    return SentimentMetrics(
        confusion=((tn, fp), (fn, tp)),
        negative=negative,
        positive=positive,
        macro_f1=(negative.f1 + positive.f1) / 2.0,
    )


def sentiment_metrics(gold: Sequence[int], predicted: Sequence[int]) -> SentimentMetrics:
    """Scores over 0/1 sentiment labels (0 negative, 1 positive)."""
    (tn, fp), (fn, tp) = confusion_counts(gold, predicted)
    return sentiment_metrics_from_counts(tn, fp, fn, tp)


def emotion_metrics(
    gold_bits: Sequence[Sequence[int]], predicted_bits: Sequence[Sequence[int]]
) -> EmotionMetrics:
    """Per-label and micro-averaged scores over 8-bit emotion vectors."""
    if len(gold_bits) != len(predicted_bits):
        raise ValueError(
            f"gold and predicted lengths differ: {len(gold_bits)} vs {len(predicted_bits)}"
        )
    confusions: dict[str, Confusion] = {}
    per_label: dict[str, ClassPRF] = {}
    total_tp = total_fp = total_fn = 0
    for i, label in enumerate(EMOTIONS):
        gold_i = [int(bits[i]) for bits in gold_bits]
        pred_i = [int(bits[i]) for bits in predicted_bits]
        (tn, fp), (fn, tp) = confusion_counts(gold_i, pred_i)
        confusions[label] = ((tn, fp), (fn, tp))
        per_label[label] = prf(tp, fp, fn)
        total_tp += tp
        total_fp += fp
        total_fn += fn
    return EmotionMetrics(confusions, per_label, prf(total_tp, total_fp, total_fn))


def _flat_items(report: MetricsReport) -> list[tuple[str, object]]:
    items: list[tuple[str, object]] = [
        ("meta.mode", report.mode),
        ("meta.seed", report.seed),
        ("meta.epoch", report.epoch),
    ]
    if report.sentiment is not None:
        s = report.sentiment
        (tn, fp), (fn, tp) = s.confusion
        items += [
            ("sentiment.confusion.tn", tn),
            ("sentiment.confusion.fp", fp),
            ("sentiment.confusion.fn", fn),
            ("sentiment.confusion.tp", tp),
        ]
        for cls_name, cls in (("negative", s.negative), ("positive", s.positive)):
            items += [
                (f"sentiment.{cls_name}.precision", cls.precision),
                (f"sentiment.{cls_name}.recall", cls.recall),
                (f"sentiment.{cls_name}.f1", cls.f1),
            ]
        items.append(("sentiment.macro_f1", s.macro_f1))
    if report.emotion is not None:
        e = report.emotion
        for label in EMOTIONS:
            (tn, fp), (fn, tp) = e.confusions[label]
            items += [
                (f"emotion.{label}.confusion.tn", tn),
                (f"emotion.{label}.confusion.fp", fp),
                (f"emotion.{label}.confusion.fn", fn),
                (f"emotion.{label}.confusion.tp", tp),
                (f"emotion.{label}.precision", e.per_label[label].precision),
                (f"emotion.{label}.recall", e.per_label[label].recall),
                (f"emotion.{label}.f1", e.per_label[label].f1),
            ]
        items += [
            ("emotion.micro.precision", e.micro.precision),
            ("emotion.micro.recall", e.micro.recall),
            ("emotion.micro.f1", e.micro.f1),
        ]
    return items


def render_metrics(report: MetricsReport) -> str:
    lines = [f"{key} = {value!r}" for key, value in _flat_items(report)]
    return "\n".join(lines) + "\n"


def parse_metrics(text: str) -> MetricsReport:
    values: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"metrics line {lineno}: expected 'key = value'")
        key, _, raw = line.partition("=")
        values[key.strip()] = raw.strip()

    def f(key: str) -> float:
        return float(values[key])

    def c(prefix: str) -> Confusion:
        return (
            (int(values[f"{prefix}.tn"]), int(values[f"{prefix}.fp"])),
            (int(values[f"{prefix}.fn"]), int(values[f"{prefix}.tp"])),
        )

    def cls(prefix: str) -> ClassPRF:
        return ClassPRF(f(f"{prefix}.precision"), f(f"{prefix}.recall"), f(f"{prefix}.f1"))

    sentiment = None
    if "sentiment.macro_f1" in values:
        sentiment = SentimentMetrics(
            c("sentiment.confusion"),
            cls("sentiment.negative"),
            cls("sentiment.positive"),
            f("sentiment.macro_f1"),
        )
    emotion = None
    if "emotion.micro.f1" in values:
        emotion = EmotionMetrics(
            {label: c(f"emotion.{label}.confusion") for label in EMOTIONS},
            {label: cls(f"emotion.{label}") for label in EMOTIONS},
            cls("emotion.micro"),
        )
    mode = values["meta.mode"]
    if mode.startswith("'") and mode.endswith("'"):
        mode = mode[1:-1]
    return MetricsReport(
        mode, int(values["meta.seed"]), int(values["meta.epoch"]), sentiment, emotion
    )


def render_table(report: MetricsReport) -> str:
    """Human-readable summary: one P/R/F row per target plus averages."""
    lines = [f"Mode {report.mode} (seed {report.seed}, epoch {report.epoch})", ""]
    if report.sentiment is not None:
        s = report.sentiment
        lines.append("Sentiment")
        lines.append(f"  {'':12s}{'precision':>10s}{'recall':>10s}{'f1':>10s}")
        for name, m in (("negative", s.negative), ("positive", s.positive)):
            lines.append(
                f"  {name:12s}{m.precision:10.4f}{m.recall:10.4f}{m.f1:10.4f}"
            )
        lines.append(f"  {'macro-F1':12s}{'':10s}{'':10s}{s.macro_f1:10.4f}")
        lines.append("")
    if report.emotion is not None:
        e = report.emotion
        lines.append("Emotion")
        lines.append(f"  {'':12s}{'precision':>10s}{'recall':>10s}{'f1':>10s}")
        for label in EMOTIONS:
            m = e.per_label[label]
            lines.append(
                f"  {label:12s}{m.precision:10.4f}{m.recall:10.4f}{m.f1:10.4f}"
            )
        lines.append(
            f"  {'Micro-Avg':12s}{e.micro.precision:10.4f}"
            f"{e.micro.recall:10.4f}{e.micro.f1:10.4f}"
        )
        lines.append("")
    return "\n".join(lines)
