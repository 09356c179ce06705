"""Deterministic bag-of-words linear classifiers.

A multiclass perceptron stands in for the usual SVM: same module boundary
(fit/predict over text), zero dependencies, and bit-reproducible training.
No shuffling, integer-valued updates, fixed epoch count; two models trained
this way drive the pipeline, one for statement type and one for table
linking.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .tokens import tokenize

# Instrumentation: bumped on every fit() call so tests can assert that
# question handling never trains.
FIT_INVOCATIONS = 0


class EmptyTrainingSet(ValueError):
    pass


class CorpusParseError(ValueError):
    pass


class ModelFormatError(ValueError):
    pass


@dataclass(frozen=True)
class TrainingExample:
    text: str
    label: str


@dataclass(frozen=True)
class LinearModel:
    classes: tuple[str, ...]
    vocabulary: dict[str, int]
    weights: tuple[tuple[float, ...], ...]  # per class, aligned with vocabulary
    bias: tuple[float, ...]

    def __post_init__(self) -> None:
        for row in self.weights:
            if len(row) != len(self.vocabulary):
                raise ValueError("weight vector length must equal vocabulary size")
        if len(self.weights) != len(self.classes) or len(self.bias) != len(self.classes):
            raise ValueError("per-class shapes disagree with class list")

    def score(self, features: dict[str, int], class_index: int) -> float:
        total = self.bias[class_index]
        row = self.weights[class_index]
        for feat, count in features.items():
            idx = self.vocabulary.get(feat)
            if idx is not None:
                total += row[idx] * count
        return total


def featurize(text: str) -> dict[str, int]:
    """Case-folded unigram and adjacent-bigram counts, in first-seen order."""
    words = [t.lower for t in tokenize(text)]
    features: dict[str, int] = {}
    for w in words:
        features[w] = features.get(w, 0) + 1
    for a, b in zip(words, words[1:]):
        key = f"{a}_{b}"
        features[key] = features.get(key, 0) + 1
    return features


def fit(examples: list[TrainingExample], epochs: int = 10) -> LinearModel:
    """Multiclass perceptron: in-order passes, learning rate 1, no shuffling.

    On a misprediction the example's features (and a constant bias feature)
    are added to the true class and subtracted from the predicted class.
    Classes are ordered by first appearance; ties at prediction time go to
    the earliest class.
    """
    global FIT_INVOCATIONS
    FIT_INVOCATIONS += 1
    if not examples:
        raise EmptyTrainingSet("no training examples")

    classes: list[str] = []
    for ex in examples:
        if ex.label not in classes:
            classes.append(ex.label)
    vocabulary: dict[str, int] = {}
    featurized: list[dict[str, int]] = []
    for ex in examples:
        feats = featurize(ex.text)
        featurized.append(feats)
        for feat in feats:
            if feat not in vocabulary:
                vocabulary[feat] = len(vocabulary)

    class_index = {c: i for i, c in enumerate(classes)}
    weights = [[0.0] * len(vocabulary) for _ in classes]
    bias = [0.0 for _ in classes]

    def argmax(feats: dict[str, int]) -> int:
        best = 0
        best_score = None
        for ci in range(len(classes)):
            total = bias[ci]
            row = weights[ci]
            for feat, count in feats.items():
                total += row[vocabulary[feat]] * count
            if best_score is None or total > best_score:
                best = ci
                best_score = total
        return best

    for _ in range(epochs):
        for ex, feats in zip(examples, featurized):
            truth = class_index[ex.label]
            guess = argmax(feats)
            if guess != truth:
                for feat, count in feats.items():
                    idx = vocabulary[feat]
                    weights[truth][idx] += count
                    weights[guess][idx] -= count
                bias[truth] += 1.0
                bias[guess] -= 1.0

    return LinearModel(
        classes=tuple(classes),
        vocabulary=vocabulary,
        weights=tuple(tuple(row) for row in weights),
        bias=tuple(bias),
    )


def predict(model: LinearModel, text: str) -> tuple[str, float]:
    """Argmax class and its score; unknown features contribute nothing."""
    features = featurize(text)
    best_index = 0
    best_score: float | None = None
    for ci in range(len(model.classes)):
        score = model.score(features, ci)
        if best_score is None or score > best_score:
            best_index = ci
            best_score = score
    assert best_score is not None
    return model.classes[best_index], best_score


# ---------------------------------------------------------------------------
# persistence

_HEADER = "linmodel v1"


def save_model(model: LinearModel, path: str | Path) -> None:
    """Write the text format; identical models produce identical bytes."""
    features = [""] * len(model.vocabulary)
    for feat, idx in model.vocabulary.items():
        features[idx] = feat
    lines = [
        _HEADER,
        "\t".join(["classes", *model.classes]),
        "\t".join(["features", *features]),
        "\t".join(["bias", *(repr(b) for b in model.bias)]),
    ]
    for cls, row in zip(model.classes, model.weights):
        lines.append("\t".join(["weights", cls, *(repr(w) for w in row)]))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> LinearModel:
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines or lines[0] != _HEADER:
        raise ModelFormatError(f"missing '{_HEADER}' header")
    if len(lines) < 4:
        raise ModelFormatError("truncated model file")
    class_parts = lines[1].split("\t")
    feature_parts = lines[2].split("\t")
    bias_parts = lines[3].split("\t")
    if class_parts[0] != "classes" or feature_parts[0] != "features" or bias_parts[0] != "bias":
        raise ModelFormatError("unexpected section order")
    classes = tuple(class_parts[1:])
    vocabulary = {feat: i for i, feat in enumerate(feature_parts[1:])}
    bias = tuple(float(b) for b in bias_parts[1:])
    weights: list[tuple[float, ...]] = []
    for line in lines[4:]:
        parts = line.split("\t")
        if parts[0] != "weights":
            raise ModelFormatError("unexpected line in weights section")
        weights.append(tuple(float(w) for w in parts[2:]))
    if len(weights) != len(classes):
        raise ModelFormatError("weight row count disagrees with class list")
    return LinearModel(classes=classes, vocabulary=vocabulary, weights=tuple(weights), bias=bias)


def load_corpus(path: str | Path) -> list[TrainingExample]:
    """Parse ``label<TAB>text`` lines; blank lines and '#' comments skipped."""
    examples: list[TrainingExample] = []
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not raw.strip() or raw.lstrip().startswith("#"):
            continue
        parts = raw.split("\t", 1)
        if len(parts) != 2 or not parts[0].strip():
            raise CorpusParseError(f"line {lineno}: expected label<TAB>text")
        examples.append(TrainingExample(text=parts[1].strip(), label=parts[0].strip()))
    return examples
