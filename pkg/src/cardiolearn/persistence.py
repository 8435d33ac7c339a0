"""On-disk model artifact format.

Layout (UTF-8 text, LF newlines)::

    CARDIO-LEARN-MODEL
    format_version=1
    [metadata]
    key=value ...
    [encoding]
    ...
    [standardization]        (omitted when the model was not standardized)
    ...
    [payload]
    kind-specific key=value lines; matrices appear as  name=RxC
    followed by R rows of space-separated numerals
    checksum=<crc32 of every preceding byte>

Numerals use shortest round-trip decimal representation, so encoding the same
model twice yields identical bytes and decode restores exact bit patterns.
The checksum is verified before anything after the magic line is parsed.
"""

from __future__ import annotations

import re
import zlib

import numpy as np

from .classifier import ModelMetadata, TrainedModel, normalize_hyperparams
from .dataset import DEFAULT_SCHEMA
from .errors import (
    ChecksumError,
    NotAModelError,
    PersistenceError,
    SchemaError,
    TruncatedFileError,
    VersionError,
)
from .knn import KnnModel
from .logreg import LogRegParams
from .mlp import MlpArchitecture, MlpNetwork
from .preprocess import EncodingSpec, SplitConfig, StandardizationParams
from .svm import KernelSpec, SvmModel

MAGIC = "CARDIO-LEARN-MODEL"
FORMAT_VERSION = 1

_MATRIX_SHAPE = re.compile(r"^(\d+)x(\d+)$")


def _fmt(v: float) -> str:
    return repr(float(v))


def _fmt_vector(v) -> str:
    return " ".join(_fmt(x) for x in v)


def _fmt_ints(v) -> str:
    return " ".join(str(int(x)) for x in v)


def _emit_matrix(lines: list[str], name: str, m: np.ndarray) -> None:
    lines.append(f"{name}={m.shape[0]}x{m.shape[1]}")
    for row in m:
        lines.append(_fmt_vector(row))


def _payload_lines(model: TrainedModel) -> list[str]:
    p = model.params
    lines: list[str] = []
    if model.kind == "logreg":
        assert isinstance(p, LogRegParams)
        lines.append(f"bias={_fmt(p.bias)}")
        lines.append(f"weights={_fmt_vector(p.weights)}")
    elif model.kind == "knn":
        assert isinstance(p, KnnModel)
        lines.append(f"k={p.k}")
        lines.append(f"metric={p.metric}")
        lines.append(f"weighting={p.weighting}")
        lines.append(f"labels={_fmt_ints(p.labels)}")
        _emit_matrix(lines, "points", p.points)
    elif model.kind == "svm":
        assert isinstance(p, SvmModel)
        lines.append(f"kernel={p.kernel.kind}")
        if p.kernel.kind == "rbf":
            lines.append(f"gamma={_fmt(p.kernel.gamma)}")
        lines.append(f"C={_fmt(p.C)}")
        lines.append(f"smo_tol={_fmt(p.smo_tol)}")
        lines.append(f"max_passes={p.max_passes}")
        lines.append(f"converged={'true' if p.converged else 'false'}")
        lines.append(f"bias={_fmt(p.bias)}")
        lines.append(f"alphas={_fmt_vector(p.alphas)}")
        lines.append(f"signed_labels={_fmt_ints(p.signed_labels)}")
        _emit_matrix(lines, "support_vectors", p.support_vectors)
    else:
        assert isinstance(p, MlpNetwork)
        lines.append(f"negative_slope={_fmt(p.architecture.negative_slope)}")
        lines.append(f"layer_widths={_fmt_ints(p.architecture.layer_widths)}")
        for i, (w, b) in enumerate(zip(p.weights, p.biases)):
            _emit_matrix(lines, f"weights{i}", w)
            lines.append(f"biases{i}={_fmt_vector(b)}")
    return lines


def encode_artifact(model: TrainedModel) -> bytes:
    """Deterministic artifact bytes for a trained model."""
    md = model.metadata
    lines = [MAGIC, f"format_version={FORMAT_VERSION}"]

    lines.append("[metadata]")
    lines.append(f"kind={md.kind}")
    lines.append(f"seed={md.seed}")
    lines.append(f"standardize={'true' if md.standardize else 'false'}")
    lines.append(f"data_source={md.data_source}")
    lines.append(f"data_rows={md.data_rows}")
    lines.append(f"schema_fingerprint={md.schema_fingerprint}")
    if md.split is not None:
        split = f"{_fmt(md.split.train_fraction)} {md.split.seed} " + (
            "true" if md.split.stratify else "false"
        )
        lines.append(f"split={split}")
    for key in sorted(md.hyperparams):
        value = md.hyperparams[key]
        if isinstance(value, tuple):
            text = _fmt_ints(value)
        elif isinstance(value, float):
            text = _fmt(value)
        else:
            text = str(value)
        lines.append(f"hyperparams.{key}={text}")

    enc = model.encoding
    lines.append("[encoding]")
    lines.append("one_hot_columns=" + "|".join(enc.one_hot_columns))
    lines.append("passthrough_columns=" + "|".join(enc.passthrough_columns))
    lines.append("output_layout=" + "|".join(enc.output_layout))
    lines.append("numeric_indices=" + _fmt_ints(enc.numeric_indices))

    if model.standardization is not None:
        std = model.standardization
        lines.append("[standardization]")
        lines.append(f"n_features={std.n_features}")
        lines.append("applies_to=" + _fmt_ints(std.applies_to))
        lines.append("means=" + _fmt_vector(std.means))
        lines.append("stds=" + _fmt_vector(std.stds))

    lines.append("[payload]")
    lines.extend(_payload_lines(model))

    body = ("\n".join(lines) + "\n").encode("utf-8")
    crc = zlib.crc32(body)
    return body + f"checksum={crc}\n".encode("utf-8")


class _Reader:
    """Sequential key=value reader over the verified artifact lines."""

    def __init__(self, lines: list[str]):
        self.lines = lines
        self.pos = 0

    def peek(self) -> str | None:
        return self.lines[self.pos] if self.pos < len(self.lines) else None

    def next_line(self) -> str:
        if self.pos >= len(self.lines):
            raise PersistenceError("artifact ended unexpectedly")
        line = self.lines[self.pos]
        self.pos += 1
        return line

    def expect_section(self, name: str) -> None:
        line = self.next_line()
        if line != f"[{name}]":
            raise PersistenceError(f"expected section [{name}], found {line!r}")

    def key_value(self, expected: str | None = None) -> tuple[str, str]:
        line = self.next_line()
        if "=" not in line:
            raise PersistenceError(f"expected key=value line, found {line!r}")
        key, value = line.split("=", 1)
        if expected is not None and key != expected:
            raise PersistenceError(f"expected key {expected!r}, found {key!r}")
        return key, value

    def value(self, expected: str) -> str:
        return self.key_value(expected)[1]

    def matrix(self, expected: str) -> np.ndarray:
        key, shape = self.key_value(expected)
        m = _MATRIX_SHAPE.match(shape)
        if not m:
            raise PersistenceError(f"bad matrix shape for {key!r}: {shape!r}")
        rows, cols = int(m.group(1)), int(m.group(2))
        out = np.empty((rows, cols))
        for r in range(rows):
            parts = self.next_line().split()
            if len(parts) != cols:
                raise PersistenceError(f"matrix {key!r} row {r} has {len(parts)} values, wanted {cols}")
            out[r] = [float(x) for x in parts]
        return out


def _floats(text: str) -> np.ndarray:
    return np.array([float(x) for x in text.split()]) if text else np.array([])


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.split()) if text else ()


def _decode_payload(kind: str, reader: _Reader, hyperparams: dict):
    if kind == "logreg":
        bias = float(reader.value("bias"))
        weights = _floats(reader.value("weights"))
        return LogRegParams(
            l2_lambda=hyperparams["l2_lambda"],
            learning_rate=hyperparams["learning_rate"],
            max_iters=hyperparams["max_iters"],
            tol=hyperparams["tol"],
            weights=weights,
            bias=bias,
        )
    if kind == "knn":
        k = int(reader.value("k"))
        metric = reader.value("metric")
        weighting = reader.value("weighting")
        labels = np.array(_ints(reader.value("labels")), dtype=np.int64)
        points = reader.matrix("points")
        return KnnModel(points=points, labels=labels, k=k, metric=metric, weighting=weighting)
    if kind == "svm":
        kernel_kind = reader.value("kernel")
        gamma = float(reader.value("gamma")) if kernel_kind == "rbf" else None
        kernel = KernelSpec(kernel_kind, gamma)
        C = float(reader.value("C"))
        smo_tol = float(reader.value("smo_tol"))
        max_passes = int(reader.value("max_passes"))
        converged = reader.value("converged") == "true"
        bias = float(reader.value("bias"))
        alphas = _floats(reader.value("alphas"))
        signed = _floats(reader.value("signed_labels"))
        vectors = reader.matrix("support_vectors")
        return SvmModel(
            support_vectors=vectors,
            alphas=alphas,
            signed_labels=signed,
            bias=bias,
            kernel=kernel,
            C=C,
            smo_tol=smo_tol,
            max_passes=max_passes,
            converged=converged,
        )
    slope = float(reader.value("negative_slope"))
    widths = _ints(reader.value("layer_widths"))
    arch = MlpArchitecture(layer_widths=widths, negative_slope=slope)
    weights = []
    biases = []
    for i in range(len(widths) - 1):
        weights.append(reader.matrix(f"weights{i}"))
        biases.append(_floats(reader.value(f"biases{i}")))
    return MlpNetwork(weights, biases, arch)


def decode_artifact(data: bytes) -> TrainedModel:
    """Parse and verify artifact bytes; exact inverse of :func:`encode_artifact`."""
    if len(data) == 0:
        raise TruncatedFileError("artifact file is empty")
    if not data.startswith(MAGIC.encode("utf-8") + b"\n"):
        if not data.startswith(MAGIC.encode("utf-8")[: max(1, min(len(data), len(MAGIC)))]):
            raise NotAModelError("file does not start with the model magic string")
        raise TruncatedFileError("artifact ends inside the magic line")

    newline = data.rfind(b"\n", 0, len(data) - 1)
    last_line = data[newline + 1 :].rstrip(b"\n")
    if not last_line.startswith(b"checksum="):
        raise TruncatedFileError("artifact has no checksum line")
    body = data[: newline + 1]
    try:
        stated = int(last_line[len(b"checksum=") :])
    except ValueError:
        raise ChecksumError("checksum line is not a number") from None
    actual = zlib.crc32(body)
    if stated != actual:
        raise ChecksumError(f"checksum mismatch: stated {stated}, computed {actual}")

    lines = body.decode("utf-8").split("\n")[:-1]
    reader = _Reader(lines)
    reader.next_line()  # magic, already verified
    version = int(reader.value("format_version"))
    if version > FORMAT_VERSION:
        raise VersionError(
            f"artifact format version {version} is newer than supported version {FORMAT_VERSION}"
        )

    reader.expect_section("metadata")
    kind = reader.value("kind")
    seed = int(reader.value("seed"))
    standardize = reader.value("standardize") == "true"
    data_source = reader.value("data_source")
    data_rows = int(reader.value("data_rows"))
    fingerprint = reader.value("schema_fingerprint")
    if fingerprint != DEFAULT_SCHEMA.fingerprint():
        raise SchemaError(
            "artifact schema fingerprint does not match this toolkit's feature schema"
        )
    split = None
    if reader.peek() is not None and reader.peek().startswith("split="):
        parts = reader.value("split").split()
        split = SplitConfig(
            train_fraction=float(parts[0]), seed=int(parts[1]), stratify=parts[2] == "true"
        )
    raw_hp: dict[str, str] = {}
    while reader.peek() is not None and reader.peek().startswith("hyperparams."):
        key, value = reader.key_value()
        raw_hp[key[len("hyperparams.") :]] = value
    hyperparams = normalize_hyperparams(kind, raw_hp)

    reader.expect_section("encoding")
    one_hot = tuple(p for p in reader.value("one_hot_columns").split("|") if p)
    passthrough = tuple(p for p in reader.value("passthrough_columns").split("|") if p)
    layout = tuple(p for p in reader.value("output_layout").split("|") if p)
    numeric_idx = _ints(reader.value("numeric_indices"))
    encoding = EncodingSpec(one_hot, passthrough, layout, numeric_idx)

    standardization = None
    if reader.peek() == "[standardization]":
        reader.expect_section("standardization")
        n_features = int(reader.value("n_features"))
        applies_to = _ints(reader.value("applies_to"))
        means = _floats(reader.value("means"))
        stds = _floats(reader.value("stds"))
        standardization = StandardizationParams(
            means=means, stds=stds, applies_to=applies_to, n_features=n_features
        )

    reader.expect_section("payload")
    params = _decode_payload(kind, reader, hyperparams)

    metadata = ModelMetadata(
        kind=kind,
        seed=seed,
        standardize=standardize,
        hyperparams=hyperparams,
        data_source=data_source,
        data_rows=data_rows,
        schema_fingerprint=fingerprint,
        split=split,
    )
    return TrainedModel(
        kind=kind,
        params=params,
        encoding=encoding,
        standardization=standardization,
        metadata=metadata,
        schema=DEFAULT_SCHEMA,
    )
