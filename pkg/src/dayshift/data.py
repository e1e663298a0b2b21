"""Dataset loading and deterministic preprocessing.

Supported input rasters: PNG, JPEG, BMP (8-bit RGB; other modes are
converted to RGB on decode).
"""

import csv
import os
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import DatasetError, ManifestError, NumericError, VocabularyError

CLASS_NAMES = ("bike", "bus", "car", "people", "sign", "traffic_sign")
CLASS_DISPLAY_NAMES = ("bike", "bus", "car", "people", "sign", "traffic sign")
NUM_CLASSES = len(CLASS_NAMES)

IMAGE_EXTENSIONS = (".png", ".jpg", ".jpeg", ".bmp")

TRANSLATION_LOAD_SIZE = 286
TRANSLATION_CROP_SIZE = 256
DETECTION_SIZE = 300


@dataclass(frozen=True)
class ImageTensor:
    """Float32 image, [3, H, W], values in [-1, 1]."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float32)
        if arr.ndim != 3 or arr.shape[0] != 3:
            raise ValueError(f"expected [3, H, W], got shape {arr.shape}")
        if not np.isfinite(arr).all():
            raise NumericError("image tensor contains non-finite values")
        if arr.min() < -1.0 or arr.max() > 1.0:
            raise ValueError("image tensor values outside [-1, 1]")
        object.__setattr__(self, "data", arr)

    @property
    def height(self):
        return self.data.shape[1]

    @property
    def width(self):
        return self.data.shape[2]


@dataclass(frozen=True)
class UnpairedDataset:
    domain_a_paths: tuple  # night
    domain_b_paths: tuple  # day
    correspondences: Optional[tuple] = None  # (night_index, day_index) pairs

    def __post_init__(self):
        if not self.domain_a_paths or not self.domain_b_paths:
            raise DatasetError("both domains must be non-empty")
        if self.correspondences is not None:
            for ai, bi in self.correspondences:
                if not (0 <= ai < len(self.domain_a_paths)):
                    raise DatasetError(f"night index {ai} out of range")
                if not (0 <= bi < len(self.domain_b_paths)):
                    raise DatasetError(f"day index {bi} out of range")


@dataclass(frozen=True)
class AnnotatedSample:
    """One detection image with normalized corner-form boxes."""

    image_path: str
    boxes: tuple = ()  # (class_id, x_min, y_min, x_max, y_max)

    def __post_init__(self):
        for box in self.boxes:
            class_id, x_min, y_min, x_max, y_max = box
            if not (0 <= class_id < NUM_CLASSES):
                raise VocabularyError(
                    f"{self.image_path}: class id {class_id} outside 0..{NUM_CLASSES - 1}"
                )
            if not (x_min < x_max and y_min < y_max):
                raise DatasetError(
                    f"{self.image_path}: degenerate box {(x_min, y_min, x_max, y_max)}"
                )
            for v in (x_min, y_min, x_max, y_max):
                if not (0.0 <= v <= 1.0):
                    raise DatasetError(
                        f"{self.image_path}: coordinate {v} outside [0, 1]"
                    )


def _list_images(directory):
    if not os.path.isdir(directory):
        raise DatasetError(f"not a directory: {directory}")
    paths = sorted(
        os.path.join(directory, name)
        for name in os.listdir(directory)
        if name.lower().endswith(IMAGE_EXTENSIONS)
    )
    if not paths:
        raise DatasetError(f"no images found in {directory}")
    return tuple(paths)


def load_unpaired_dataset(night_dir, day_dir, correspondence_file=None):
    """Load the two unpaired domains, paths sorted lexicographically."""
    night = _list_images(night_dir)
    day = _list_images(day_dir)
    correspondences = None
    if correspondence_file is not None:
        correspondences = _parse_correspondences(correspondence_file)
    return UnpairedDataset(night, day, correspondences)


def _parse_correspondences(path):
    pairs = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 2:
                raise ManifestError(f"{path}:{lineno}: expected two columns, got {row}")
            try:
                pairs.append((int(row[0]), int(row[1])))
            except ValueError:
                raise ManifestError(f"{path}:{lineno}: non-integer index in {row}")
    return tuple(pairs)


def load_detection_dataset(manifest_path):
    """Parse the tab-separated detection manifest into annotated samples.

    Record format: ``image_path<TAB>class,x_min,y_min,x_max,y_max[;...]``
    with an empty box field allowed for negatives-only images.
    """
    if not os.path.isfile(manifest_path):
        raise DatasetError(f"manifest not found: {manifest_path}")
    base = os.path.dirname(os.path.abspath(manifest_path))
    samples = []
    with open(manifest_path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) not in (1, 2):
                raise ManifestError(
                    f"{manifest_path}:{lineno}: expected path<TAB>boxes, got {len(parts)} fields"
                )
            image_path = parts[0]
            if not os.path.isabs(image_path):
                image_path = os.path.join(base, image_path)
            boxes = []
            box_field = parts[1] if len(parts) == 2 else ""
            if box_field.strip():
                for token in box_field.split(";"):
                    boxes.append(_parse_box(token, manifest_path, lineno))
            try:
                samples.append(AnnotatedSample(image_path, tuple(boxes)))
            except (DatasetError, VocabularyError) as exc:
                raise type(exc)(f"{manifest_path}:{lineno}: {exc}") from None
    if not samples:
        raise DatasetError(f"manifest is empty: {manifest_path}")
    return samples


def _parse_box(token, manifest_path, lineno):
    fields = token.split(",")
    if len(fields) != 5:
        raise ManifestError(
            f"{manifest_path}:{lineno}: box needs class,x_min,y_min,x_max,y_max: {token!r}"
        )
    name = fields[0].strip()
    if name not in CLASS_NAMES:
        raise VocabularyError(f"{manifest_path}:{lineno}: unknown class {name!r}")
    try:
        coords = [float(v) for v in fields[1:]]
    except ValueError:
        raise ManifestError(f"{manifest_path}:{lineno}: non-numeric coordinate in {token!r}")
    return (CLASS_NAMES.index(name), *coords)


def decode_image(path):
    """Decode an image file into an 8-bit RGB array [H, W, 3]."""
    try:
        with Image.open(path) as img:
            return np.asarray(img.convert("RGB"), dtype=np.uint8)
    except (UnidentifiedImageError, OSError) as exc:
        raise DatasetError(f"cannot decode image {path}: {exc}") from None


def _resize(raw, width, height):
    return np.asarray(
        Image.fromarray(raw).resize((width, height), Image.BILINEAR), dtype=np.uint8
    )


def _to_tensor(raw):
    # uint8 HWC -> float32 CHW in [-1, 1]
    arr = raw.astype(np.float32) / 127.5 - 1.0
    return ImageTensor(np.ascontiguousarray(arr.transpose(2, 0, 1)))


def preprocess(raw_image, mode, target, seed=0,
               translation_load_size=TRANSLATION_LOAD_SIZE,
               translation_crop_size=TRANSLATION_CROP_SIZE,
               detection_size=DETECTION_SIZE):
    """Deterministically preprocess a decoded 8-bit image.

    translation/train: resize to the load size, seeded random crop to the
    crop size, seeded horizontal flip. translation/eval: resize to the crop
    size. detection: resize to the detector input size (train adds a seeded
    flip; use :func:`preprocess_annotated` when boxes must flip with it).
    """
    raw = np.asarray(raw_image)
    if raw.ndim != 3 or raw.shape[2] != 3 or raw.size == 0:
        raise DatasetError(f"expected a non-empty H x W x 3 image, got shape {raw.shape}")
    if mode not in ("train", "eval"):
        raise ValueError(f"unknown mode {mode!r}")
    if target == "translation":
        if mode == "train":
            rng = np.random.default_rng(seed)
            raw = _resize(raw, translation_load_size, translation_load_size)
            margin = translation_load_size - translation_crop_size
            top = int(rng.integers(0, margin + 1))
            left = int(rng.integers(0, margin + 1))
            raw = raw[top:top + translation_crop_size, left:left + translation_crop_size]
            if rng.random() < 0.5:
                raw = raw[:, ::-1]
        else:
            raw = _resize(raw, translation_crop_size, translation_crop_size)
        return _to_tensor(raw)
    if target == "detection":
        tensor, _ = preprocess_annotated(raw, (), mode, seed, detection_size)
        return tensor
    raise ValueError(f"unknown target {target!r}")


def preprocess_annotated(raw_image, boxes, mode, seed=0, detection_size=DETECTION_SIZE):
    """Preprocess a detection image together with its boxes.

    Returns ``(ImageTensor, boxes)`` with boxes mirrored whenever the seeded
    train-mode flip fires.
    """
    raw = np.asarray(raw_image)
    if raw.ndim != 3 or raw.shape[2] != 3 or raw.size == 0:
        raise DatasetError(f"expected a non-empty H x W x 3 image, got shape {raw.shape}")
    raw = _resize(raw, detection_size, detection_size)
    boxes = tuple(boxes)
    if mode == "train":
        rng = np.random.default_rng(seed)
        if rng.random() < 0.5:
            raw = raw[:, ::-1]
            boxes = tuple(
                (c, 1.0 - x_max, y_min, 1.0 - x_min, y_max)
                for c, x_min, y_min, x_max, y_max in boxes
            )
    return _to_tensor(raw), boxes


def denormalize(tensor):
    """Map an ImageTensor back to an 8-bit [H, W, 3] array."""
    arr = tensor.data if isinstance(tensor, ImageTensor) else np.asarray(tensor, dtype=np.float32)
    if not np.isfinite(arr).all():
        raise NumericError("cannot denormalize non-finite values")
    out = np.rint((arr + 1.0) * 127.5)
    out = np.clip(out, 0, 255).astype(np.uint8)
    return np.ascontiguousarray(out.transpose(1, 2, 0))
