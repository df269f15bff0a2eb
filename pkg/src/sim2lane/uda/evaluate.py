"""Checkpoint evaluation: decode predictions and score them against labels."""

from __future__ import annotations

from dataclasses import dataclass

import cv2
import numpy as np
import torch

from ..data.dataset import FrameDataset
from ..detector.model import RowAnchorDetector
from ..errors import UndefinedMetricError
from ..laneclasses import LaneClassMapping, map_lane_class
from ..metrics import classification_accuracy, tusimple_accuracy
from ..rowanchor import LanePointLabel, decode_prediction
from ..translation.state import TranslationState, image_to_tensor


@dataclass
class EvalResult:
    det_acc: float | None
    cls_acc: float | None
    num_frames: int

    def as_log(self) -> dict:
        return {"det_acc": self.det_acc, "cls_acc": self.cls_acc, "frames": self.num_frames}


class LanePredictor:
    """Runs the detector on images, optionally through a latent encoder.

    When ``encoder_state`` is given, images are first encoded with the
    target-domain content encoder and the detector consumes the latent map.
    """

    def __init__(
        self,
        detector: RowAnchorDetector,
        mapping: LaneClassMapping | None = None,
        refine: str = "expectation",
        encoder_state: TranslationState | None = None,
        encode_domain: str = "real",
    ):
        self.detector = detector
        self.mapping = mapping or LaneClassMapping()
        self.refine = refine
        self.encoder_state = encoder_state
        self.encode_domain = encode_domain

    def _prepare(self, image: np.ndarray) -> torch.Tensor:
        h_in, w_in = self.detector.cfg.input_size
        if image.shape[:2] != (h_in, w_in):
            image = cv2.resize(image, (w_in, h_in), interpolation=cv2.INTER_LINEAR)
        if self.encoder_state is not None:
            return image_to_tensor(image)
        return self.detector.normalize_image(image)

    @torch.no_grad()
    def predict(self, image: np.ndarray) -> tuple[LanePointLabel, list[int | None]]:
        self.detector.eval()
        x = self._prepare(image).unsqueeze(0)
        if self.encoder_state is not None:
            self.encoder_state.eval()
            x = self.encoder_state.encode(x, self.encode_domain, training=False).content
        out = self.detector(x, with_seg=False)
        probs = out.location_probs()[0].cpu().numpy().astype(np.float64)
        probs /= probs.sum(axis=-1, keepdims=True)
        label = decode_prediction(probs, self.detector.cfg, refine=self.refine)
        classes: list[int | None] = []
        cls_pred = out.class_logits[0].argmax(dim=-1).cpu().numpy()
        for i in range(label.num_lanes):
            classes.append(int(cls_pred[i]) if label.presence[i] else None)
        return label, classes


def evaluate_on_dataset(
    predictor: LanePredictor,
    dataset: FrameDataset,
    width_threshold_px: float = 20.0,
) -> EvalResult:
    """Detection accuracy over all frames plus classification accuracy when
    the dataset carries class labels for every present lane."""
    preds: list[LanePointLabel] = []
    gts: list[LanePointLabel] = []
    pred_classes: list[list[int | None]] = []
    gt_classes: list[list[int | None]] = []
    gt_presence: list[list[bool]] = []

    mapping = predictor.mapping
    for sample in dataset:
        if sample.label is None:
            continue
        label, classes = predictor.predict(sample.image)
        preds.append(label)
        gts.append(sample.label)
        n = sample.label.num_lanes
        pred_classes.append((classes + [None] * n)[:n])
        gt_classes.append(
            [
                int(map_lane_class(c, mapping)) if c is not None else None
                for c in sample.label.raw_class_ids
            ]
        )
        gt_presence.append(list(sample.label.presence))

    if not gts:
        return EvalResult(det_acc=None, cls_acc=None, num_frames=0)
    try:
        det = tusimple_accuracy(preds, gts, width_threshold_px)
    except UndefinedMetricError:
        det = None
    cls_defined = any(p for frame in gt_presence for p in frame) and all(
        c is not None
        for frame_c, frame_p in zip(gt_classes, gt_presence)
        for c, p in zip(frame_c, frame_p)
        if p
    )
    cls = None
    if cls_defined:
        cls = classification_accuracy(pred_classes, gt_classes, gt_presence)
    return EvalResult(det_acc=det, cls_acc=cls, num_frames=len(gts))
