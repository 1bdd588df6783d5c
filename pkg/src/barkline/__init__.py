"""Panel boundary geometry for automated bark removal.

Converts a wood-panel segmentation mask into machine control data:
boundary edge detection (vertical-gradient convolution), robust boundary
line fitting (Tukey-reweighted least squares), and attitude / cuttable
width / travel computation through a calibration profile. Also provides
the MIoU/MPA segmentation metrics and a synthetic mask generator used as
the verification oracle.
"""
from .edgedetect import (Boundary, EdgeDetectParams, EdgePointSet,
                         extract_boundary_points, filter_segments)
from .imagecore import ClassMask, GrayImage, load_mask, mask_to_gray, save_mask
from .keydata import (Attitude, CalibrationProfile, CuttingChannel,
                      PanelKeyData, compute_attitude, compute_keydata,
                      cuttable_width, select_channel)
from .pipeline import PanelAnalysis, analyze_mask
from .robustfit import LineFit, TukeyParams, fit_line, ols_fit
from .segeval import ConfusionMatrix, SegEvalReport, accumulate, miou, mpa
from .synthgen import (FlipHorizontal, GroundTruth, MirrorVertical, PanelSpec,
                       Rotate, augment, generate, transform_ground_truth)

__version__ = "0.1.0"
