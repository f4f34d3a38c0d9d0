"""Synthetic object-detection datasets from CAD triangle meshes.

Generates randomized scenes from STL parts, renders them with a software
rasterizer, extracts COCO/YOLO annotations, and evaluates detector
predictions with standard mAP metrics.
"""

__version__ = "0.1.0"

from .annotate import (
    InstanceStats,
    YoloRecord,
    coco_to_yolo,
    extract_instances,
    filter_instances,
    parse_coco,
    parse_yolo,
    write_coco,
)
from .camera import Camera, project
from .errors import ConfigError, DataError, PipelineError, StlError
from .evaluation import (
    Detection,
    EvalReport,
    GroundTruth,
    average_precision,
    evaluate,
    iou,
    match_detections,
    training_iterations,
)
from .mesh import Aabb, Pose, TriangleMesh, aabb, mesh_to_stl, parse_stl, transform
from .raster import RenderOutput, rasterize, solo_pixel_count
from .scene import (
    RandomizationRange,
    Scene,
    SceneObject,
    SceneSpec,
    build_scene,
    detect_collisions,
    sample_pose,
    settle,
)
from .shading import CheckerTexture, Light, Material, WaveTexture, shade

__all__ = [
    "Aabb", "Camera", "CheckerTexture", "ConfigError", "DataError", "Detection",
    "EvalReport", "GroundTruth", "InstanceStats", "Light", "Material", "PipelineError",
    "Pose", "RandomizationRange", "RenderOutput", "Scene", "SceneObject", "SceneSpec",
    "StlError", "TriangleMesh", "WaveTexture", "YoloRecord", "aabb", "average_precision",
    "build_scene", "coco_to_yolo", "detect_collisions", "evaluate", "extract_instances",
    "filter_instances", "iou", "match_detections", "mesh_to_stl", "parse_coco",
    "parse_stl", "parse_yolo", "project", "rasterize", "sample_pose", "settle",
    "shade", "solo_pixel_count", "training_iterations", "transform", "write_coco",
]
