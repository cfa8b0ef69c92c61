"""Rigid-body motion planning with a reusable library of guiding paths.

Libraries are prepared offline per template object and environment by
repeatedly planning while inhibiting already-explored corridors; at query
time the most similar template is found by shape matching, its stored paths
are rigidly aligned to the query object, and a guided RRT plans along them.
"""

from .align import (DegenerateGeometryError, IcpResult, RigidTransform,
                    icp_with_guess, solve_rigid, transform_paths)
from .collision import Bvh, config_valid, meshes_intersect, motion_valid
from .bench import (RunResult, Scenario, load_scenarios, run_benchmark,
                    run_single, summarize)
from .diversity import (Path, is_distinct, path_distance, path_length,
                        read_path_file, resample, set_distance,
                        write_path_file)
from .library import (LibraryError, LibraryFormatError, LibraryRecord,
                      PathLibrary, PreparationError, prepare)
from .mesh import (MeshError, MeshLoadError, TriMesh, load_mesh,
                   normalize_to_cube, save_obj, scale_about_centroid)
from .planner import (PlannerParams, PlanResult, Tree, default_bounds,
                      rrt_connect_plan, rrt_ir_plan, rrt_plan)
from .se3 import (Configuration, MetricWeights, Rotation, SampleBounds,
                  config_distance, interpolate, random_rotation,
                  sample_uniform)
from .shape import (CorrespondenceSet, ShapeDescriptor, correspondences,
                    descriptor, select_template, similarity)

__version__ = "0.1.0"

__all__ = [
    "Bvh", "Configuration", "CorrespondenceSet", "DegenerateGeometryError",
    "IcpResult", "LibraryError", "LibraryFormatError", "LibraryRecord",
    "MeshError", "MeshLoadError", "MetricWeights", "Path", "PathLibrary",
    "PlanResult", "PlannerParams", "PreparationError", "RigidTransform",
    "Rotation", "RunResult", "SampleBounds", "Scenario", "ShapeDescriptor",
    "TriMesh", "Tree",
    "config_distance", "config_valid", "correspondences", "default_bounds",
    "descriptor", "icp_with_guess", "interpolate", "is_distinct",
    "load_mesh", "load_scenarios", "meshes_intersect", "motion_valid",
    "normalize_to_cube", "path_distance", "path_length", "prepare",
    "random_rotation", "read_path_file", "resample", "rrt_connect_plan",
    "rrt_ir_plan", "rrt_plan", "run_benchmark", "run_single",
    "sample_uniform", "save_obj", "scale_about_centroid", "select_template",
    "set_distance", "similarity", "solve_rigid", "summarize",
    "write_path_file",
]
