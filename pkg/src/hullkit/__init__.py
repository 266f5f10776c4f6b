"""hullkit: parametric ship hulls, thin-ship drag, and surrogate optimization.

Generate feasible hull geometries from a 45-term parameterization, compute
wave and total resistance over a 4-draft x 8-Froude condition grid, rebuild
existing hulls from point clouds by Chamfer fitting, batch-produce labeled
datasets, and run surrogate-driven drag optimization.
"""

from .errors import (DomainError, HullKitError, InfeasibleHullError,
                     InvalidParamsError, ModelFormatError, ParseError,
                     SamplingError)
from .params import (PARAM_NAMES, FeasibilityReport, HullParameters,
                     ParameterRanges, check_feasibility, load_params,
                     sample_hull, save_params)
from .surface import HullSurface, PointCloud, WigleySurface, generate_point_cloud
from .mesh import (TriangleMesh, displaced_volume, export_stl, generate_mesh,
                   is_watertight, load_mesh, scale_to_displacement,
                   self_intersects, wetted_surface_area)
from .hydro import (DragTable, FlowConditions, OffsetGrid, friction_coefficient,
                    froude_to_speed, interpolate_cw, michell_wave_resistance,
                    offsets_from_surface, speed_to_froude, sweep_32,
                    total_resistance, wave_drag_coefficient, wigley_offsets)
from .chamfer import ChamferResult, chamfer_distance, load_target_cloud
from .surrogate import (SurrogateModel, TrainingConfig, r_squared, train)
from .evolve import (DragCondition, GaConfig, ParetoSet, mask_for,
                     optimize_drag, reconstruct_hull)
from .dataset import (DatasetConfig, DatasetManifest, build_dataset,
                      dataset_stats, resume)
from .views import render_views

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
