"""Closed-curve representation and geometric measurements."""

from .curve import (
    MIN_VERTICES,
    Ambient,
    BoundaryField,
    GeometryError,
    MultiCurve,
    PlaneCurve,
    is_simple,
    point_in_curve,
    resample,
    turning_angles,
    vertex_curvature,
    winding_number,
)
from .measures import (
    ShapeMeasures,
    area,
    centroid,
    circumradius,
    curvature,
    inradius,
    is_convex,
    is_star_shaped,
    measures,
    min_enclosing_circle,
    perimeter,
    strip_inner_center,
    strip_sides,
    strip_widths,
    support_function,
)
from .shapes import (
    ShapeSpec,
    annulus,
    disk,
    ellipse,
    folded_stripe,
    from_parametric,
    generate,
    perturbed_disk,
    perturbed_stripe,
    polar,
    random_convex,
    stripe,
    torus_disk,
)
from .io import dumps, fingerprint, from_dict, loads, to_dict

__all__ = [name for name in dir() if not name.startswith("_")]
