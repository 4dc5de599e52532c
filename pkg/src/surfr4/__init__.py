"""Local invariants, principal nets and reconstruction of surfaces in R^4."""

from .bonnet import derive_metric_from_invariants, reconstruct, rigid_align
from .errors import (DegeneratePointError, DomainError, ImmersionError, InputError, SurfaceError,
                     ThresholdError)
from .frame import geometric_frame, pointwise_frame
from .net import InvariantFieldGrid, build_net, check_integrability
from .pointwise import PointClass, invariant_record
from .surface_jets import SurfaceModel, catalog, catalog_names, evaluate_jet, from_coordinates

__version__ = "0.1.0"
