"""terratwin: a synthetic country-scale environmental digital twin engine.

Generates a deterministic synthetic country (terrain, land cover, roads,
amenities, hazard history) and serves geohazard classification, proximity
and zonal analytics, what-if siting optimization, wildfire simulation, a
yearly update pipeline, and an HTTP API with usage telemetry.
"""

from .errors import (EmptyClassError, MissingLayerError, ParseError,
                     TwinError, UnknownNodeError, ValidationError)
from .grid import GridSpec, RasterLayer, read_raster, write_raster

__version__ = "0.1.0"

__all__ = [
    "GridSpec", "RasterLayer", "read_raster", "write_raster",
    "TwinError", "ValidationError", "ParseError", "MissingLayerError",
    "EmptyClassError", "UnknownNodeError",
    "__version__",
]
