"""Correlated bond-triangular ("flower") percolation on the hexagonal lattice."""
from .lattice import (
    Domain,
    FloralArrangement,
    HexCoord,
    Vertex,
    build_annulus_domain,
    build_hexagon_domain,
    build_parallelogram_domain,
    build_rectangle_domain,
    build_triangle_domain,
    periodic_floral_arrangement,
    validate_arrangement,
)
from .model import (
    B,
    Color,
    Configuration,
    HexState,
    ModelParams,
    Y,
    config_weight,
    enumerate_configurations,
    iris_law,
    is_trigger,
    sample_configuration,
)

__version__ = "0.1.0"
