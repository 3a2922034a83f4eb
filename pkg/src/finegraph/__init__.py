"""Fine graphs, equivariant surgery and relative quasiconvexity, measured on finite windows."""

from .groups import FiniteGroup, FreeGroup, FreeProduct, GroupError, Subgroup, intersect
from .eqgraph import (DisconnectedError, EdgeOrbit, EquivariantGraphSpec, GraphError,
                      InfiniteValenceError, InversionError, VertexOrbit, Window,
                      circuits_through_edge, embedded_paths, fineness_certificate, geodesic,
                      group_window, materialize_ball)
from .cayley import (ConedOffSpec, Peripheral, RelativeCayleyGraph, RelativeGenerationError,
                     RelPath, cayley_graph, coned_off, phi)
from .surgery import (NEW, attach_arc, attach_edge, hull_c, joint_embedding, remove_edge_orbit,
                      remove_vertex_orbit)
from .hyp_metric import (delta_estimate, epsilon_slim, fellow_travel_constant, is_quasigeodesic,
                         split_geodesic)
from .ladder import LadderError, build_simple_ladder, build_xn, verify_ladder
from .quasiconvex import (distortion_series, hat_sigma, induced_peripheral_structure, osin_sigma,
                          parabolic_approx_l, relative_generators, transfer_witness)

__version__ = "0.1.0"
