"""Structure-preserving clustering reduction of physical network systems."""

from .errors import (DisconnectedGraphError, H2UndefinedError, InputError,
                     IntegrationError)
from .graph import (DAMPER, SPRING, Edge, NetworkGraph, effective_laplacian,
                    incidence_matrix, input_matrix, is_connected, weighted_laplacian)
from .h2 import (H2Report, build_report, effective_eigendecomposition, gramian_closed_form,
                 h2_error_oracle, h2_full_closed_form, h2_oracle, h2_reduced_closed_form,
                 reduction_error_formula)
from .partition import (AepWitness, Partition, QuotientSpec, characteristic_matrix,
                        check_aep_definition, check_aep_subspace, enumerate_aeps,
                        synthesize_aep_graph)
from .reduction import (FirstOrderModel, ReductionResult, assemble_first_order,
                        decoupling_transform, petrov_galerkin_factors, reduce_first_order)
from .second_order import (SecondOrderModel, assemble_second_order, check_joint_aep,
                           h2_error_second_order, hamiltonian, reduce_second_order)
from .simulate import Signal, Trajectory, compare, dissipation_residual, integrate

__version__ = "0.1.0"
