"""Collective geometric phase gates for charge qubits on a cavity bus.

Simulates N charge qubits coupled through one cavity mode: the closed-form
loop propagator, one-shot cluster-state generation, thermal-state
insensitivity, open-system (Lindblad) behaviour, and feasibility estimates.
Hot propagation loops run on compiled kernels when the extension is built,
with a pure numpy fallback selected at import (see cavibus._backend).
"""
from ._backend import HAVE_COMPILED, backend_name
from .spaces import (HilbertSpace, StateVector, DensityOperator, LinearOperator,
                     qubit_space, joint_space, basis_index, basis_state,
                     embed_qubit_operator, embed_cavity_operator, collective_jx,
                     displacement_operator, apply, expectation, partial_trace,
                     fidelity, operator_distance, truncation_config)
from .model import (SystemParams, QubitParams, CavityParams, DriveParams,
                    default_params, josephson_energy, single_qubit_hamiltonian,
                    lamb_dicke_hamiltonian, lab_frame_hamiltonian,
                    interaction_frame, HBAR_UEV_NS)
from .propagator import (BTrajectory, IntegratorConfig, TermHamiltonian,
                         b_of_t, b_trajectory, loop_radius, phase_exponent,
                         closed_form_propagator, integrate_time_ordered)
from .gates import (GateSchedule, ideal_collective_gate, single_qubit_layer,
                    pairwise_form, cluster_generator, solve_schedule,
                    composite_cluster_unitary)
from .phases import PhaseDecomposition, phase_space_trajectory, decompose_phases, loop_area
from .cluster import (ClusterTarget, MeasurementSpec, MeasurementRecord,
                      initial_product_state, cluster_target, generate_cluster,
                      measure_qubit, measurement_branches,
                      run_measurement_sequence, reduced_purity)
from .opensys import (NoiseParams, FeasibilityReport, thermal_state,
                      thermal_weights, lindblad_evolve,
                      thermal_insensitivity_scan, feasibility_report,
                      cavity_decay, dephasing_collapse, relaxation_collapse)

__version__ = "0.1.0"
