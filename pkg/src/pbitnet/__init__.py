"""Compile Bayesian networks onto p-bit networks and circuits, and sample them."""

from .bnfile import format_bn, load_bn, parse_bn_file
from .circuit import (
    CircuitParams,
    CircuitSpec,
    RcReadout,
    behavioral_pbit_voltage,
    export_netlist,
    map_to_circuit,
    map_to_psl,
    parse_netlist,
    xnor_rc_correlator,
)
from .compiler import (
    BayesNet,
    CompileResult,
    CptNode,
    clamp_probability,
    compile_network,
    compile_one_parent,
    compile_two_parent,
    compile_zero_parent,
    reconstruct_cpt,
    synthesize_and_node,
)
from .family import Kind, Scenario, build_family_tree
from .oracle import JointDistribution, empirical_joint, exact_correlation, exact_joint, total_variation
from .psl import (
    NodeStreams,
    PslNetwork,
    SampleTrace,
    Schedule,
    correlation,
    pbit_update,
    run,
    step_async,
    sweep_topological,
    synapse_input,
)

__version__ = "0.1.0"
