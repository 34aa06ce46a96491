"""Code generator for quantum Gibbs sampling of classical Bayesian networks."""

from gibbsqc.bayesnet import BayesNet, Cpt, NetParseError, NodeSpec, load_net
from gibbsqc.circuit import Circuit, CircuitError, Control, Gate
from gibbsqc.generator import GenParams, generate_circuit
from gibbsqc.nitcodes import NitLayout, build_layout

__version__ = "0.1.0"

__all__ = [
    "BayesNet",
    "Circuit",
    "CircuitError",
    "Control",
    "Cpt",
    "Gate",
    "GenParams",
    "NetParseError",
    "NitLayout",
    "NodeSpec",
    "build_layout",
    "generate_circuit",
    "load_net",
]
