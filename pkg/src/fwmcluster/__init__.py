"""Cascaded four-wave-mixing Gaussian states and cluster-state synthesis."""

from .cluster import (
    AdjacencyMatrix,
    ClusterUnitary,
    NullifierReport,
    canonical_cluster_unitary,
    is_cluster_unitary,
    nullifier_variances,
    preset_graph,
    sql,
)
from .eigenmodes import EigenmodeBasis, ModeClassification, classify_modes, decompose, squeezing_db
from .kernels import BACKEND
from .optimizer import EsConfig, EsResult, es_minimize, orthogonal_from_params
from .symplectic import (
    CascadeTopology,
    CovarianceMatrix,
    FwmCell,
    Gain,
    QuadratureTransform,
    bogoliubov_blocks,
    build_cascade,
    chain,
    covariance,
    fwm_transform,
    preset_topology,
    tree,
)
from .synthesis import SynthesisSolution, build_R, diagonality_residual, extract_solution, synthesize

__version__ = "0.1.0"
