"""Exact-enumeration emulation of quantum agnostic learning of decision trees."""
from .boolean import (
    BooleanFunction,
    FourierSpectrum,
    Leaf,
    Node,
    Prefix,
    best_parity,
    eval_tree,
    l1_norm,
    parity_eval,
    prefix_weight,
    random_tree,
    tree_to_function,
    wht,
)
from .boosting import (
    CombinedHypothesis,
    QuantumParityLearner,
    exact_parity_learner,
    kk_boost_classical,
    potential,
    quantum_agnostic_boost,
)
from .channels import (
    LabelChannel,
    bayes_predictor,
    correlation,
    error,
    make_agnostic,
    make_rcn,
    make_realizable,
    optcor_parity,
    relabel,
)
from .emulation import QueryLedger
from .gl import StronglyBiasedOracle, biased_overlap, igl, qgl
from .harness import ExperimentConfig, run_experiment
from .kernels import BACKEND
from .weak import rcn_weak_parity, realizable_weak_parity, weak_agnostic_parity

__version__ = "0.1.0"
