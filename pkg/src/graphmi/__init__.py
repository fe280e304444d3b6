"""Graph model inversion: recover a GCN's training edges from its weights."""
from .attack import (AttackConfig, AttackError, AttackTrace, attack_grad, attack_loss,
                     baseline_attribute_similarity, baseline_map, run_graphmi)
from .data import DatasetBundle, SbmSpec, generate_sbm, load_graph, write_graph
from .defense import DefenseConfig, apply_defense, defense_experiment
from .evaluation import (EvalReport, EvalSet, adversary_advantage, ap, auc, build_eval_set,
                         edge_influence, evaluate_scores, influence_stratified_report)
from .gae import decode, encode, postprocess
from .gcn import DpConfig, GcnModel, TrainConfig, TrainingError, gcn_forward, train_gcn, train_gcn_dp
from .graph import CodecError, Graph, GraphError, matrix_to_vec, normalize_adjacency, vec_to_matrix
from .sampling import SampleConfig, sample_binary

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
