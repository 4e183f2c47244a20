from .config import TrainerConfig, glove_iterations_for, DIMENSIONS
from .cooc import CooccurrenceMatrix, build_cooccurrence, encode_corpus
from .glove import glove_weight, train_glove
from .ppmi import ppmi_transform, train_ppmi, truncated_svd
from .sgns import sgns_pair_grad, sgns_pair_loss, train_sgns
from .space import ALGORITHMS, EmbeddingSpace, SpaceMeta, load_space, save_space

TRAINERS = {"ppmi": train_ppmi, "sgns": train_sgns, "glove": train_glove}

__all__ = [
    "ALGORITHMS",
    "DIMENSIONS",
    "TRAINERS",
    "CooccurrenceMatrix",
    "EmbeddingSpace",
    "SpaceMeta",
    "TrainerConfig",
    "build_cooccurrence",
    "encode_corpus",
    "glove_iterations_for",
    "glove_weight",
    "load_space",
    "ppmi_transform",
    "save_space",
    "sgns_pair_grad",
    "sgns_pair_loss",
    "train_glove",
    "train_ppmi",
    "train_sgns",
    "truncated_svd",
]
