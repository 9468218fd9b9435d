"""Encoder, scorer, and parameter plumbing for the clone-detection model."""

from .enhancer import MsaInput  # noqa: F401
from .network import (  # noqa: F401
    encode_forward, init_params, pair_backward, pair_forward, prepare_input,
    score_pair,
)
from .scorer import (  # noqa: F401
    COSINE, DISTANCE_LIKE, EUCLIDEAN, LATE_INTERACTION, MEASURES,
    SIMILARITY_LIKE, PooledFragment, Score, classify, fragment_cosine,
    fragment_euclidean, late_interaction, pool_forward, token_distance,
)
