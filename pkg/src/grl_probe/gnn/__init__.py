"""Graph-convolutional encoders (GCN, GraphSAGE, GAT) trained without labels."""

from .layers import (
    Neighborhoods,
    aggregate_max,
    aggregate_maxpool,
    aggregate_mean,
    aggregate_sum,
    attention_structure,
    gat_layer_backward,
    gat_layer_forward,
    gcn_layer_backward,
    gcn_layer_forward,
    gcn_norm,
    identity_features,
    sample_neighbors,
)
from .models import (
    ARCHS,
    Batch,
    GnnConfig,
    batch_loss,
    fit,
    make_encoder,
    proximity_loss,
    sage_forward,
    train_unsupervised,
)
