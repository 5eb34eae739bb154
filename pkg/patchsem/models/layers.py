"""
Building blocks of the classifier graph.

Every function takes recorded Tensors and the ModelParams holding its
weights; nothing here keeps state between calls.
"""

import math

from patchsem.autodiff import ShapeMismatch, Tensor, ops

from .params import ModelParams


def residual_block(x: Tensor, params: ModelParams, prefix: str) -> Tensor:
    """
    Compressed residual block: tanh(conv_k(tanh(conv_k(X))) + conv_1(X)).

    The second convolution has no activation of its own.
    """
    x1 = ops.tanh(ops.conv1d_same(x, params[f"{prefix}.w1"], params[f"{prefix}.b1"]))
    x2 = ops.conv1d_same(x1, params[f"{prefix}.w2"], params[f"{prefix}.b2"])
    x3 = ops.conv1d_same(x, params[f"{prefix}.w3"], params[f"{prefix}.b3"])
    return ops.tanh(ops.add(x2, x3))


def mcc_forward(embedded: Tensor, params: ModelParams, level: str) -> Tensor:
    """
    Multi-channel convolution stack of one input level.

    Args:
        embedded: [n x d] embedded id sequence
        params: Model parameters
        level: token, line or description

    Returns:
        [n x (m * d^p)]: per filter, tanh(conv) followed by the residual
        blocks, with filter outputs joined on the feature axis
    """
    config = params.config
    channels = []
    for i in range(config.channels):
        prefix = f"{level}.conv{i}"
        h = ops.tanh(ops.conv1d_same(embedded, params[f"{prefix}.weight"], params[f"{prefix}.bias"]))
        for j in range(config.residual_blocks):
            h = residual_block(h, params, f"{prefix}.block{j}")
        channels.append(h)
    return channels[0] if len(channels) == 1 else ops.concat(channels, axis=1)


def window_bounds(length: int, window: int) -> list[tuple[int, int]]:
    """Consecutive [start, stop) windows of `window` rows; the last may be short."""
    return [(start, min(start + window, length)) for start in range(0, length, window)]


def window_attention(sequence: Tensor, params: ModelParams) -> list[tuple[int, int, Tensor]]:
    """
    Soft-pooling weights of every window of `sequence`.

    With the dot score each element of a window is a query against the
    window's last element as key, scaled by 1/sqrt(attn_dim). With the
    linear score each row is scored by a learned vector.

    Returns:
        (start, stop, beta) per window; beta sums to 1
    """
    config = params.config
    bounds = window_bounds(sequence.shape[0], config.pool_window)
    weights = []
    if config.pool_score == "dot":
        queries = ops.matmul(sequence, params["align.query"])
        keys = ops.matmul(sequence, params["align.key"])
        for start, stop in bounds:
            scores = ops.scaled_dot_scores(
                ops.slice_rows(queries, start, stop), ops.take_row(keys, stop - 1), config.attn_dim
            )
            weights.append((start, stop, ops.softmax(scores)))
    else:
        row_scores = ops.matmul(sequence, params["align.score"])
        for start, stop in bounds:
            weights.append((start, stop, ops.softmax(ops.slice_rows(row_scores, start, stop))))
    return weights


def semantic_align(hw: Tensor | None, hs: Tensor | None, params: ModelParams) -> Tensor:
    """
    Fuse the token- and line-level sequences into P pooled vectors.

    Hwd is Hw followed by Hs (either may be absent). Window p pools its
    rows as o_p = sum_q beta_q x_q.

    Returns:
        [P x F] with P = ceil(rows(Hwd) / g)
    """
    parts = [h for h in (hw, hs) if h is not None]
    if not parts:
        raise ShapeMismatch("semantic_align needs at least one code-level sequence")
    if len(parts) == 2 and parts[0].shape[1] != parts[1].shape[1]:
        raise ShapeMismatch(f"Hw width {parts[0].shape[1]} != Hs width {parts[1].shape[1]}")
    sequence = parts[0] if len(parts) == 1 else ops.concat(parts, axis=0)

    pooled = [
        ops.matmul(beta, ops.slice_rows(sequence, start, stop))
        for start, stop, beta in window_attention(sequence, params)
    ]
    return ops.stack(pooled)


def refine_and_fuse(pooled: Tensor | None, hd: Tensor | None, params: ModelParams) -> Tensor:
    """
    l = ReLU(o W_fc + b_fc) for every pooled row, then the description rows.

    Hd rows go through the same layer so every fused row has width
    refine_dim; the result has P rows, then nd rows when Hd is given.
    """
    parts = [h for h in (pooled, hd) if h is not None]
    if not parts:
        raise ShapeMismatch("refine_and_fuse needs pooled vectors or description features")
    rows = parts[0] if len(parts) == 1 else ops.concat(parts, axis=0)
    return ops.relu(ops.add(ops.matmul(rows, params["refine.weight"]), params["refine.bias"]))


def attention_weights(fused: Tensor, params: ModelParams) -> Tensor:
    """Row-softmax of (L W^Q)(L W^K)^T / sqrt(attn_dim), [n x n]."""
    queries = ops.matmul(fused, params["attention.query"])
    keys = ops.matmul(fused, params["attention.key"])
    scores = ops.scale(ops.matmul(queries, ops.transpose(keys)), 1.0 / math.sqrt(params.config.attn_dim))
    return ops.softmax(scores)


def hybrid_attention(fused: Tensor, params: ModelParams) -> tuple[Tensor, Tensor]:
    """
    Full self-attention over the fused sequence.

    Returns:
        (G [n x attn_dim], D_g [attn_dim]) with D_g the mean of G's rows
    """
    values = ops.matmul(fused, params["attention.value"])
    g = ops.matmul(attention_weights(fused, params), values)
    return g, ops.mean(g, axis=0)


def predict(d_g: Tensor, params: ModelParams) -> Tensor:
    """sigmoid(w . D_g + b) as a scalar Tensor."""
    return ops.sigmoid(ops.add(ops.matmul(d_g, params["head.weight"]), params["head.bias"]))


def loss(prob: Tensor, label: int) -> Tensor:
    """Binary cross-entropy with the probability clamped to [1e-12, 1 - 1e-12]."""
    return ops.binary_cross_entropy(prob, label, eps=1e-12)
