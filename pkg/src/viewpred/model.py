"""The view-prediction networks and their three losses.

Five parameter groups cooperate on each antipodal view pair:

* a frozen convolutional patch extractor turning every grid patch into a
  feature vector (its outputs are training targets and encoder inputs,
  never gradient recipients),
* an encoder GRU that folds the per-shape global feature plus one patch
  sequence into a hidden state,
* a decoder GRU predicting the complementary patch sequence in feature
  space, feeding each emission back as the next step input,
* an upsampling generator mapping the hidden state to a full view image,
* an abstractor CNN squeezing a generated view back into a feature from
  which the generator predicts the opposite view.

The three losses are summed squared distances: predicted vs. actual patch
features, generated vs. actual current view, and chained opposite-view
prediction vs. the actual opposite view. The total weighs the patch term
by alpha and the opposite term by beta; the current-view term is the
anchor with weight 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .autodiff import (
    ShapeError,
    Tensor,
    conv2d,
    deconv2d,
    matmul,
    maxpool2d,
    relu,
    reshape,
    sq_l2,
    tanh,
)
from .config import ModelConfig
from .geometry import ConfigError
from .gridding import extract_patches, make_gridspec, o_i_sequences
from .recurrent import GruParams, gru_step, init_gru

PATCH_SEQ_LEN = 6


@dataclass
class ExtractorParams:
    convs: list[Tensor]
    fc_w: Tensor
    fc_b: Tensor

    def named(self, prefix):
        out = [(f"{prefix}.conv{i}", c) for i, c in enumerate(self.convs)]
        return out + [(f"{prefix}.fc_w", self.fc_w), (f"{prefix}.fc_b", self.fc_b)]


@dataclass
class DecoderParams:
    gru: GruParams
    out_w: Tensor
    out_b: Tensor

    def named(self, prefix):
        return self.gru.named(f"{prefix}.gru") + [
            (f"{prefix}.out_w", self.out_w),
            (f"{prefix}.out_b", self.out_b),
        ]


@dataclass
class GeneratorParams:
    up1: Tensor
    up2: Tensor

    def named(self, prefix):
        return [(f"{prefix}.up1", self.up1), (f"{prefix}.up2", self.up2)]


@dataclass
class AbstractorParams:
    convs: list[Tensor]
    fc_w: Tensor
    fc_b: Tensor

    def named(self, prefix):
        out = [(f"{prefix}.conv{i}", c) for i, c in enumerate(self.convs)]
        return out + [(f"{prefix}.fc_w", self.fc_w), (f"{prefix}.fc_b", self.fc_b)]


@dataclass
class ModelParams:
    extractor: ExtractorParams
    encoder: GruParams
    decoder: DecoderParams
    generator: GeneratorParams
    abstractor: AbstractorParams

    def named_tensors(self):
        return (
            self.extractor.named("extractor")
            + self.encoder.named("encoder")
            + self.decoder.named("decoder")
            + self.generator.named("generator")
            + self.abstractor.named("abstractor")
        )

    def trainable_tensors(self):
        return [t for name, t in self.named_tensors() if not name.startswith("extractor")]

    def frozen_tensors(self):
        return [t for name, t in self.named_tensors() if name.startswith("extractor")]


def _extractor_flat_dim(cfg: ModelConfig) -> int:
    side = cfg.patch_size
    for _ in cfg.extractor_channels:
        side = (side - 3) // cfg.extractor_stride + 1
    return cfg.extractor_channels[-1] * side * side


def _abstractor_flat_dim(cfg: ModelConfig) -> int:
    side = cfg.generated_size
    for n_convs in cfg.abstractor_blocks:
        side -= 2 * n_convs
        side = (side - 2) // 2 + 1
    return cfg.abstractor_channels[-1] * side * side


def init_params(cfg: ModelConfig, seed: int, init_std: float = 0.02) -> ModelParams:
    """Fresh parameters: trainable groups from normal(0, init_std).

    The frozen extractor instead uses fan-in-scaled weights so patch
    features come out at unit-ish magnitude, keeping the three loss terms
    on comparable scales under the default alpha = beta = 1.
    """
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0xBEEF)))

    def trainable(*shape):
        return Tensor(rng.normal(0.0, init_std, shape).astype(np.float32), requires_grad=True)

    def frozen(*shape):
        fan_in = int(np.prod(shape[1:])) if len(shape) > 1 else shape[0]
        std = np.sqrt(2.0 / fan_in)
        return Tensor(rng.normal(0.0, std, shape).astype(np.float32), requires_grad=False)

    convs = []
    c_prev = cfg.channels
    for c_out in cfg.extractor_channels:
        convs.append(frozen(c_out, c_prev, 3, 3))
        c_prev = c_out
    extractor = ExtractorParams(
        convs=convs,
        fc_w=frozen(cfg.dims, _extractor_flat_dim(cfg)),
        fc_b=Tensor(np.zeros(cfg.dims, dtype=np.float32), requires_grad=False),
    )

    encoder = init_gru(cfg.dims, cfg.dims, rng, init_std)
    decoder = DecoderParams(
        gru=init_gru(cfg.dims, cfg.dims, rng, init_std),
        out_w=trainable(cfg.dims, cfg.dims),
        out_b=trainable(cfg.dims),
    )

    k = cfg.generator_kernel
    generator = GeneratorParams(
        up1=trainable(cfg.dims // 16, cfg.generator_channels, k, k),
        up2=trainable(cfg.generator_channels, cfg.channels, k, k),
    )

    abs_convs = []
    c_prev = cfg.channels
    for n_convs, c_out in zip(cfg.abstractor_blocks, cfg.abstractor_channels):
        for _ in range(n_convs):
            abs_convs.append(trainable(c_out, c_prev, 3, 3))
            c_prev = c_out
    abstractor = AbstractorParams(
        convs=abs_convs,
        fc_w=trainable(cfg.dims, _abstractor_flat_dim(cfg)),
        fc_b=trainable(cfg.dims),
    )

    return ModelParams(
        extractor=extractor,
        encoder=encoder,
        decoder=decoder,
        generator=generator,
        abstractor=abstractor,
    )


# ---------------------------------------------------------------------------
# forward pieces


def extractor_features(patches: np.ndarray, extractor: ExtractorParams,
                       cfg: ModelConfig) -> np.ndarray:
    """Frozen feature extraction on a (N, H, H) batch of patches.

    Runs outside the autodiff graph: the extractor never receives
    gradients and its inputs are data, so plain array math suffices.
    """
    if patches.ndim == 2:
        patches = patches[None]
    if patches.shape[-2:] != (cfg.patch_size, cfg.patch_size):
        raise ShapeError(
            f"patches are {patches.shape[-2:]}, extractor expects "
            f"{(cfg.patch_size, cfg.patch_size)}"
        )
    s = cfg.extractor_stride
    out = np.empty((len(patches), cfg.dims), dtype=np.float32)
    for n, patch in enumerate(patches):
        x = patch[None].astype(np.float32)
        for w in extractor.convs:
            wd = w.data
            k = wd.shape[-1]
            h2 = (x.shape[1] - k) // s + 1
            w2 = (x.shape[2] - k) // s + 1
            acc = np.zeros((wd.shape[0], h2, w2), dtype=np.float32)
            for u in range(k):
                for v in range(k):
                    win = x[:, u : u + s * h2 : s, v : v + s * w2 : s]
                    acc += np.einsum("ihw,oi->ohw", win, wd[:, :, u, v])
            x = np.maximum(acc, 0.0)
        out[n] = extractor.fc_w.data @ x.reshape(-1) + extractor.fc_b.data
    return out


def extract_patch_features(patches, extractor: ExtractorParams, cfg: ModelConfig) -> list[Tensor]:
    """Feature sequence for one 6-patch set, as constant tensors."""
    feats = extractor_features(np.stack(patches), extractor, cfg)
    return [Tensor(f) for f in feats]


def encode(feature: Tensor | None, seq: list[Tensor], enc: GruParams) -> Tensor:
    """Run the encoder over [global feature, patch features] from a zero state.

    ``feature`` may be None (the pooled-aggregation ablation trains
    without a global feature), in which case only the sequence is read.
    """
    d = enc.uz.data.shape[0]
    h = Tensor(np.zeros(d, dtype=enc.uz.data.dtype))
    if feature is not None:
        h = gru_step(feature, h, enc)
    for f in seq:
        h = gru_step(f, h, enc)
    return h


def decode_patch_features(feature: Tensor | None, h: Tensor, dec: DecoderParams,
                          n_steps: int = PATCH_SEQ_LEN) -> list[Tensor]:
    """Emit ``n_steps`` feature predictions, feeding each back as input."""
    d = dec.gru.uz.data.shape[0]
    step_in = feature if feature is not None else Tensor(np.zeros(d, dtype=dec.gru.uz.data.dtype))
    hidden = h
    outputs = []
    for _ in range(n_steps):
        hidden = gru_step(step_in, hidden, dec.gru)
        emitted = matmul(dec.out_w, hidden) + dec.out_b
        outputs.append(emitted)
        step_in = emitted
    return outputs


def generate_view(h: Tensor, gen: GeneratorParams, cfg: ModelConfig) -> Tensor:
    """Decode a hidden state into a [0,1] image of the generated size."""
    if cfg.dims % 16 != 0:
        raise ConfigError("hidden dimension must split into 4x4 maps")
    maps = reshape(h, (cfg.dims // 16, 4, 4))
    x = relu(deconv2d(maps, gen.up1, cfg.generator_stride))
    x = tanh(deconv2d(x, gen.up2, cfg.generator_stride))
    g = cfg.generated_size
    return reshape(x, (g, g)) * 0.5 + 0.5


def abstract_view(img: Tensor, abs_p: AbstractorParams, cfg: ModelConfig) -> Tensor:
    """Squeeze a generated view back into a feature vector, differentiably."""
    g = cfg.generated_size
    if img.data.shape != (g, g):
        raise ShapeError(f"abstractor expects a {g}x{g} image, got {img.data.shape}")
    x = reshape(img, (1, g, g))
    ci = 0
    for n_convs in cfg.abstractor_blocks:
        for _ in range(n_convs):
            x = relu(conv2d(x, abs_p.convs[ci], 1))
            ci += 1
        x = maxpool2d(x, 2)
    flat = reshape(x, (int(np.prod(x.data.shape)),))
    return matmul(abs_p.fc_w, flat) + abs_p.fc_b


# ---------------------------------------------------------------------------
# losses


@dataclass
class LossBundle:
    patch: Tensor | None
    current: Tensor | None
    opposite: Tensor | None
    total: Tensor
    alpha: float
    beta: float

    def component_values(self) -> dict[str, float]:
        def val(t):
            return float(t.data) if t is not None else 0.0

        return {
            "patch": val(self.patch),
            "current": val(self.current),
            "opposite": val(self.opposite),
            "total": float(self.total.data),
        }


def sequence_loss(preds: list[Tensor], targets: list[Tensor]) -> Tensor:
    if len(preds) != len(targets):
        raise ShapeError(f"{len(preds)} predictions vs {len(targets)} targets")
    total = sq_l2(preds[0], targets[0])
    for p, t in zip(preds[1:], targets[1:]):
        total = total + sq_l2(p, t)
    return total


DIRECTIONS_BOTH = ("i2o", "o2i")


def pair_losses(feature: Tensor | None, o_feats: np.ndarray, i_feats: np.ndarray,
                current: np.ndarray, opposite: np.ndarray, params: ModelParams,
                cfg: ModelConfig, directions=DIRECTIONS_BOTH,
                loss_mask=("patch", "current", "opposite"), swap_sets=False) -> LossBundle:
    """Hierarchical losses over one view pair, given cached patch features.

    ``directions`` selects which of the two symmetric prediction passes
    run; ``loss_mask`` selects which loss terms enter the total;
    ``swap_sets`` relabels which patch set plays which role (the total is
    invariant under it when both directions run).
    """
    if swap_sets:
        o_feats, i_feats = i_feats, o_feats
    seqs = {
        "o": [Tensor(f) for f in o_feats],
        "i": [Tensor(f) for f in i_feats],
    }
    v = Tensor(np.asarray(current, dtype=np.float32))
    v_prime = Tensor(np.asarray(opposite, dtype=np.float32))

    l_patch = None
    l_current = None
    l_opposite = None

    for direction in directions:
        src, dst = direction.split("2")
        h = encode(feature, seqs[src], params.encoder)
        if "patch" in loss_mask:
            preds = decode_patch_features(feature, h, params.decoder)
            term = sequence_loss(preds, seqs[dst])
            l_patch = term if l_patch is None else l_patch + term
        if "current" in loss_mask:
            generated = generate_view(h, params.generator, cfg)
            term = sq_l2(generated, v)
            l_current = term if l_current is None else l_current + term
            if "opposite" in loss_mask:
                chained = generate_view(
                    abstract_view(generated, params.abstractor, cfg), params.generator, cfg
                )
                term = sq_l2(chained, v_prime)
                l_opposite = term if l_opposite is None else l_opposite + term

    total = None

    def weighted(term, weight):
        nonlocal total
        if term is None or weight == 0.0:
            contribution = None
        else:
            contribution = term * weight if weight != 1.0 else term
        if contribution is not None:
            total = contribution if total is None else total + contribution

    weighted(l_patch, cfg.alpha)
    weighted(l_current, 1.0)
    weighted(l_opposite, cfg.beta)
    if total is None:
        # all enabled terms weighted to zero; keep a valid scalar graph
        total = Tensor(np.zeros((), dtype=np.float32))

    return LossBundle(
        patch=l_patch, current=l_current, opposite=l_opposite,
        total=total, alpha=cfg.alpha, beta=cfg.beta,
    )


def view_patch_features(view: np.ndarray, params: ModelParams, cfg: ModelConfig):
    """Grid one view and extract both patch-set feature arrays."""
    spec = make_gridspec(cfg.view_size, cfg.patch_size)
    grid = extract_patches(np.asarray(view), spec)
    o_patches, i_patches = o_i_sequences(grid)
    o_feats = extractor_features(np.stack(o_patches), params.extractor, cfg)
    i_feats = extractor_features(np.stack(i_patches), params.extractor, cfg)
    return o_feats, i_feats


def forward_pair(feature: Tensor | None, pair, params: ModelParams, cfg: ModelConfig,
                 directions=DIRECTIONS_BOTH, loss_mask=("patch", "current", "opposite"),
                 swap_sets=False) -> LossBundle:
    """Gridding + extraction + both prediction directions for one view pair."""
    o_feats, i_feats = view_patch_features(pair.current, params, cfg)
    return pair_losses(
        feature, o_feats, i_feats, pair.current, pair.opposite, params, cfg,
        directions=directions, loss_mask=loss_mask, swap_sets=swap_sets,
    )
