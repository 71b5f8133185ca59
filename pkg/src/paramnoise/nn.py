"""Minimal dense feedforward network engine.

Plain numpy, float64 throughout. Exact reverse-mode gradients are computed
by hand per layer (dense affine, optional layer normalization on the
pre-activation, then a pointwise or softmax activation). Parameters of a
whole network are exposed as a single flat vector so they can be perturbed,
checkpointed, and fed to the optimizer uniformly.
"""

from __future__ import annotations

import numpy as np

ACTIVATIONS = ("relu", "tanh", "linear", "softmax")

LAYER_NORM_EPS = 1e-5


def layer_norm(x: np.ndarray, gain: np.ndarray, bias: np.ndarray,
               eps: float = LAYER_NORM_EPS) -> np.ndarray:
    """Normalize x over its last axis to zero mean / unit variance, then
    apply the learned elementwise gain and bias."""
    x = np.asarray(x, dtype=np.float64)
    gain = np.asarray(gain, dtype=np.float64)
    bias = np.asarray(bias, dtype=np.float64)
    if x.shape[-1] != gain.shape[-1] or gain.shape != bias.shape:
        raise ValueError("layer_norm: x, gain and bias must have equal length")
    if eps <= 0:
        raise ValueError("layer_norm: eps must be positive")
    mean = x.mean(axis=-1, keepdims=True)
    var = x.var(axis=-1, keepdims=True)  # population variance
    return gain * (x - mean) / np.sqrt(var + eps) + bias


def softmax(z: np.ndarray) -> np.ndarray:
    """Numerically stable softmax over the last axis."""
    z = np.asarray(z, dtype=np.float64)
    shifted = z - z.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


class DenseLayer:
    """Affine map with optional layer norm and a pointwise activation.

    Weight layout is W: (in_dim, out_dim), b: (out_dim,). When layer norm
    is enabled the layer also carries a gain and bias vector of out_dim.
    """

    def __init__(self, in_dim: int, out_dim: int, activation: str = "linear",
                 use_layer_norm: bool = False, rng: np.random.Generator | None = None):
        if in_dim < 1 or out_dim < 1:
            raise ValueError(f"layer dims must be >= 1, got ({in_dim}, {out_dim})")
        if activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {activation!r}")
        if rng is None:
            rng = np.random.default_rng()
        limit = 1.0 / np.sqrt(in_dim)
        self.W = rng.uniform(-limit, limit, size=(in_dim, out_dim))
        self.b = np.zeros(out_dim)
        self.activation = activation
        self.use_layer_norm = use_layer_norm
        if use_layer_norm:
            self.gain = np.ones(out_dim)
            self.ln_bias = np.zeros(out_dim)
        self.in_dim = in_dim
        self.out_dim = out_dim
        self._cache = None

    # -- forward / backward ------------------------------------------------

    def forward(self, x: np.ndarray) -> np.ndarray:
        z = x @ self.W
        z += self.b
        if self.use_layer_norm:
            n = z.shape[-1]
            mean = z.sum(axis=-1, keepdims=True)
            mean /= n
            z -= mean
            var = (z * z).sum(axis=-1, keepdims=True)
            var /= n
            var += LAYER_NORM_EPS
            np.sqrt(var, out=var)
            inv_std = 1.0 / var
            z *= inv_std
            z_hat = z
            h = z_hat * self.gain
            h += self.ln_bias
        else:
            z_hat = inv_std = None
            h = z
        y = self._activate(h)
        self._cache = (x, z_hat, inv_std, h, y)
        return y

    def _activate(self, h: np.ndarray) -> np.ndarray:
        if self.activation == "relu":
            return np.maximum(h, 0.0)
        if self.activation == "tanh":
            return np.tanh(h)
        if self.activation == "softmax":
            return softmax(h)
        return h

    def backward(self, grad_y: np.ndarray) -> np.ndarray:
        """Propagate grad wrt the layer output back to its input; stores
        parameter gradients (summed over the batch) on the layer."""
        if self._cache is None:
            raise RuntimeError("backward called before forward")
        x, z_hat, inv_std, h, y = self._cache

        if self.activation == "relu":
            grad_h = grad_y * (h > 0.0)
        elif self.activation == "tanh":
            grad_h = grad_y * (1.0 - y * y)
        elif self.activation == "softmax":
            grad_h = y * (grad_y - (grad_y * y).sum(axis=-1, keepdims=True))
        else:
            grad_h = grad_y

        if self.use_layer_norm:
            self.grad_gain = self._sum_batch(grad_h * z_hat)
            self.grad_ln_bias = self._sum_batch(grad_h)
            d_hat = grad_h * self.gain
            n = z_hat.shape[-1]
            grad_z = (inv_std / n) * (
                n * d_hat
                - d_hat.sum(axis=-1, keepdims=True)
                - z_hat * (d_hat * z_hat).sum(axis=-1, keepdims=True)
            )
        else:
            grad_z = grad_h

        if x.ndim == 1:
            self.grad_W = np.outer(x, grad_z)
            self.grad_b = grad_z.copy()
        else:
            self.grad_W = x.T @ grad_z
            self.grad_b = grad_z.sum(axis=0)
        return grad_z @ self.W.T

    @staticmethod
    def _sum_batch(g: np.ndarray) -> np.ndarray:
        return g.copy() if g.ndim == 1 else g.sum(axis=0)

    # -- parameter access ---------------------------------------------------

    def param_tensors(self) -> list[tuple[str, np.ndarray]]:
        tensors = [("W", self.W), ("b", self.b)]
        if self.use_layer_norm:
            tensors += [("gain", self.gain), ("ln_bias", self.ln_bias)]
        return tensors

    def grad_tensors(self) -> list[np.ndarray]:
        grads = [self.grad_W, self.grad_b]
        if self.use_layer_norm:
            grads += [self.grad_gain, self.grad_ln_bias]
        return grads


def flat_params_of(layers: list[DenseLayer]) -> np.ndarray:
    return np.concatenate([t.ravel() for l in layers for _, t in l.param_tensors()])


def link_flat_params(layers: list[DenseLayer]) -> np.ndarray:
    """Gather the layers' parameters into one flat vector and rebind every
    parameter tensor as a view into it, so whole-network operations
    (perturbation, target updates, optimizer writes) are single vector ops."""
    flat = flat_params_of(layers)
    offset = 0
    for layer in layers:
        for name, t in layer.param_tensors():
            setattr(layer, name, flat[offset:offset + t.size].reshape(t.shape))
            offset += t.size
    return flat


def set_flat_params_of(layers: list[DenseLayer], flat: np.ndarray) -> None:
    flat = np.asarray(flat, dtype=np.float64)
    total = sum(t.size for l in layers for _, t in l.param_tensors())
    if flat.size != total:
        raise ValueError(f"flat vector has {flat.size} entries, layers have {total}")
    offset = 0
    for layer in layers:
        for name, t in layer.param_tensors():
            setattr(layer, name, flat[offset:offset + t.size].reshape(t.shape).copy())
            offset += t.size


def flat_grads_of(layers: list[DenseLayer]) -> np.ndarray:
    return np.concatenate([g.ravel() for l in layers for g in l.grad_tensors()])


def param_slices_of(layers: list[DenseLayer]) -> list[tuple[int, str, slice]]:
    out = []
    offset = 0
    for i, layer in enumerate(layers):
        for name, t in layer.param_tensors():
            out.append((i, name, slice(offset, offset + t.size)))
            offset += t.size
    return out


class Network:
    """A stack of DenseLayers with flat-parameter access."""

    def __init__(self, layers: list[DenseLayer]):
        if not layers:
            raise ValueError("network needs at least one layer")
        for a, b in zip(layers, layers[1:]):
            if a.out_dim != b.in_dim:
                raise ValueError("consecutive layer dimensions do not chain")
        self.layers = layers
        self.input_dim = layers[0].in_dim
        self.output_dim = layers[-1].out_dim
        self._flat = link_flat_params(layers)

    def forward(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.input_dim:
            raise ValueError(
                f"input has {x.shape[-1]} features, network expects {self.input_dim}")
        if not np.all(np.isfinite(x)):
            raise ValueError("non-finite input to forward")
        for layer in self.layers:
            x = layer.forward(x)
        return x

    def backward(self, output_grad) -> np.ndarray:
        """Backprop from the last forward call. Returns the gradient wrt the
        network input; parameter gradients are collected via flat_grads().
        For a batched forward, parameter gradients are summed over the batch.
        """
        g = np.asarray(output_grad, dtype=np.float64)
        if g.shape[-1] != self.output_dim:
            raise ValueError("output_grad length does not match output_dim")
        for layer in reversed(self.layers):
            g = layer.backward(g)
        if not np.all(np.isfinite(g)):
            raise FloatingPointError("non-finite intermediate gradient")
        return g

    def grads(self, input, output_grad) -> np.ndarray:
        """Convenience: forward then backward, returning flat parameter grads
        of d(output . output_grad)/d(params)."""
        self.forward(input)
        self.backward(output_grad)
        return self.flat_grads()

    # -- flat parameter view --------------------------------------------------

    def num_params(self) -> int:
        return self._flat.size

    def param_slices(self) -> list[tuple[int, str, slice]]:
        """Layout descriptor: (layer index, tensor name, flat slice)."""
        return param_slices_of(self.layers)

    def get_flat_params(self) -> np.ndarray:
        return self._flat.copy()

    def set_flat_params(self, flat: np.ndarray) -> None:
        flat = np.asarray(flat, dtype=np.float64)
        if flat.size != self._flat.size:
            raise ValueError(
                f"flat vector has {flat.size} entries, layers have {self._flat.size}")
        self._flat[:] = flat

    def flat_grads(self) -> np.ndarray:
        return flat_grads_of(self.layers)

    def copy(self) -> "Network":
        clone = Network([
            DenseLayer(l.in_dim, l.out_dim, l.activation, l.use_layer_norm,
                       np.random.default_rng(0))
            for l in self.layers
        ])
        clone.set_flat_params(self.get_flat_params())
        return clone


def build_mlp(input_dim: int, hidden: list[int], output_dim: int,
              activation: str = "relu", output_activation: str = "linear",
              use_layer_norm: bool = False, rng_seed=0) -> Network:
    """Standard MLP: hidden layers share one activation and (optionally)
    layer norm on their pre-activations; the output layer is never
    normalized."""
    if input_dim < 1 or output_dim < 1 or any(h < 1 for h in hidden):
        raise ValueError("all network dimensions must be >= 1")
    rng = (rng_seed if isinstance(rng_seed, np.random.Generator)
           else np.random.default_rng(rng_seed))
    dims = [input_dim, *hidden, output_dim]
    layers = []
    for i, (d_in, d_out) in enumerate(zip(dims, dims[1:])):
        last = i == len(dims) - 2
        layers.append(DenseLayer(
            d_in, d_out,
            activation=output_activation if last else activation,
            use_layer_norm=use_layer_norm and not last,
            rng=rng))
    return Network(layers)


class Adam:
    """Plain Adam with bias correction, operating on flat vectors."""

    def __init__(self, n_params: int, learning_rate: float = 1e-3,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.m = np.zeros(n_params)
        self.v = np.zeros(n_params)
        self.step_count = 0
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps

    def step(self, params: np.ndarray, grads: np.ndarray) -> np.ndarray:
        params = np.asarray(params, dtype=np.float64)
        grads = np.asarray(grads, dtype=np.float64)
        if params.shape != grads.shape or params.size != self.m.size:
            raise ValueError("params/grads length mismatch with optimizer state")
        if not np.all(np.isfinite(grads)):
            raise FloatingPointError("non-finite gradient in adam step")
        self.step_count += 1
        self.m *= self.beta1
        self.m += (1.0 - self.beta1) * grads
        self.v *= self.beta2
        self.v += (1.0 - self.beta2) * (grads * grads)
        update = self.m / (1.0 - self.beta1 ** self.step_count)
        denom = np.sqrt(self.v / (1.0 - self.beta2 ** self.step_count))
        denom += self.eps
        update /= denom
        update *= self.learning_rate
        return params - update
