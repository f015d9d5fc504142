"""Reverse-mode autodiff on float64 numpy arrays, plus plain MLPs.

Every differentiable quantity in this package is a `Tensor`: a value array
together with the recipe (parents + vector-Jacobian product) needed to push
gradients backward. Graphs are built implicitly by arithmetic and consumed
once by `backward`. Gradients are accumulated in a dict keyed by node, never
stored on the nodes themselves, so parameter tensors can live across many
steps without any zero_grad bookkeeping.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "NumericalError",
    "Tensor",
    "constant",
    "parameter",
    "topo_order",
    "backward",
    "gradients",
    "Layer",
    "Network",
    "glorot_uniform",
    "sgd_step",
    "SGD",
    "ACTIVATIONS",
]


class NumericalError(RuntimeError):
    """A value that must be finite came out NaN or infinite."""


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum `grad` down to `shape`, undoing numpy broadcasting."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad


def _node(value, parents, vjp):
    # Recipe is dropped when no parent needs gradients; constant subgraphs
    # then cost nothing at backward time.
    if any(p.requires_grad for p in parents):
        return Tensor(value, requires_grad=True, parents=parents, vjp=vjp)
    return Tensor(value)


class Tensor:
    """One node of a computation graph.

    `value` is always a float64 ndarray. Leaf nodes are made with
    `constant` or `parameter`; everything else comes from the ops below.
    Shapes follow numpy broadcasting; matmul is restricted to 2-D operands.
    """

    __slots__ = ("value", "parents", "vjp", "requires_grad")

    # Keep numpy from intercepting `ndarray <op> Tensor`; we want the
    # reflected Tensor operator instead of elementwise object math.
    __array_ufunc__ = None

    def __init__(self, value, requires_grad: bool = False, parents=(), vjp=None):
        self.value = np.asarray(value, dtype=np.float64)
        self.requires_grad = requires_grad
        self.parents = parents
        self.vjp = vjp

    # -- basics --------------------------------------------------------

    @property
    def shape(self):
        return self.value.shape

    @property
    def T(self) -> "Tensor":
        out = self.value.T
        return _node(out, (self,), lambda g: (g.T,))

    def item(self) -> float:
        return float(self.value)

    def __repr__(self):
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.value.shape}{flag})"

    # -- arithmetic ------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, Tensor):
            a, b = self.value, other.value
            out = a + b
            return _node(out, (self, other),
                         lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)))
        a = self.value
        return _node(a + other, (self,), lambda g: (_unbroadcast(g, a.shape),))

    __radd__ = __add__

    def __neg__(self):
        return _node(-self.value, (self,), lambda g: (-g,))

    def __sub__(self, other):
        if isinstance(other, Tensor):
            a, b = self.value, other.value
            return _node(a - b, (self, other),
                         lambda g: (_unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)))
        a = self.value
        return _node(a - other, (self,), lambda g: (_unbroadcast(g, a.shape),))

    def __rsub__(self, other):
        a = self.value
        return _node(other - a, (self,), lambda g: (_unbroadcast(-g, a.shape),))

    def __mul__(self, other):
        if isinstance(other, Tensor):
            a, b = self.value, other.value
            return _node(a * b, (self, other),
                         lambda g: (_unbroadcast(g * b, a.shape), _unbroadcast(g * a, b.shape)))
        a = self.value
        return _node(a * other, (self,), lambda g: (_unbroadcast(g * other, a.shape),))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Tensor):
            a, b = self.value, other.value
            return _node(a / b, (self, other),
                         lambda g: (_unbroadcast(g / b, a.shape),
                                    _unbroadcast(-g * a / (b * b), b.shape)))
        a = self.value
        return _node(a / other, (self,), lambda g: (_unbroadcast(g / other, a.shape),))

    def __rtruediv__(self, other):
        a = self.value
        return _node(other / a, (self,),
                     lambda g: (_unbroadcast(-g * other / (a * a), a.shape),))

    def __pow__(self, p):
        if not isinstance(p, (int, float)):
            raise TypeError("exponent must be a python scalar")
        a = self.value
        out = a ** p
        return _node(out, (self,), lambda g: (g * p * a ** (p - 1),))

    def __matmul__(self, other):
        if not isinstance(other, Tensor):
            other = Tensor(other)
        a, b = self.value, other.value
        if a.ndim != 2 or b.ndim != 2:
            raise ValueError(f"matmul expects 2-D operands, got {a.shape} @ {b.shape}")
        return _node(a @ b, (self, other), lambda g: (g @ b.T, a.T @ g))

    def __rmatmul__(self, other):
        return Tensor(other) @ self

    # -- reductions ------------------------------------------------------

    def sum(self, axis=None, keepdims: bool = False) -> "Tensor":
        a = self.value
        out = a.sum(axis=axis, keepdims=keepdims)

        def vjp(g):
            gg = np.asarray(g)
            if axis is not None and not keepdims:
                gg = np.expand_dims(gg, axis)
            return (np.broadcast_to(gg, a.shape),)

        return _node(out, (self,), vjp)

    def mean(self, axis=None, keepdims: bool = False) -> "Tensor":
        a = self.value
        n = a.size if axis is None else a.shape[axis]
        return self.sum(axis=axis, keepdims=keepdims) * (1.0 / n)

    # -- elementwise nonlinearities ---------------------------------------

    def exp(self) -> "Tensor":
        out = np.exp(self.value)
        return _node(out, (self,), lambda g: (g * out,))

    def log(self) -> "Tensor":
        a = self.value
        return _node(np.log(a), (self,), lambda g: (g / a,))

    def sqrt(self) -> "Tensor":
        out = np.sqrt(self.value)

        def vjp(g):
            # subgradient 0 at exactly 0, rather than inf
            return (np.divide(0.5 * g, out, out=np.zeros_like(out), where=out > 0.0),)

        return _node(out, (self,), vjp)

    def abs(self) -> "Tensor":
        a = self.value
        return _node(np.abs(a), (self,), lambda g: (g * np.sign(a),))

    def tanh(self) -> "Tensor":
        out = np.tanh(self.value)
        return _node(out, (self,), lambda g: (g * (1.0 - out * out),))

    def sigmoid(self) -> "Tensor":
        a = self.value
        # two-branch form, stable for large |a|
        out = np.where(a >= 0, 1.0 / (1.0 + np.exp(-np.abs(a))),
                       np.exp(-np.abs(a)) / (1.0 + np.exp(-np.abs(a))))
        return _node(out, (self,), lambda g: (g * out * (1.0 - out),))

    def relu(self) -> "Tensor":
        a = self.value
        return _node(np.maximum(a, 0.0), (self,), lambda g: (g * (a > 0.0),))

    def clamp(self, lo: float, hi: float) -> "Tensor":
        a = self.value
        out = np.clip(a, lo, hi)
        return _node(out, (self,), lambda g: (g * ((a > lo) & (a < hi)),))

    def clamp_min(self, lo: float) -> "Tensor":
        a = self.value
        return _node(np.maximum(a, lo), (self,), lambda g: (g * (a > lo),))

    def reshape(self, *shape) -> "Tensor":
        a = self.value
        out = a.reshape(*shape)
        return _node(out, (self,), lambda g: (g.reshape(a.shape),))


def constant(value) -> Tensor:
    """Leaf that never receives gradients."""
    return Tensor(value)


def parameter(value) -> Tensor:
    """Trainable leaf. Must be finite."""
    t = Tensor(value, requires_grad=True)
    if not np.isfinite(t.value).all():
        raise NumericalError("parameter initialized with non-finite values")
    return t


def topo_order(root: Tensor) -> list:
    """Gradient-reachable nodes of `root`'s graph, parents before children.

    Only requires_grad nodes are walked. Raises ValueError if the parent
    links contain a cycle (possible only through manual graph surgery, but
    cheap to guard against).
    """
    order: list = []
    state: dict = {}  # id -> 0 on stack, 1 finished
    stack = [(root, False)]
    while stack:
        node, ready = stack.pop()
        nid = id(node)
        if ready:
            state[nid] = 1
            order.append(node)
            continue
        st = state.get(nid)
        if st == 1:
            continue
        if st == 0:
            raise ValueError("cycle detected in computation graph")
        state[nid] = 0
        stack.append((node, True))
        for p in node.parents:
            if p.requires_grad and state.get(id(p)) != 1:
                stack.append((p, False))
    return order


def backward(loss: Tensor) -> dict:
    """Gradients of a scalar `loss` w.r.t. every reachable node.

    Returns {Tensor: ndarray}; leaves not reachable from `loss` are simply
    absent. The graph is left untouched and can be walked again.
    """
    if loss.value.size != 1:
        raise ValueError(f"loss must be scalar, got shape {loss.value.shape}")
    grads: dict = {loss: np.ones_like(loss.value)}
    if not loss.requires_grad:
        return grads
    for node in reversed(topo_order(loss)):
        g = grads.get(node)
        if g is None or node.vjp is None:
            continue
        for parent, pg in zip(node.parents, node.vjp(g)):
            if not parent.requires_grad:
                continue
            acc = grads.get(parent)
            grads[parent] = pg if acc is None else acc + pg
    return grads


def gradients(loss: Tensor, params: dict) -> dict:
    """Map parameter name -> gradient array. Unreachable params get zeros."""
    table = backward(loss)
    out = {}
    for name, p in params.items():
        g = table.get(p)
        out[name] = np.zeros_like(p.value) if g is None else np.asarray(g)
    return out


# -- networks ------------------------------------------------------------

ACTIVATIONS = ("identity", "relu", "tanh", "sigmoid")

_ACT_GRAPH = {
    "identity": lambda t: t,
    "relu": Tensor.relu,
    "tanh": Tensor.tanh,
    "sigmoid": Tensor.sigmoid,
}

_ACT_PLAIN = {
    "identity": lambda a: a,
    "relu": lambda a: np.maximum(a, 0.0),
    "tanh": np.tanh,
    "sigmoid": lambda a: np.where(a >= 0, 1.0 / (1.0 + np.exp(-np.abs(a))),
                                  np.exp(-np.abs(a)) / (1.0 + np.exp(-np.abs(a)))),
}


def glorot_uniform(fan_in: int, fan_out: int, rng: np.random.Generator) -> np.ndarray:
    s = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-s, s, size=(fan_in, fan_out))


@dataclass
class Layer:
    """Affine map plus elementwise activation. weight is (fan_in, fan_out)."""

    weight: Tensor
    bias: Tensor
    activation: str

    def __post_init__(self):
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        if self.weight.value.ndim != 2 or self.bias.value.ndim != 1:
            raise ValueError("weight must be 2-D and bias 1-D")
        if self.weight.value.shape[1] != self.bias.value.shape[0]:
            raise ValueError("bias length must equal weight fan_out")

    @property
    def fan_in(self) -> int:
        return self.weight.value.shape[0]

    @property
    def fan_out(self) -> int:
        return self.weight.value.shape[1]


class Network:
    """Fully connected net with a designated feature tap.

    `feature_tap_index` names the layer whose post-activation output doubles
    as the per-sample vector representation returned by forward. For a
    discriminator this is typically the last hidden layer; a generator taps
    its own output layer.
    """

    def __init__(self, layers: list, feature_tap_index: int | None = None):
        if not layers:
            raise ValueError("network needs at least one layer")
        for prev, nxt in zip(layers, layers[1:]):
            if prev.fan_out != nxt.fan_in:
                raise ValueError(
                    f"layer dims do not compose: {prev.fan_out} -> {nxt.fan_in}")
        if feature_tap_index is None:
            feature_tap_index = len(layers) - 2 if len(layers) > 1 else 0
        if not 0 <= feature_tap_index < len(layers):
            raise ValueError(f"feature_tap_index {feature_tap_index} out of range")
        self.layers = layers
        self.feature_tap_index = feature_tap_index
        self._params = {}
        for i, layer in enumerate(layers):
            self._params[f"layer{i}.w"] = layer.weight
            self._params[f"layer{i}.b"] = layer.bias

    @classmethod
    def create(cls, sizes, hidden_activation: str = "relu",
               out_activation: str = "identity",
               feature_tap_index: int | None = None,
               rng: np.random.Generator | None = None) -> "Network":
        """Build from a size chain like (2, 64, 64, 1). Glorot-uniform
        weights, zero biases."""
        if len(sizes) < 2:
            raise ValueError("sizes needs at least input and output dims")
        if rng is None:
            rng = np.random.default_rng(0)
        layers = []
        last = len(sizes) - 2
        for i, (fi, fo) in enumerate(zip(sizes, sizes[1:])):
            act = out_activation if i == last else hidden_activation
            layers.append(Layer(parameter(glorot_uniform(fi, fo, rng)),
                                parameter(np.zeros(fo)), act))
        return cls(layers, feature_tap_index)

    @property
    def in_dim(self) -> int:
        return self.layers[0].fan_in

    @property
    def out_dim(self) -> int:
        return self.layers[-1].fan_out

    def parameters(self) -> dict:
        return self._params

    def forward(self, batch) -> tuple:
        """Run a (n, in_dim) batch through the graph.

        Returns (output, features), both Tensors; `features` is the tapped
        layer's post-activation output. Raises NumericalError if either
        comes out non-finite.
        """
        x = batch if isinstance(batch, Tensor) else constant(batch)
        if x.value.ndim != 2 or x.value.shape[1] != self.in_dim:
            raise ValueError(
                f"expected batch shape (n, {self.in_dim}), got {x.value.shape}")
        features = None
        for i, layer in enumerate(self.layers):
            x = _ACT_GRAPH[layer.activation](x @ layer.weight + layer.bias)
            if i == self.feature_tap_index:
                features = x
        if not np.isfinite(x.value).all() or not np.isfinite(features.value).all():
            raise NumericalError("non-finite activation in forward pass")
        return x, features

    def forward_values(self, batch: np.ndarray) -> tuple:
        """Graph-free forward for statistics and evaluation. Same math as
        forward, returns plain arrays."""
        x = np.asarray(batch, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.in_dim:
            raise ValueError(
                f"expected batch shape (n, {self.in_dim}), got {x.shape}")
        features = None
        for i, layer in enumerate(self.layers):
            x = _ACT_PLAIN[layer.activation](x @ layer.weight.value + layer.bias.value)
            if i == self.feature_tap_index:
                features = x
        if not np.isfinite(x).all():
            raise NumericalError("non-finite activation in forward pass")
        return x, features


def sgd_step(net: Network, grads: dict, lr: float) -> None:
    """In-place vanilla SGD update. grads keys must name net parameters."""
    params = net.parameters()
    for name, g in grads.items():
        if name not in params:
            raise ValueError(f"gradient for unknown parameter {name!r}")
        g = np.asarray(g)
        if not np.isfinite(g).all():
            raise NumericalError(f"non-finite gradient for parameter {name!r}")
        params[name].value -= lr * g


class SGD:
    """SGD with optional classical momentum. Stateless when momentum is 0."""

    def __init__(self, params: dict, lr: float, momentum: float = 0.0):
        if lr <= 0:
            raise ValueError("lr must be positive")
        if not 0.0 <= momentum < 1.0:
            raise ValueError("momentum must be in [0, 1)")
        self.params = params
        self.lr = lr
        self.momentum = momentum
        self._vel = {n: np.zeros_like(p.value) for n, p in params.items()} \
            if momentum > 0.0 else None

    def step(self, grads: dict) -> None:
        for name, g in grads.items():
            if name not in self.params:
                raise ValueError(f"gradient for unknown parameter {name!r}")
            g = np.asarray(g)
            if not np.isfinite(g).all():
                raise NumericalError(f"non-finite gradient for parameter {name!r}")
            if self._vel is not None:
                v = self._vel[name]
                v *= self.momentum
                v += g
                g = v
            self.params[name].value -= self.lr * g
