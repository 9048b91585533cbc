"""Tiny expression evaluator for the text formats (densities, weights, maps)."""
from __future__ import annotations

import numpy as np

_NAMES = {
    "pi": np.pi,
    "e": np.e,
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "abs": np.abs,
    "floor": np.floor,
    "where": np.where,
    "minimum": np.minimum,
    "maximum": np.maximum,
    "mod": np.mod,
}


def eval_expr(expr: str, **variables) -> np.ndarray:
    """Evaluate ``expr`` with numpy semantics; only arithmetic and _NAMES allowed."""
    code = compile(expr.strip(), "<expr>", "eval")
    for name in code.co_names:
        if name not in _NAMES and name not in variables:
            raise ValueError(f"unknown name {name!r} in expression {expr!r}")
    out = eval(code, {"__builtins__": {}}, {**_NAMES, **variables})
    ref = next(iter(variables.values()), None)
    if ref is not None:
        out = np.broadcast_to(np.asarray(out), np.shape(ref)).copy()
    return out


def parse_complex(text: str) -> complex:
    """Parse ``1+0.5i``, ``-0.3j``, ``2``."""
    t = text.strip().replace(" ", "").replace("i", "j")
    if not t:
        raise ValueError("empty number")
    return complex(t)
