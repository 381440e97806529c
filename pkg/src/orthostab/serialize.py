"""JSON encoding of numpy values.

Floats go through ``repr`` (shortest round-trip form), complex numbers become
``[re, im]`` pairs and non-finite floats become ``null``.
"""

from __future__ import annotations

import json
import math

import numpy as np


def encode(obj):
    if isinstance(obj, dict):
        return {str(k): encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [encode(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return encode(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [encode(float(obj.real)), encode(float(obj.imag))]
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else None
    return obj


def dumps(obj) -> str:
    return json.dumps(encode(obj), indent=2, sort_keys=True, ensure_ascii=False, allow_nan=False) + "\n"
