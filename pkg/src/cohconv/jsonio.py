"""JSON interchange: complex numbers as [re, im], matrices as rows of complex numbers.

Floats are written with ``repr`` (shortest round-trip form), so parsing the
output gives back the exact doubles.
"""

import json

import numpy as np

from .states import Ensemble, IncoherentChannel, PureState, ValidationError


def complex_to_json(z):
    return [float(z.real), float(z.imag)]


def complex_from_json(obj):
    if isinstance(obj, (int, float)):
        return complex(obj)
    if not (isinstance(obj, (list, tuple)) and len(obj) == 2):
        raise ValidationError(f"complex number must be [re, im], got {obj!r}")
    return complex(float(obj[0]), float(obj[1]))


def matrix_to_json(m):
    return [[complex_to_json(z) for z in row] for row in np.asarray(m)]


def matrix_from_json(rows, d=None):
    m = np.array([[complex_from_json(z) for z in row] for row in rows], dtype=np.complex128)
    if m.ndim != 2 or (d is not None and m.shape != (d, d)):
        raise ValidationError(f"expected a {d}x{d} matrix")
    return m


def state_to_json(psi):
    return {"dim": psi.dim, "amplitudes": [complex_to_json(z) for z in psi.amplitudes]}


def state_from_json(obj):
    amps = np.array([complex_from_json(z) for z in obj["amplitudes"]], dtype=np.complex128)
    if "dim" in obj and int(obj["dim"]) != amps.size:
        raise ValidationError(f"dim {obj['dim']} does not match {amps.size} amplitudes")
    return PureState(amps)


def ensemble_to_json(ensemble):
    return {
        "dim": ensemble.dim,
        "members": [{"weight": w, "state": state_to_json(s)} for w, s in ensemble],
    }


def ensemble_from_json(obj):
    members = obj["members"]
    if not members:
        raise ValidationError("ensemble has no members")
    weights = [float(m["weight"]) for m in members]
    states = tuple(state_from_json(m["state"]) for m in members)
    e = Ensemble(weights, states)
    if "dim" in obj and int(obj["dim"]) != e.dim:
        raise ValidationError(f"dim {obj['dim']} does not match member dimension {e.dim}")
    return e


def channel_to_json(channel):
    ops = channel.kraus if isinstance(channel, IncoherentChannel) else channel
    return {"dim": int(np.asarray(ops[0]).shape[0]), "kraus": [matrix_to_json(k) for k in ops]}


def kraus_from_json(obj):
    """Raw operator list; validity is left to the caller."""
    d = int(obj["dim"])
    ops = [matrix_from_json(k, d) for k in obj["kraus"]]
    if not ops:
        raise ValidationError("channel has no Kraus operators")
    return ops


def channel_from_json(obj):
    return IncoherentChannel(tuple(kraus_from_json(obj)))


def state_or_ensemble_from_json(obj):
    if not isinstance(obj, dict):
        raise ValidationError("expected a JSON object")
    if "members" in obj:
        return ensemble_from_json(obj)
    if "amplitudes" in obj:
        return state_from_json(obj)
    raise ValidationError("object is neither a pure state nor an ensemble")


def plan_to_json(plan):
    return {
        "t": plan.transition.t.tolist(),
        "channels": [channel_to_json(c) for c in plan.per_source_channels],
    }


def dumps(obj):
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"
