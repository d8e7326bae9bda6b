"""Training tasks: circuit templates, oracle tables, and input-target sets.

A circuit template is an ordered list of slots; the first listed slot acts
first on the state, so the total operator is the product of the slot
matrices taken right to left ("rightmost-acts-first").  Trainable slots are
filled from a genome; oracle slots look their matrix up in an oracle family
keyed by the classical input label of each training pair.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from . import genome as genome_mod
from .genome import CodecConfig
from .linalg import su2_closed_form, unitary_from_params

__all__ = [
    "CircuitTemplate",
    "OracleSlot",
    "TaskSpec",
    "TrainableSlot",
    "builtin_task",
    "compose_total",
    "decision_outcome",
    "deutsch_oracle",
    "deutsch_task",
    "load_task",
    "population_fitness",
    "save_task",
    "task_from_dict",
    "task_to_dict",
]

UNITARY_TOL = 1e-12
SLOT_ORDER_CONVENTION = "rightmost-acts-first"

DEUTSCH_FUNCTIONS = ("const0", "const1", "identity", "negation")


@dataclass(frozen=True)
class TrainableSlot:
    """A slot filled from the genome; ``index`` is 1-based."""

    index: int


@dataclass(frozen=True)
class OracleSlot:
    """A slot resolved from an oracle family by the input label."""

    family: str = "oracle"


Slot = Union[TrainableSlot, OracleSlot]


@dataclass(frozen=True)
class CircuitTemplate:
    """Ordered slot sequence in application order (first entry acts first)."""

    dim: int
    slots: tuple

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError(f"dim must be >= 2, got {self.dim}")
        object.__setattr__(self, "slots", tuple(self.slots))
        indices = sorted(s.index for s in self.slots if isinstance(s, TrainableSlot))
        if not indices:
            raise ValueError("template needs at least one trainable slot")
        if indices != list(range(1, len(indices) + 1)):
            raise ValueError(f"trainable indices must be 1..n without gaps, got {indices}")

    @property
    def n_trainable(self) -> int:
        return sum(1 for s in self.slots if isinstance(s, TrainableSlot))


def _frozen_state(v) -> np.ndarray:
    arr = np.array(v, dtype=complex)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class TaskSpec:
    """A template plus the data needed to score candidate genomes.

    ``pairs`` holds (input label, normalized target state) training entries;
    ``oracle_families`` maps family name -> {label -> unitary matrix}.
    Arrays are frozen after validation, so task values can be shared freely.
    """

    template: CircuitTemplate
    initial_state: np.ndarray
    pairs: tuple
    oracle_families: dict = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        d = self.template.dim
        init = _frozen_state(self.initial_state)
        if init.shape != (d,):
            raise ValueError(f"initial state must have shape ({d},), got {init.shape}")
        if abs(np.linalg.norm(init) - 1.0) > 1e-10:
            raise ValueError("initial state must be normalized")
        object.__setattr__(self, "initial_state", init)

        pairs = []
        for label, target in self.pairs:
            t = _frozen_state(target)
            if t.shape != (d,):
                raise ValueError(f"target for {label!r} must have shape ({d},)")
            if abs(np.linalg.norm(t) - 1.0) > 1e-10:
                raise ValueError(f"target for {label!r} must be normalized")
            pairs.append((str(label), t))
        if not pairs:
            raise ValueError("task needs at least one input-target pair")
        object.__setattr__(self, "pairs", tuple(pairs))

        families = {}
        for fam, table in self.oracle_families.items():
            entries = {}
            for label, mat in table.items():
                m = _frozen_state(mat)
                if m.shape != (d, d):
                    raise ValueError(f"oracle {fam!r}/{label!r} must be {d}x{d}")
                if np.max(np.abs(m.conj().T @ m - np.eye(d))) > UNITARY_TOL:
                    raise ValueError(f"oracle {fam!r}/{label!r} is not unitary")
                entries[str(label)] = m
            families[str(fam)] = entries
        object.__setattr__(self, "oracle_families", families)

        for slot in self.template.slots:
            if isinstance(slot, OracleSlot):
                table = families.get(slot.family)
                if table is None:
                    raise ValueError(f"no oracle family named {slot.family!r}")
                for label, _ in pairs:
                    if label not in table:
                        raise ValueError(
                            f"oracle family {slot.family!r} cannot resolve label {label!r}"
                        )

    @property
    def dim(self) -> int:
        return self.template.dim

    @property
    def n_slots(self) -> int:
        return self.template.n_trainable


def deutsch_oracle(name: str) -> np.ndarray:
    """Phase oracle of a one-bit Boolean function: |k> -> exp(i pi f(k)) |k>.

    ``const0`` and ``const1`` give +I and -I (the two constant functions);
    ``identity`` gives diag(1, -1) and ``negation`` diag(-1, 1) (the two
    balanced functions).
    """
    tables = {
        "const0": (0, 0),
        "const1": (1, 1),
        "identity": (0, 1),
        "negation": (1, 0),
    }
    if name not in tables:
        raise ValueError(f"unknown one-bit function {name!r}; choose from {DEUTSCH_FUNCTIONS}")
    f0, f1 = tables[name]
    return np.diag([(-1.0 + 0j) ** f0, (-1.0 + 0j) ** f1])


def deutsch_task(
    constant: str = "const0",
    balanced: str = "identity",
    all_functions: bool = False,
) -> TaskSpec:
    """One-bit oracle-decision task: drive |0> to |0> for a constant function
    and to |1> for a balanced one, with the oracle applied exactly once
    between two trainable single-qubit unitaries.

    One representative per Boolean-function class suffices because the two
    constants (and the two balanced functions) differ only by a global phase;
    pass ``all_functions=True`` to train on all four anyway.
    """
    if constant not in ("const0", "const1"):
        raise ValueError(f"constant representative must be const0 or const1, got {constant!r}")
    if balanced not in ("identity", "negation"):
        raise ValueError(f"balanced representative must be identity or negation, got {balanced!r}")
    ket0 = np.array([1.0, 0.0], dtype=complex)
    ket1 = np.array([0.0, 1.0], dtype=complex)
    if all_functions:
        pairs = (
            ("const0", ket0),
            ("const1", ket0),
            ("identity", ket1),
            ("negation", ket1),
        )
    else:
        pairs = ((constant, ket0), (balanced, ket1))
    template = CircuitTemplate(
        dim=2, slots=(TrainableSlot(1), OracleSlot("oracle"), TrainableSlot(2))
    )
    family = {name: deutsch_oracle(name) for name in DEUTSCH_FUNCTIONS}
    return TaskSpec(
        template=template,
        initial_state=ket0,
        pairs=pairs,
        oracle_families={"oracle": family},
        name="deutsch",
    )


def builtin_task(name: str) -> TaskSpec:
    """Look up a task shipped with the package (currently just ``deutsch``)."""
    if name == "deutsch":
        return deutsch_task()
    raise KeyError(f"no built-in task named {name!r}")


def _trainable_unitaries(params: np.ndarray, dim: int, use_closed_form=None) -> np.ndarray:
    fast = dim == 2 if use_closed_form is None else use_closed_form
    if fast and dim != 2:
        raise ValueError("closed form is only available for dimension 2")
    return su2_closed_form(params) if fast else unitary_from_params(params, dim)


def compose_total(task: TaskSpec, genome: np.ndarray, codec: CodecConfig, x: str,
                  use_closed_form=None) -> np.ndarray:
    """Total operator of the circuit for input label ``x`` and one genome.

    Trainable slots are decoded from the genome; oracle slots resolve ``x``
    in their family table.  Slots multiply right to left, first listed acting
    first on the state.
    """
    if codec.dim != task.dim:
        raise ValueError(f"codec dimension {codec.dim} != task dimension {task.dim}")
    params = genome_mod.decode(np.asarray(genome), codec)
    if params.shape != (task.n_slots, codec.n_components):
        raise ValueError(
            f"genome shape {params.shape} does not match {task.n_slots} trainable slots"
        )
    us = _trainable_unitaries(params, task.dim, use_closed_form)
    total = np.eye(task.dim, dtype=complex)
    for slot in task.template.slots:
        if isinstance(slot, TrainableSlot):
            m = us[slot.index - 1]
        else:
            table = task.oracle_families[slot.family]
            if x not in table:
                raise KeyError(f"oracle family {slot.family!r} cannot resolve label {x!r}")
            m = table[x]
        total = m @ total
    return total


def population_fitness(task: TaskSpec, params: np.ndarray, use_closed_form=None) -> np.ndarray:
    """Mean output fidelity against the targets, batched over candidates.

    ``params`` has shape ``(..., n_slots, d*d-1)``; the result drops the last
    two axes.  Each candidate scores the average of ``|<target_x| U_total(x)
    |initial>|**2`` over the task's input-target pairs.
    """
    params = np.asarray(params, dtype=float)
    d = task.dim
    if params.shape[-2:] != (task.n_slots, d * d - 1):
        raise ValueError(
            f"params must end in shape {(task.n_slots, d * d - 1)}, got {params.shape[-2:]}"
        )
    us = _trainable_unitaries(params, d, use_closed_form)
    batch = params.shape[:-2]
    total = np.zeros(batch, dtype=float)
    for label, target in task.pairs:
        state = np.broadcast_to(task.initial_state, batch + (d,))
        for slot in task.template.slots:
            if isinstance(slot, TrainableSlot):
                m = us[..., slot.index - 1, :, :]
                state = np.einsum("...ij,...j->...i", m, state)
            else:
                m = task.oracle_families[slot.family][label]
                state = np.einsum("ij,...j->...i", m, state)
        amp = np.einsum("i,...i->...", target.conj(), state)
        total += amp.real**2 + amp.imag**2
    return total / len(task.pairs)


def decision_outcome(out_constant: np.ndarray, out_balanced: np.ndarray):
    """Measurement statistics of the two-branch decision in the {|0>,|1>} basis.

    Returns ``(success_constant, success_balanced, orthogonality_defect)``:
    the probabilities of announcing each branch correctly, and the squared
    overlap of the two output states (0 exactly when a single query can
    discriminate them perfectly).
    """
    a = np.asarray(out_constant, dtype=complex)
    b = np.asarray(out_balanced, dtype=complex)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"output shapes do not match: {a.shape} vs {b.shape}")
    success_const = float(abs(a[0]) ** 2)
    success_balanced = float(abs(b[1]) ** 2)
    defect = float(abs(np.vdot(a, b)) ** 2)
    return success_const, success_balanced, defect


def _matrix_to_json(m: np.ndarray):
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m, complex)]


def _matrix_from_json(rows) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows])


def _vector_to_json(v: np.ndarray):
    return [[float(z.real), float(z.imag)] for z in np.asarray(v, complex)]


def _vector_from_json(entries) -> np.ndarray:
    return np.array([complex(re, im) for re, im in entries])


def task_to_dict(task: TaskSpec) -> dict:
    """JSON-ready description of a task (complex numbers as [re, im] pairs)."""
    slots = []
    for slot in task.template.slots:
        if isinstance(slot, TrainableSlot):
            slots.append({"kind": "trainable", "index": slot.index})
        else:
            slots.append({"kind": "oracle", "family": slot.family})
    return {
        "name": task.name,
        "dim": task.dim,
        "slot_order": SLOT_ORDER_CONVENTION,
        "slots": slots,
        "initial_state": _vector_to_json(task.initial_state),
        "pairs": [[label, _vector_to_json(t)] for label, t in task.pairs],
        "oracle_families": {
            fam: {label: _matrix_to_json(m) for label, m in table.items()}
            for fam, table in task.oracle_families.items()
        },
    }


def task_from_dict(data: dict) -> TaskSpec:
    """Inverse of :func:`task_to_dict`."""
    order = data.get("slot_order", SLOT_ORDER_CONVENTION)
    if order != SLOT_ORDER_CONVENTION:
        raise ValueError(f"unsupported slot order {order!r}")
    slots = []
    for s in data["slots"]:
        if s["kind"] == "trainable":
            slots.append(TrainableSlot(int(s["index"])))
        elif s["kind"] == "oracle":
            slots.append(OracleSlot(s.get("family", "oracle")))
        else:
            raise ValueError(f"unknown slot kind {s['kind']!r}")
    template = CircuitTemplate(dim=int(data["dim"]), slots=tuple(slots))
    return TaskSpec(
        template=template,
        initial_state=_vector_from_json(data["initial_state"]),
        pairs=tuple((label, _vector_from_json(t)) for label, t in data["pairs"]),
        oracle_families={
            fam: {label: _matrix_from_json(m) for label, m in table.items()}
            for fam, table in data.get("oracle_families", {}).items()
        },
        name=data.get("name", ""),
    )


def save_task(task: TaskSpec, path) -> None:
    """Write a task description file."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(task_to_dict(task), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_task(path) -> TaskSpec:
    """Read a task description file."""
    with open(path, encoding="utf-8") as fh:
        return task_from_dict(json.load(fh))
