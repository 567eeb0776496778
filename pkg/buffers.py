# -*- coding: utf-8 -*-
"""
Buffers do dual learner: o fast buffer (replay reiniciado a cada tarefa) e o
meta buffer persistente, com registros do final de cada tarefa usados para
estimar os pesos de integração.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Deque, Dict, Iterable, List, Optional, Union

import numpy as np

import config
from errors import ContractViolation, EmptyBucketError
from mdp_core import Transition
from tables import VisitationWeights


# ================== FAST BUFFER ==================

class FastBuffer:
    """Anel de transições da tarefa atual, com capacidade fixa."""

    def __init__(self, capacity: int = config.CAPACIDADE_FAST_BUFFER):
        if capacity < 1:
            raise ContractViolation("Capacidade do fast buffer deve ser ≥ 1.")
        self.capacity = capacity
        self._transicoes: Deque[Transition] = deque(maxlen=capacity)

    def __len__(self) -> int:
        return len(self._transicoes)

    def add(self, transition: Transition) -> None:
        self._transicoes.append(transition)

    def extend(self, transitions: Iterable[Transition]) -> None:
        self._transicoes.extend(transitions)

    def clear(self) -> None:
        self._transicoes.clear()

    def sample(self, batch_size: int, rng: np.random.Generator) -> List[Transition]:
        """Amostra uniforme com reposição."""
        if not self._transicoes:
            return []
        indices = rng.integers(len(self._transicoes), size=batch_size)
        return [self._transicoes[int(i)] for i in indices]


# ================== META BUFFER ==================

@dataclass(frozen=True)
class MetaRecord:
    """(estado, ação) ou só estado, etiquetado com a tarefa de origem."""
    state: int
    action: Optional[Union[int, np.ndarray]]
    task_id: int


@dataclass
class MetaBuffer:
    """
    Registros por tarefa, no máximo `per_task_capacity` (N) por tarefa e
    `max_tasks` (K) tarefas. `n_actions` é None quando as ações não são
    discretas (ramo por política).
    """
    per_task_capacity: int
    max_tasks: int
    n_states: int
    n_actions: Optional[int] = None
    _baldes: Dict[int, List[MetaRecord]] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        if self.per_task_capacity < 1 or self.max_tasks < 1 or self.n_states < 1:
            raise ContractViolation("N, K e o número de estados do meta buffer devem ser ≥ 1.")

    def task_ids(self) -> List[int]:
        return sorted(self._baldes)

    def records(self, task_id: int) -> List[MetaRecord]:
        return list(self._baldes.get(task_id, []))

    def count(self, task_id: int) -> int:
        return len(self._baldes.get(task_id, []))

    def total_records(self) -> int:
        return sum(len(b) for b in self._baldes.values())

    def add(self, record: MetaRecord) -> bool:
        """Guarda o registro se o balde da tarefa ainda tem espaço."""
        if not 0 <= record.state < self.n_states:
            raise ContractViolation(f"Estado {record.state} fora do meta buffer.")
        if record.task_id not in self._baldes:
            if len(self._baldes) >= self.max_tasks:
                raise ContractViolation(f"Meta buffer limitado a {self.max_tasks} tarefas.")
            self._baldes[record.task_id] = []
        balde = self._baldes[record.task_id]
        if len(balde) >= self.per_task_capacity:
            return False
        balde.append(record)
        return True

    # Serialização para checkpoints (.npz) e dump em CSV
    def as_arrays(self) -> Dict[str, np.ndarray]:
        todos = [r for t in self.task_ids() for r in self._baldes[t]]
        estados = np.array([r.state for r in todos], dtype=np.int64)
        tarefas = np.array([r.task_id for r in todos], dtype=np.int64)
        if todos and todos[0].action is not None:
            acoes = np.array([np.atleast_1d(r.action) for r in todos], dtype=float)
        else:
            acoes = np.zeros((len(todos), 0))
        meta = np.array([self.per_task_capacity, self.max_tasks, self.n_states,
                         -1 if self.n_actions is None else self.n_actions], dtype=np.int64)
        return {"buffer_states": estados, "buffer_actions": acoes, "buffer_tasks": tarefas, "buffer_meta": meta}

    @classmethod
    def from_arrays(cls, arrays: Dict[str, np.ndarray]) -> "MetaBuffer":
        N, K, S, A = (int(x) for x in arrays["buffer_meta"])
        buffer = cls(N, K, S, None if A < 0 else A)
        acoes = arrays["buffer_actions"]
        for i, (estado, tarefa) in enumerate(zip(arrays["buffer_states"], arrays["buffer_tasks"])):
            if acoes.shape[1] == 0:
                acao = None
            elif buffer.n_actions is not None:
                acao = int(acoes[i, 0])
            else:
                acao = acoes[i].copy()
            buffer.add(MetaRecord(int(estado), acao, int(tarefa)))
        return buffer

    def to_rows(self) -> List[Dict[str, object]]:
        linhas = []
        for tarefa in self.task_ids():
            for r in self._baldes[tarefa]:
                if r.action is None:
                    acao = ""
                elif isinstance(r.action, np.ndarray):
                    acao = " ".join(f"{x:.10g}" for x in r.action)
                else:
                    acao = str(r.action)
                linhas.append({"task_id": tarefa, "state": r.state, "action": acao})
        return linhas


def record_meta(buffer: MetaBuffer, record: MetaRecord, t: int, steps_per_task: int,
                tail_size: int, task_id: int) -> MetaBuffer:
    """
    Amostragem de cauda: guarda o registro apenas se t > T − N
    (t contado a partir de 1 dentro da tarefa).
    """
    if not 1 <= t <= steps_per_task:
        raise ContractViolation(f"Passo {t} fora de [1, {steps_per_task}].")
    if t > steps_per_task - tail_size:
        buffer.add(MetaRecord(record.state, record.action, task_id))
    return buffer


def estimate_weights(buffer: MetaBuffer, task_id: int) -> VisitationWeights:
    """
    Frequências empíricas normalizadas dos registros da tarefa: sobre (s,a)
    quando as ações são discretas, sobre s caso contrário.
    """
    registros = buffer.records(task_id)
    if not registros:
        raise EmptyBucketError(f"Tarefa {task_id} sem registros no meta buffer; integração deve ser pulada.")

    estados = np.array([r.state for r in registros], dtype=int)
    mu = np.bincount(estados, minlength=buffer.n_states).astype(float) / len(registros)
    if buffer.n_actions is None or registros[0].action is None:
        return VisitationWeights(mu, task_id=task_id)

    acoes = np.array([int(r.action) for r in registros], dtype=int)  # type: ignore[arg-type]
    contagem = np.zeros((buffer.n_states, buffer.n_actions))
    np.add.at(contagem, (estados, acoes), 1.0)
    return VisitationWeights(mu, contagem / len(registros), task_id)
