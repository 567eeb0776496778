# -*- coding: utf-8 -*-
"""
Tabelas de parâmetros compartilhadas pelos aprendizes rápido e meta:
QTable, GaussianPolicyTable, CategoricalPolicyTable e VisitationWeights.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import softmax

import config
from errors import ContractViolation


def softmax_rows(values: np.ndarray, tau: float) -> np.ndarray:
    """softmax(values/τ) linha a linha."""
    if tau <= 0:
        raise ContractViolation(f"Temperatura deve ser positiva (recebido {tau}).")
    return softmax(np.asarray(values, dtype=float) / tau, axis=-1)


# ================== APRENDIZ POR VALOR ==================

@dataclass
class QTable:
    """Q_k ou Q^M_k: tabela [estado][ação] com temperatura τ para leitura softmax."""
    values: np.ndarray
    temperature: float = config.TEMPERATURA_PADRAO

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2:
            raise ContractViolation("QTable exige uma tabela 2-D [estado][ação].")
        if self.temperature <= 0:
            raise ContractViolation("Temperatura τ deve ser positiva.")

    @classmethod
    def zeros(cls, n_states: int, n_actions: int, temperature: float = config.TEMPERATURA_PADRAO) -> "QTable":
        return cls(np.zeros((n_states, n_actions)), temperature)

    @property
    def n_states(self) -> int:
        return self.values.shape[0]

    @property
    def n_actions(self) -> int:
        return self.values.shape[1]

    def copy(self) -> "QTable":
        return QTable(self.values.copy(), self.temperature)

    def softmax(self) -> np.ndarray:
        return softmax_rows(self.values, self.temperature)

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.values)))


# ================== POLÍTICAS ==================

@dataclass
class GaussianPolicyTable:
    """
    Política gaussiana independente por célula da grade de estados:
    média ν(s) e desvio σ(s), ambos [célula][dimensão da ação].

    `baseline` guarda a média móvel dos retornos por célula usada pelo
    REINFORCE; não faz parte da distribuição e não é integrada no meta.
    """
    mean: np.ndarray
    std: np.ndarray
    baseline: np.ndarray = field(default=None)  # type: ignore[assignment]
    visits: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        self.mean = np.atleast_2d(np.asarray(self.mean, dtype=float))
        self.std = np.atleast_2d(np.asarray(self.std, dtype=float))
        if self.mean.shape != self.std.shape:
            raise ContractViolation("Média e desvio devem ter o mesmo formato.")
        n_cells = self.mean.shape[0]
        if self.baseline is None:
            self.baseline = np.zeros(n_cells)
        if self.visits is None:
            self.visits = np.zeros(n_cells, dtype=np.int64)

    @classmethod
    def fresh(cls, n_cells: int, action_dim: int) -> "GaussianPolicyTable":
        """Inicialização de referência (ν, σ) = (0, 1)."""
        return cls(np.zeros((n_cells, action_dim)), np.ones((n_cells, action_dim)))

    @property
    def n_cells(self) -> int:
        return self.mean.shape[0]

    @property
    def action_dim(self) -> int:
        return self.mean.shape[1]

    def copy(self) -> "GaussianPolicyTable":
        return GaussianPolicyTable(self.mean.copy(), self.std.copy(),
                                   self.baseline.copy(), self.visits.copy())

    def parameters_only(self) -> "GaussianPolicyTable":
        """Cópia de (ν, σ) com estatísticas de baseline zeradas."""
        return GaussianPolicyTable(self.mean.copy(), self.std.copy())

    def sample(self, cell: int, rng: np.random.Generator) -> np.ndarray:
        return self.mean[cell] + self.std[cell] * rng.standard_normal(self.action_dim)


@dataclass
class CategoricalPolicyTable:
    """π^M_k no ramo por valor: probabilidades [estado][ação]."""
    probs: np.ndarray

    def __post_init__(self) -> None:
        self.probs = np.asarray(self.probs, dtype=float)
        if self.probs.ndim != 2:
            raise ContractViolation("CategoricalPolicyTable exige tabela 2-D.")
        if np.any(self.probs < 0) or np.any(np.abs(self.probs.sum(axis=1) - 1.0) > config.TOLERANCIA_SOMA):
            raise ContractViolation("Cada linha da política categórica deve estar no simplex.")

    @classmethod
    def uniform(cls, n_states: int, n_actions: int) -> "CategoricalPolicyTable":
        return cls(np.full((n_states, n_actions), 1.0 / n_actions))

    @property
    def n_states(self) -> int:
        return self.probs.shape[0]

    @property
    def n_actions(self) -> int:
        return self.probs.shape[1]

    def copy(self) -> "CategoricalPolicyTable":
        return CategoricalPolicyTable(self.probs.copy())

    def sample(self, state: int, rng: np.random.Generator) -> int:
        linha = np.cumsum(self.probs[state])
        return int(min(np.searchsorted(linha, rng.random(), side="right"), self.n_actions - 1))


# ================== PESOS DE VISITAÇÃO ==================

@dataclass(frozen=True)
class VisitationWeights:
    """
    μ(s) e, quando composto com uma política, w(s,a) = μ(s)π(a|s).
    Não-negativos e somando 1 (tolerância 1e-10).
    """
    state: np.ndarray
    state_action: Optional[np.ndarray] = None
    task_id: Optional[int] = None

    def __post_init__(self) -> None:
        estado = np.asarray(self.state, dtype=float)
        object.__setattr__(self, "state", estado)
        _validar_distribuicao(estado, "μ(s)")
        if self.state_action is not None:
            conjunto = np.asarray(self.state_action, dtype=float)
            object.__setattr__(self, "state_action", conjunto)
            _validar_distribuicao(conjunto, "w(s,a)")

    @property
    def n_states(self) -> int:
        return self.state.shape[0]

    def compose(self, policy: np.ndarray) -> "VisitationWeights":
        """Devolve os pesos com w(s,a) = μ(s)π(a|s)."""
        policy = np.asarray(policy, dtype=float)
        if policy.shape[0] != self.n_states:
            raise ContractViolation("Política e μ têm números de estados diferentes.")
        return VisitationWeights(self.state, self.state[:, None] * policy, self.task_id)


def _validar_distribuicao(valores: np.ndarray, nome: str) -> None:
    if np.any(valores < 0):
        raise ContractViolation(f"{nome} contém pesos negativos.")
    soma = float(valores.sum())
    if abs(soma - 1.0) > config.TOLERANCIA_SOMA:
        raise ContractViolation(f"{nome} deve somar 1 (soma = {soma!r}).")
