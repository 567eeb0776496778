# -*- coding: utf-8 -*-
"""
Distância entre MDPs e esquecimento catastrófico (CF) entre aprendizes
consecutivos, nas versões por valor e por política.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

import config
from errors import ContractViolation
from meta_learner import w2_squared_diag_gaussian
from tables import GaussianPolicyTable, QTable, VisitationWeights, softmax_rows

__all__ = ["DivergenceSpec", "VisitationWeights", "mdp_distance", "cf_q", "cf_pi",
           "kl_categorical", "kl_diag_gaussian"]

METRICAS_Q = ("squared-l2", "sup-norm")
METRICAS_PI = ("kl", "squared-w2")


@dataclass(frozen=True)
class DivergenceSpec:
    """Escolha de d_Q e d_π (uma métrica por família)."""
    q_metric: str = "squared-l2"
    pi_metric: str = "kl"

    def __post_init__(self) -> None:
        if self.q_metric not in METRICAS_Q:
            raise ContractViolation(f"d_Q desconhecida: {self.q_metric}.")
        if self.pi_metric not in METRICAS_PI:
            raise ContractViolation(f"d_π desconhecida: {self.pi_metric}.")


def _valores(q: Union[QTable, np.ndarray]) -> np.ndarray:
    return q.values if isinstance(q, QTable) else np.asarray(q, dtype=float)


# ================== DIVERGÊNCIAS POR ESTADO ==================

def kl_categorical(p: np.ndarray, q: np.ndarray, epsilon: float = config.EPSILON_KL) -> np.ndarray:
    """
    KL(p ‖ q) linha a linha. Com epsilon > 0 as probabilidades recebem piso e
    são renormalizadas; com epsilon = 0 suporte incompatível dá infinito.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if epsilon > 0:
        p = np.maximum(p, epsilon)
        p = p / p.sum(axis=-1, keepdims=True)
        q = np.maximum(q, epsilon)
        q = q / q.sum(axis=-1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        termos = np.where(p > 0, p * (np.log(p) - np.log(q)), 0.0)
    return termos.sum(axis=-1)


def kl_diag_gaussian(mean_p: np.ndarray, std_p: np.ndarray,
                     mean_q: np.ndarray, std_q: np.ndarray) -> np.ndarray:
    """KL(N_p ‖ N_q) para gaussianas diagonais, somado na última dimensão."""
    termos = (np.log(std_q / std_p)
              + (std_p ** 2 + (mean_p - mean_q) ** 2) / (2.0 * std_q ** 2) - 0.5)
    return termos.sum(axis=-1)


# ================== DISTÂNCIA ENTRE MDPs ==================

def mdp_distance(q_star_1: Union[QTable, np.ndarray], q_star_2: Union[QTable, np.ndarray],
                 d: DivergenceSpec = DivergenceSpec(), kind: str = "q",
                 weights: Optional[np.ndarray] = None, tau: float = config.TEMPERATURA_PADRAO) -> float:
    """
    Distância entre dois MDPs pelos seus Q* (kind='q') ou pelas políticas
    softmax de Q* com τ compartilhado (kind='policy').

    A ponderação sobre (s,a) ou s é uniforme por padrão. Na versão por
    política o KL é simetrizado (média das duas direções).
    """
    v1, v2 = _valores(q_star_1), _valores(q_star_2)
    if v1.shape != v2.shape:
        raise ContractViolation(f"Q* com formatos diferentes: {v1.shape} vs {v2.shape}.")
    S, A = v1.shape

    if kind == "q":
        pesos = np.full((S, A), 1.0 / (S * A)) if weights is None else np.asarray(weights, dtype=float)
        if d.q_metric == "sup-norm":
            suporte = pesos > 0
            return float(np.max(np.abs(v1 - v2)[suporte])) if suporte.any() else 0.0
        return float(np.sum(pesos * (v1 - v2) ** 2))

    if kind == "policy":
        if d.pi_metric != "kl":
            raise ContractViolation("Distância por política entre Q* discretos só admite d_π = KL.")
        pesos = np.full(S, 1.0 / S) if weights is None else np.asarray(weights, dtype=float)
        p1, p2 = softmax_rows(v1, tau), softmax_rows(v2, tau)
        simetrico = 0.5 * (kl_categorical(p1, p2, 0.0) + kl_categorical(p2, p1, 0.0))
        return float(np.sum(pesos * simetrico))

    raise ContractViolation(f"Tipo de distância desconhecido: {kind}.")


# ================== ESQUECIMENTO CATASTRÓFICO ==================

def cf_q(q_prev: Union[QTable, np.ndarray], q_cur: Union[QTable, np.ndarray],
         weights_prev: VisitationWeights, d: DivergenceSpec = DivergenceSpec()) -> float:
    """
    CF(Q_{k-1}, Q_k) = Σ w_{k-1}(s,a) d_Q(Q_{k-1}(s,a), Q_k(s,a)), com w_{k-1}
    avaliado sob a política gulosa do aprendiz anterior no ambiente anterior.
    Com d_Q = sup-norm devolve o máximo de |ΔQ| no suporte dos pesos.
    """
    v_prev, v_cur = _valores(q_prev), _valores(q_cur)
    if v_prev.shape != v_cur.shape:
        raise ContractViolation("Q_{k-1} e Q_k com formatos diferentes.")
    if weights_prev.state_action is None:
        raise ContractViolation("cf_q exige pesos w(s,a) (use VisitationWeights.compose).")
    pesos = weights_prev.state_action
    if pesos.shape != v_prev.shape:
        raise ContractViolation("Pesos w(s,a) com formato incompatível.")
    if d.q_metric == "sup-norm":
        suporte = pesos > 0
        return float(np.max(np.abs(v_cur - v_prev)[suporte])) if suporte.any() else 0.0
    return float(np.sum(pesos * (v_cur - v_prev) ** 2))


def cf_pi(pi_prev: Union[np.ndarray, GaussianPolicyTable], pi_cur: Union[np.ndarray, GaussianPolicyTable],
          mu_prev: VisitationWeights, d: DivergenceSpec = DivergenceSpec(),
          epsilon: float = config.EPSILON_KL) -> float:
    """
    CF(π_{k-1}, π_k) = Σ μ_{k-1}(s) d_π(π_k(·|s), π_{k-1}(·|s)).

    Políticas categóricas são tabelas [estado][ação] (só KL); políticas
    gaussianas aceitam KL ou W2². Suporte incompatível no KL sem piso
    devolve math.inf.
    """
    mu = mu_prev.state
    if isinstance(pi_prev, GaussianPolicyTable) != isinstance(pi_cur, GaussianPolicyTable):
        raise ContractViolation("As duas políticas devem ser do mesmo tipo.")

    if isinstance(pi_prev, GaussianPolicyTable):
        if pi_prev.mean.shape != pi_cur.mean.shape or mu.shape[0] != pi_prev.n_cells:
            raise ContractViolation("Tabelas gaussianas e μ com formatos incompatíveis.")
        if d.pi_metric == "squared-w2":
            por_estado = w2_squared_diag_gaussian((pi_cur.mean, pi_cur.std), (pi_prev.mean, pi_prev.std))
        else:
            por_estado = kl_diag_gaussian(pi_cur.mean, pi_cur.std, pi_prev.mean, pi_prev.std)
    else:
        if d.pi_metric != "kl":
            raise ContractViolation("Políticas categóricas só admitem d_π = KL.")
        p_prev, p_cur = np.asarray(pi_prev, dtype=float), np.asarray(pi_cur, dtype=float)
        if p_prev.shape != p_cur.shape or mu.shape[0] != p_prev.shape[0]:
            raise ContractViolation("Políticas e μ com formatos incompatíveis.")
        por_estado = kl_categorical(p_cur, p_prev, epsilon)

    suporte = mu > 0
    if not suporte.any():
        return 0.0
    valores = por_estado[suporte]
    if np.any(np.isinf(valores)):
        return math.inf
    return float(np.sum(mu[suporte] * valores))
