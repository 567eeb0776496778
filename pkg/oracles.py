# -*- coding: utf-8 -*-
"""
Oráculos de força bruta para as regras de integração e o CF: cada suíte gera
instâncias aleatórias com sementes conhecidas e compara a implementação
incremental com a solução direta (lote, otimização numérica ou quadratura).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np
from scipy import integrate, optimize, stats
from scipy.special import log_softmax

from buffers import MetaBuffer, MetaRecord
from distance import DivergenceSpec, cf_q
from meta_learner import (MetaState, integrate_policy_kl, integrate_policy_wd, integrate_q_l2,
                          integrate_softmax_kl, w2_squared_diag_gaussian)
from tables import GaussianPolicyTable, QTable, VisitationWeights


@dataclass
class OracleResult:
    suite: str
    instances: int
    tolerance: float
    max_error: float = 0.0
    failed_seeds: List[int] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failed_seeds

    def resumo(self) -> str:
        marca = "✅" if self.passed else "❌"
        texto = (f"{marca} {self.suite}: {self.instances} instâncias, erro máximo {self.max_error:.3e} "
                 f"(tolerância {self.tolerance:.0e})")
        if self.failed_seeds:
            texto += f"; sementes com falha: {self.failed_seeds}"
        return texto


# ================== MINIMIZADORES EM LOTE ==================

def l2_batch_minimizer(q_tables: Sequence[np.ndarray], weights: Sequence[np.ndarray]) -> np.ndarray:
    """Σ_i w_i Q_i / Σ_i w_i por (s,a); entradas sem peso ficam em zero (Q^M inicial)."""
    soma_pesos = np.sum(weights, axis=0)
    soma = np.sum([w * q for q, w in zip(q_tables, weights)], axis=0)
    resultado = np.zeros_like(soma)
    com_peso = soma_pesos > 0
    resultado[com_peso] = soma[com_peso] / soma_pesos[com_peso]
    return resultado


def wd_batch_minimizer(means: Sequence[np.ndarray], stds: Sequence[np.ndarray],
                       mus: Sequence[np.ndarray]) -> Tuple[np.ndarray, np.ndarray]:
    """Médias ponderadas por μ_i(s) de ν_i(s) e σ_i(s); células sem peso ficam em (0, 1)."""
    soma_mu = np.sum(mus, axis=0)
    media = np.zeros_like(means[0])
    desvio = np.ones_like(stds[0])
    com_peso = soma_mu > 0
    pesos = np.stack(mus)[:, com_peso, None] / soma_mu[com_peso, None]
    media[com_peso] = np.sum(pesos * np.stack(means)[:, com_peso], axis=0)
    desvio[com_peso] = np.sum(pesos * np.stack(stds)[:, com_peso], axis=0)
    return media, desvio


def w2_quadrature_1d(m1: float, s1: float, m2: float, s2: float) -> float:
    """W2² entre gaussianas 1-D por integração das funções quantil."""
    integrando = lambda u: (stats.norm.ppf(u, m1, s1) - stats.norm.ppf(u, m2, s2)) ** 2
    valor, _ = integrate.quad(integrando, 0.0, 1.0, limit=200)
    return float(valor)


def _pesos_aleatorios(rng: np.random.Generator, shape: Tuple[int, ...]) -> np.ndarray:
    """Pesos positivos somando 1, com parte das entradas zerada."""
    pesos = rng.random(shape) * (rng.random(shape) < 0.7)
    if pesos.sum() == 0:
        pesos.flat[0] = 1.0
    return pesos / pesos.sum()


# ================== SUÍTES ==================

def _suite_l2(rng: np.random.Generator) -> float:
    S, A, K = int(rng.integers(1, 13)), int(rng.integers(1, 6)), int(rng.integers(1, 7))
    tabelas = [rng.normal(0.0, 5.0, (S, A)) for _ in range(K)]
    pesos = [_pesos_aleatorios(rng, (S, A)) for _ in range(K)]
    meta = MetaState()
    for q, w in zip(tabelas, pesos):
        meta = integrate_q_l2(meta, QTable(q), VisitationWeights(w.sum(axis=1), w))
    return float(np.max(np.abs(meta.meta_q.values - l2_batch_minimizer(tabelas, pesos))))


def _suite_wd(rng: np.random.Generator) -> float:
    C, D, K = int(rng.integers(1, 13)), int(rng.integers(1, 4)), int(rng.integers(1, 7))
    medias = [rng.normal(0.0, 2.0, (C, D)) for _ in range(K)]
    desvios = [rng.uniform(0.1, 2.0, (C, D)) for _ in range(K)]
    mus = [_pesos_aleatorios(rng, (C,)) for _ in range(K)]
    meta = MetaState()
    for m, s, mu in zip(medias, desvios, mus):
        meta = integrate_policy_wd(meta, GaussianPolicyTable(m, s), VisitationWeights(mu))
    media, desvio = wd_batch_minimizer(medias, desvios, mus)
    politica = meta.meta_policy
    return float(max(np.max(np.abs(politica.mean - media)), np.max(np.abs(politica.std - desvio))))


def _suite_w2(rng: np.random.Generator) -> float:
    m1, m2 = rng.uniform(-5.0, 5.0, 2)
    s1, s2 = rng.uniform(0.1, 5.0, 2)
    fechado = w2_squared_diag_gaussian((np.array([m1]), np.array([s1])), (np.array([m2]), np.array([s2])))
    return abs(fechado - w2_quadrature_1d(m1, s1, m2, s2))


def _buffer_categorico(rng: np.random.Generator) -> MetaBuffer:
    S, A, K = int(rng.integers(1, 7)), int(rng.integers(2, 5)), int(rng.integers(1, 4))
    buffer = MetaBuffer(per_task_capacity=10_000, max_tasks=K, n_states=S, n_actions=A)
    for tarefa in range(K):
        visitados = rng.random(S) < 0.7
        visitados[int(rng.integers(S))] = True
        for s in np.flatnonzero(visitados):
            for a in range(A):
                for _ in range(int(rng.integers(1, 15))):
                    buffer.add(MetaRecord(int(s), a, tarefa))
    return buffer


def _pesos_dos_registros(buffer: MetaBuffer) -> np.ndarray:
    """Σ_i contagem_i(s,a)/|M_i| percorrendo os registros um a um."""
    pesos = np.zeros((buffer.n_states, buffer.n_actions))
    for tarefa in buffer.task_ids():
        registros = buffer.records(tarefa)
        for r in registros:
            pesos[r.state, int(r.action)] += 1.0 / len(registros)
    return pesos


def _suite_softmax_kl(rng: np.random.Generator) -> float:
    buffer = _buffer_categorico(rng)
    meta = integrate_softmax_kl(MetaState(), buffer, tau=1.0, smoothing=0.0)
    pesos = _pesos_dos_registros(buffer)
    erro = 0.0
    for s in np.flatnonzero(pesos.sum(axis=1) > 0):
        objetivo = lambda z, c=pesos[s]: -float(np.sum(c * log_softmax(z)))
        gradiente = lambda z, c=pesos[s]: np.exp(log_softmax(z)) * c.sum() - c
        res = optimize.minimize(objetivo, np.zeros(buffer.n_actions), jac=gradiente, method="BFGS",
                                options={"gtol": 1e-12})
        numerico = np.exp(log_softmax(res.x))
        erro = max(erro, 0.5 * float(np.sum(np.abs(numerico - meta.meta_policy.probs[s]))))
    return erro


def _suite_softmax_kl_fast(rng: np.random.Generator) -> float:
    """Integração incremental com pesos μ̂_i(s)·softmax(Q_i/τ) contra a soma direta."""
    S, A, K = int(rng.integers(1, 13)), int(rng.integers(2, 6)), int(rng.integers(1, 7))
    tau = float(rng.uniform(0.2, 2.0))
    buffer = MetaBuffer(per_task_capacity=50, max_tasks=K, n_states=S, n_actions=A)
    tabelas = [rng.normal(0.0, 2.0, (S, A)) for _ in range(K)]
    soma = np.zeros((S, A))
    meta = MetaState()
    for tarefa, q in enumerate(tabelas):
        estados = rng.integers(S, size=int(rng.integers(1, 30)))
        for s in estados:
            buffer.add(MetaRecord(int(s), int(rng.integers(A)), tarefa))
        mu = np.bincount(estados, minlength=S) / len(estados)
        politica = np.exp(log_softmax(q / tau, axis=1))
        soma += mu[:, None] * politica
        meta = integrate_softmax_kl(meta, buffer, tau=tau, smoothing=0.0, fast_q=QTable(q, tau), task_id=tarefa)
    com_peso = soma.sum(axis=1) > 0
    direto = soma[com_peso] / soma[com_peso].sum(axis=1, keepdims=True)
    return float(np.max(np.abs(meta.meta_policy.probs[com_peso] - direto)))


def _suite_policy_kl(rng: np.random.Generator) -> float:
    C, K = int(rng.integers(1, 5)), int(rng.integers(1, 4))
    buffer = MetaBuffer(per_task_capacity=10_000, max_tasks=K, n_states=C)
    for tarefa in range(K):
        centro = rng.normal(0.0, 1.0, C)
        for _ in range(int(rng.integers(5, 40))):
            c = int(rng.integers(C))
            buffer.add(MetaRecord(c, np.array([centro[c] + rng.normal(0.0, 0.5)]), tarefa))
    meta = integrate_policy_kl(MetaState(), buffer, action_dim=1)

    erro = 0.0
    registros = [r for t in buffer.task_ids() for r in buffer.records(t)]
    tamanho = {t: buffer.count(t) for t in buffer.task_ids()}
    for c in range(C):
        amostras = [(float(r.action[0]), 1.0 / tamanho[r.task_id]) for r in registros if r.state == c]
        if len(amostras) < 2:
            continue
        a, w = (np.array(x) for x in zip(*amostras))

        def nll(theta: np.ndarray) -> float:
            m, log_s = theta
            return float(np.sum(w * (0.5 * ((a - m) / np.exp(log_s)) ** 2 + log_s)))

        res = optimize.minimize(nll, np.array([0.0, 0.0]), method="Nelder-Mead",
                                options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 20_000})
        erro = max(erro, abs(res.x[0] - meta.meta_policy.mean[c, 0]),
                   abs(np.exp(res.x[1]) - meta.meta_policy.std[c, 0]))
    return erro


def _suite_cf(rng: np.random.Generator) -> float:
    S, A = int(rng.integers(1, 13)), int(rng.integers(1, 6))
    q1, q2 = rng.normal(0.0, 3.0, (S, A)), rng.normal(0.0, 3.0, (S, A))
    w = _pesos_aleatorios(rng, (S, A))
    pesos = VisitationWeights(w.sum(axis=1), w)
    if cf_q(q1, q1, pesos) != 0.0 or cf_q(q1, q2, pesos) < 0.0:
        return np.inf
    forca_bruta = sum(w[s, a] * (q2[s, a] - q1[s, a]) ** 2 for s in range(S) for a in range(A))
    sup = max((abs(q2[s, a] - q1[s, a]) for s in range(S) for a in range(A) if w[s, a] > 0), default=0.0)
    return max(abs(cf_q(q1, q2, pesos) - forca_bruta),
               abs(cf_q(q1, q2, pesos, DivergenceSpec(q_metric="sup-norm")) - sup))


SUITES: Dict[str, Tuple[Callable[[np.random.Generator], float], float]] = {
    "l2": (_suite_l2, 1e-9),
    "wd": (_suite_wd, 1e-9),
    "w2-closed-form": (_suite_w2, 1e-4),
    "softmax-kl": (_suite_softmax_kl, 1e-3),
    "softmax-kl-fast": (_suite_softmax_kl_fast, 1e-9),
    "policy-kl": (_suite_policy_kl, 1e-6),
    "cf": (_suite_cf, 1e-10),
}


def run_suite(suite: str, n_instances: int = 100, seed: int = 0) -> OracleResult:
    """Roda uma suíte; a semente da instância i é seed + i."""
    if suite not in SUITES:
        raise KeyError(f"Suíte de oráculo desconhecida: {suite}. Opções: {', '.join(SUITES)}")
    funcao, tolerancia = SUITES[suite]
    resultado = OracleResult(suite, n_instances, tolerancia)
    for i in range(n_instances):
        semente = seed + i
        erro = funcao(np.random.default_rng(semente))
        resultado.max_error = max(resultado.max_error, erro)
        if not erro <= tolerancia:
            resultado.failed_seeds.append(semente)
            logging.error(f"Oráculo '{suite}' falhou na semente {semente} (erro {erro:.3e}).")
    return resultado
