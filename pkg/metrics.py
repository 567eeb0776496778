# -*- coding: utf-8 -*-
"""
Métricas de RL contínuo calculadas a partir das curvas de aprendizado:
desempenho médio P_K(t), forward transfer (FT) contra o baseline Reset e
esquecimento (F). Todas são funções puras das curvas registradas.
"""
from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy import stats
from scipy.integrate import trapezoid

from errors import ContractViolation

NORMALIZACOES = ("raw", "minmax")


@dataclass(frozen=True, eq=False)
class LearningCurve:
    """
    p_i(t) para as K tarefas, amostrado numa grade fixa sobre [0, K·T].
    `values` tem formato [tarefa][ponto da grade]; `bounds` guarda os
    limites (min, max) usados na normalização, quando houver.
    """
    grid: np.ndarray
    values: np.ndarray
    steps_per_task: int
    bounds: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        grade = np.asarray(self.grid, dtype=float)
        valores = np.atleast_2d(np.asarray(self.values, dtype=float))
        object.__setattr__(self, "grid", grade)
        object.__setattr__(self, "values", valores)
        if grade.ndim != 1 or grade.size < 2 or np.any(np.diff(grade) <= 0):
            raise ContractViolation("A grade de avaliação deve ser estritamente crescente.")
        if valores.shape[1] != grade.size:
            raise ContractViolation("Curvas e grade com tamanhos diferentes.")
        if not np.all(np.isfinite(valores)):
            raise ContractViolation("Curvas devem ser finitas.")
        if self.steps_per_task < 1:
            raise ContractViolation("steps_per_task deve ser ≥ 1.")

    @property
    def n_tasks(self) -> int:
        return self.values.shape[0]

    @property
    def normalized(self) -> bool:
        return self.bounds is not None

    def index_of(self, t: float) -> int:
        """Índice do ponto da grade em t; fora da grade usa o ponto anterior mais próximo."""
        tolerancia = 1e-9 * max(1.0, float(self.grid[-1]))
        indice = int(np.searchsorted(self.grid, t + tolerancia, side="right")) - 1
        if indice < 0:
            raise ContractViolation(f"t = {t} antes do início da grade.")
        if abs(self.grid[indice] - t) > tolerancia:
            logging.warning(f"t = {t} fora da grade de avaliação; usando t = {self.grid[indice]}.")
        return indice

    def boundary(self, task_number: int) -> float:
        """Fim da tarefa `task_number` (contada a partir de 1): i·T."""
        return float(task_number * self.steps_per_task)


def uniform_grid(n_tasks: int, steps_per_task: int, points_per_task: int) -> np.ndarray:
    """Grade 0, T/P, 2T/P, ..., K·T com as fronteiras de tarefa exatas."""
    if points_per_task < 1:
        raise ContractViolation("points_per_task deve ser ≥ 1.")
    indices = np.arange(n_tasks * points_per_task + 1)
    return indices * steps_per_task / points_per_task


# ================== MÉTRICAS ==================

def average_performance(curves: LearningCurve, t: float) -> float:
    """P_K(t) = (1/K) Σ_i p_i(t)."""
    return float(np.mean(curves.values[:, curves.index_of(t)]))


def _auc_por_tarefa(curves: LearningCurve) -> np.ndarray:
    T = curves.steps_per_task
    areas = np.zeros(curves.n_tasks)
    for i in range(curves.n_tasks):
        inicio, fim = curves.index_of(i * T), curves.index_of((i + 1) * T)
        janela = slice(inicio, fim + 1)
        areas[i] = trapezoid(curves.values[i, janela], curves.grid[janela]) / T
    return areas


def forward_transfer(curves: LearningCurve,
                     baseline_curves: LearningCurve) -> Tuple[float, List[Optional[float]]]:
    """
    FTr_i = (AUC_i − AUC_i^b) / (1 − AUC_i^b), com AUC pela regra do trapézio
    na janela de treino da própria tarefa. AUC_i^b = 1 deixa FTr_i ausente.
    FT é a média das entradas definidas.
    """
    if curves.values.shape != baseline_curves.values.shape or not np.allclose(curves.grid, baseline_curves.grid):
        raise ContractViolation("Curva e baseline devem compartilhar grade e número de tarefas.")
    for curva in (curves, baseline_curves):
        if np.any(curva.values < -1e-12) or np.any(curva.values > 1 + 1e-12):
            raise ContractViolation("FT exige curvas normalizadas em [0, 1].")

    auc, auc_b = _auc_por_tarefa(curves), _auc_por_tarefa(baseline_curves)
    por_tarefa: List[Optional[float]] = []
    for a, b in zip(auc, auc_b):
        por_tarefa.append(None if b >= 1.0 else float((a - b) / (1.0 - b)))
    definidos = [x for x in por_tarefa if x is not None]
    return (float(np.mean(definidos)) if definidos else math.nan), por_tarefa


def forgetting(curves: LearningCurve) -> Tuple[float, List[float]]:
    """F_i = p_i(i·T) − p_i(K·T); F é a média sobre as tarefas."""
    K = curves.n_tasks
    final = curves.index_of(curves.boundary(K))
    por_tarefa = [float(curves.values[i, curves.index_of(curves.boundary(i + 1))] - curves.values[i, final])
                  for i in range(K)]
    return float(np.mean(por_tarefa)), por_tarefa


# ================== NORMALIZAÇÃO ENTRE MÉTODOS ==================

def normalize_curves(curves_by_method: Mapping[str, LearningCurve]) -> Dict[str, LearningCurve]:
    """
    Min-max por tarefa com limites tomados sobre as curvas de todos os
    métodos comparados. Tarefas com min = max ficam em zero.
    """
    if not curves_by_method:
        return {}
    curvas = list(curves_by_method.values())
    empilhado = np.stack([c.values for c in curvas])
    minimo = empilhado.min(axis=(0, 2))
    maximo = empilhado.max(axis=(0, 2))
    limites = np.stack([minimo, maximo], axis=1)
    amplitude = np.where(maximo > minimo, maximo - minimo, 1.0)

    normalizadas = {}
    for metodo, curva in curves_by_method.items():
        valores = (curva.values - minimo[:, None]) / amplitude[:, None]
        valores[maximo == minimo] = 0.0
        normalizadas[metodo] = LearningCurve(curva.grid, valores, curva.steps_per_task, limites)
    return normalizadas


def normalize_forgetting_across_methods(forgetting_by_method: Mapping[str, Sequence[float]]) -> Dict[str, List[float]]:
    """Divide F_i pelo desvio padrão de F_i entre os métodos comparados (desvio nulo mantém F_i)."""
    metodos = list(forgetting_by_method)
    matriz = np.array([forgetting_by_method[m] for m in metodos], dtype=float)
    desvio = matriz.std(axis=0)
    escala = np.where(desvio > 0, desvio, 1.0)
    return {m: (matriz[i] / escala).tolist() for i, m in enumerate(metodos)}


# ================== RELATÓRIOS ==================

@dataclass
class MetricReport:
    avg_perf: float
    forgetting: float
    forgetting_per_task: List[float]
    ft: Optional[float] = None
    ft_per_task: List[Optional[float]] = field(default_factory=list)
    normalization: str = "raw"

    def __post_init__(self) -> None:
        if self.normalization not in NORMALIZACOES:
            raise ContractViolation(f"Normalização desconhecida: {self.normalization}.")

    def as_row(self) -> Dict[str, object]:
        return {"avg_perf": self.avg_perf, "ft": "" if self.ft is None else self.ft,
                "forgetting": self.forgetting, "normalization": self.normalization}


def compute_report(avg_curve: LearningCurve, forgetting_curve: LearningCurve,
                   transfer_curve: Optional[LearningCurve] = None,
                   baseline_curve: Optional[LearningCurve] = None) -> MetricReport:
    """
    Avg. Perf e F sobre as curvas indicadas (meta learner no FAME); FT sobre
    a curva de transferência (fast learner) quando há baseline.
    """
    avg = average_performance(avg_curve, avg_curve.boundary(avg_curve.n_tasks))
    f, f_por_tarefa = forgetting(forgetting_curve)
    normalizacao = "minmax" if avg_curve.normalized else "raw"
    if transfer_curve is None or baseline_curve is None:
        return MetricReport(avg, f, f_por_tarefa, normalization=normalizacao)
    ft, ft_por_tarefa = forward_transfer(transfer_curve, baseline_curve)
    return MetricReport(avg, f, f_por_tarefa, ft, ft_por_tarefa, normalizacao)


def warmup_selection_ratio(chosen: Sequence[str]) -> Dict[str, float]:
    """Proporção de escolhas Meta/Fast/Random sobre as decisões fornecidas."""
    contagem = Counter(chosen)
    total = sum(contagem.values())
    return {c: (contagem[c] / total if total else 0.0) for c in ("Meta", "Fast", "Random")}


def summarize_values(method: str, metric: str, values: Sequence[Optional[float]]) -> Optional[Dict[str, object]]:
    """Média e erro padrão de uma métrica entre sementes; None e NaN são ignorados."""
    validos = np.array([v for v in values if v is not None and not math.isnan(v)], dtype=float)
    if validos.size == 0:
        return None
    erro = float(stats.sem(validos)) if validos.size > 1 else 0.0
    return {"method": method, "metric": metric, "mean": float(validos.mean()), "stderr": erro, "n": int(validos.size)}


def summarize_reports(reports_by_method: Mapping[str, Sequence[MetricReport]]) -> List[Dict[str, object]]:
    """Uma linha por (método, métrica): média e erro padrão entre sementes."""
    linhas: List[Dict[str, object]] = []
    for metodo, relatorios in reports_by_method.items():
        for metrica in ("avg_perf", "ft", "forgetting"):
            linha = summarize_values(metodo, metrica, [getattr(r, metrica) for r in relatorios])
            if linha is not None:
                linhas.append(linha)
    return linhas
