#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Testes das métricas de RL contínuo: Avg. Perf, FT e esquecimento.
"""
import logging
import math

import numpy as np
import pytest

from errors import ContractViolation
from metrics import (LearningCurve, MetricReport, average_performance, compute_report, forgetting,
                     forward_transfer, normalize_curves, normalize_forgetting_across_methods,
                     summarize_reports, uniform_grid, warmup_selection_ratio)


def curva_constante(valores_por_tarefa, K=2, T=10, P=2):
    grade = uniform_grid(K, T, P)
    valores = np.array([[v] * grade.size for v in valores_por_tarefa], dtype=float)
    return LearningCurve(grade, valores, T)


def test_grade_uniforme_inclui_fronteiras():
    grade = uniform_grid(3, 100, 4)
    assert grade[0] == 0.0 and grade[-1] == 300.0
    assert {100.0, 200.0} <= set(grade.tolist())


def test_desempenho_medio_na_fronteira():
    curva = curva_constante([0.2, 0.6])
    assert average_performance(curva, 20) == pytest.approx(0.4)


def test_ponto_fora_da_grade_usa_o_anterior(caplog):
    curva = LearningCurve(np.array([0.0, 5.0, 10.0]), np.array([[0.0, 0.5, 1.0]]), 10)
    with caplog.at_level(logging.WARNING):
        assert curva.index_of(7.0) == 1
    assert "fora da grade" in caplog.text


def test_esquecimento_igual_a_queda_apos_a_tarefa():
    grade = uniform_grid(2, 10, 1)   # [0, 10, 20]
    valores = np.array([[0.0, 0.8, 0.3],
                        [0.0, 0.1, 0.9]])
    f, por_tarefa = forgetting(LearningCurve(grade, valores, 10))
    assert por_tarefa == pytest.approx([0.5, 0.0])
    assert f == pytest.approx(0.25)


def test_ft_positivo_quando_aprende_mais_rapido():
    grade = uniform_grid(1, 10, 2)   # [0, 5, 10]
    rapida = LearningCurve(grade, np.array([[0.0, 1.0, 1.0]]), 10)
    base = LearningCurve(grade, np.array([[0.0, 0.0, 1.0]]), 10)
    ft, por_tarefa = forward_transfer(rapida, base)
    # AUC = 0.75 e AUC_b = 0.25
    assert por_tarefa[0] == pytest.approx((0.75 - 0.25) / 0.75)
    assert ft == pytest.approx(por_tarefa[0])


def test_ft_indefinido_quando_baseline_ja_e_perfeito():
    perfeita = curva_constante([1.0, 0.5])
    ft, por_tarefa = forward_transfer(perfeita, perfeita)
    assert por_tarefa[0] is None
    assert ft == pytest.approx(0.0)


def test_ft_exige_curvas_normalizadas():
    bruta = curva_constante([3.0, 0.5])
    with pytest.raises(ContractViolation):
        forward_transfer(bruta, bruta)


def test_normalizacao_conjunta_por_tarefa():
    grade = uniform_grid(1, 10, 1)
    a = LearningCurve(grade, np.array([[2.0, 4.0]]), 10)
    b = LearningCurve(grade, np.array([[0.0, 3.0]]), 10)
    normalizadas = normalize_curves({"a": a, "b": b})
    assert np.allclose(normalizadas["a"].values, [[0.5, 1.0]])
    assert np.allclose(normalizadas["b"].values, [[0.0, 0.75]])
    assert normalizadas["a"].normalized


def test_tarefa_plana_normaliza_para_zero():
    plana = curva_constante([0.7, 0.7])
    normalizada = normalize_curves({"x": plana})["x"]
    assert np.all(normalizada.values == 0.0)


def test_grade_nao_crescente_e_rejeitada():
    with pytest.raises(ContractViolation):
        LearningCurve(np.array([0.0, 0.0]), np.array([[1.0, 1.0]]), 1)


def test_relatorio_com_e_sem_baseline():
    curva = curva_constante([0.5, 0.5])
    sem = compute_report(curva, curva)
    assert sem.ft is None and sem.normalization == "raw"
    base = curva_constante([0.0, 0.0])
    com = compute_report(curva, curva, curva, base)
    assert com.ft == pytest.approx(0.5)


def test_forgetting_normalizado_entre_metodos():
    escalado = normalize_forgetting_across_methods({"a": [1.0, 0.0], "b": [3.0, 0.0]})
    assert escalado["a"][0] == pytest.approx(1.0)
    assert escalado["b"][0] == pytest.approx(3.0)
    assert escalado["a"][1] == 0.0


def test_proporcao_de_escolhas():
    proporcao = warmup_selection_ratio(["Meta", "Fast", "Meta", "Random"])
    assert proporcao == {"Meta": 0.5, "Fast": 0.25, "Random": 0.25}


def test_resumo_entre_sementes():
    relatorios = [MetricReport(0.4, 0.1, [0.1]), MetricReport(0.6, 0.3, [0.3], ft=0.2)]
    linhas = {(l["method"], l["metric"]): l for l in summarize_reports({"FAME-Q": relatorios})}
    assert linhas[("FAME-Q", "avg_perf")]["mean"] == pytest.approx(0.5)
    assert linhas[("FAME-Q", "avg_perf")]["stderr"] == pytest.approx(0.1)
    assert linhas[("FAME-Q", "ft")]["n"] == 1
    assert not math.isnan(linhas[("FAME-Q", "forgetting")]["mean"])


def test_ft_de_uma_curva_contra_ela_mesma_e_zero():
    grade = uniform_grid(2, 10, 2)
    valores = np.array([[0.0, 0.3, 0.9, 0.6, 0.5],
                        [0.1, 0.1, 0.2, 0.4, 0.8]])
    curva = LearningCurve(grade, valores, 10)
    ft, por_tarefa = forward_transfer(curva, curva)
    assert ft == 0.0
    assert por_tarefa == [0.0, 0.0]
