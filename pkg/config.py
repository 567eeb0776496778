# -*- coding: utf-8 -*-
"""
Configurações globais do laboratório de RL contínuo.
Valores padrão dos hiperparâmetros do dual learner e dos geradores de tarefas.
"""

from __future__ import annotations

from typing import Tuple

# ================== MÉTODOS DISPONÍVEIS ==================
METODOS_POR_VALOR: Tuple[str, ...] = ("FAME-Q", "Reset", "Finetune")
METODOS_POR_POLITICA: Tuple[str, ...] = ("FAME-KL", "FAME-WD", "Reset", "Finetune")
METODOS: Tuple[str, ...] = ("FAME-Q", "FAME-KL", "FAME-WD", "Reset", "Finetune")
INTEGRACOES_POR_VALOR: Tuple[str, ...] = ("kl", "l2")

# ================== HIPERPARÂMETROS DO FAME ==================
BC_LAMBDA_PADRAO = 1.0
FRACAO_BC_STEPS = 0.10          # L = 10% de T
FRACAO_META_BUFFER = 0.02       # N = 2% de T
TEMPERATURA_PADRAO = 1.0        # τ
EPISODIOS_AVALIACAO_WARMUP = 20
HORIZONTE_AVALIACAO_WARMUP = 10  # 3 candidatos x 20 episódios x 10 passos = 600 passos
ALPHA_TESTE = 0.05
MODOS_WARMUP: Tuple[str, ...] = ("empirical-ranking", "strict-test")
MODO_WARMUP_PADRAO = "empirical-ranking"

# ================== CONSTANTES NUMÉRICAS ==================
EPSILON_SUAVIZACAO_META = 1e-3  # massa uniforme misturada em π^M
EPSILON_KL = 1e-8               # piso de probabilidade no KL categórico
SIGMA_MIN = 1e-3
SIGMA_MAX = 2.0
TOLERANCIA_SOMA = 1e-10
TOLERANCIA_LINHA_ESTOCASTICA = 1e-12

# ================== APRENDIZ RÁPIDO ==================
TAXA_APRENDIZADO_Q = 0.5
TAXA_APRENDIZADO_POLITICA = 0.05
EPSILON_INICIAL = 1.0
EPSILON_FINAL = 0.05
FRACAO_DECAIMENTO_EPSILON = 0.5
REPLAY_BATCH = 4
CAPACIDADE_FAST_BUFFER = 10_000
EPISODIOS_POR_ATUALIZACAO = 4
PASSO_BASELINE_MIN = 0.05

# ================== CURVAS DE AVALIAÇÃO ==================
PONTOS_POR_TAREFA = 50
EPISODIOS_POR_PONTO = 10
HORIZONTE_EPISODIO = 50

# ================== GERADORES ==================
LADO_MAXIMO_GRID = 12
TENTATIVAS_GERACAO = 50
DELTAS_GRID: Tuple[Tuple[int, int], ...] = ((-1, 0), (0, 1), (1, 0), (0, -1))
