#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Testes de nomes de arquivo, CSV e checkpoints.
"""
import numpy as np

from file_handlers import carregar_checkpoint, ler_csv, limpar_nome_arquivo, salvar_checkpoint, salvar_csv


def test_limpar_nome_arquivo():
    assert limpar_nome_arquivo("Relatório: FAME/Q.csv") == "Relatorio_FAMEQ.csv"
    assert limpar_nome_arquivo("FAME-Q_seed0") == "FAME-Q_seed0"


def test_csv_ignora_colunas_extras_e_preenche_ausentes(tmp_path):
    caminho = salvar_csv(tmp_path / "sub" / "x.csv", ("a", "b"), [{"a": 1, "c": 9}, {"a": 2, "b": 0.5}])
    linhas = ler_csv(caminho)
    assert linhas == [{"a": "1", "b": ""}, {"a": "2", "b": "0.5"}]
    assert not [p for p in caminho.parent.iterdir() if p.name.startswith(".")]


def test_checkpoint_ganha_extensao_npz(tmp_path):
    caminho = salvar_checkpoint(tmp_path / "estado", {"q": np.arange(6.0).reshape(2, 3)})
    assert caminho.suffix == ".npz"
    dados = carregar_checkpoint(caminho)
    assert np.array_equal(dados["q"], np.arange(6.0).reshape(2, 3))
