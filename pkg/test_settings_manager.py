#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Testes da leitura do settings.ini e da conversão para RunConfig.
"""
import pytest

import settings_manager
from errors import ConfigError


def test_arquivo_ausente_e_criado_com_padroes(tmp_path):
    caminho = tmp_path / "settings.ini"
    cp = settings_manager.carregar_configuracoes(caminho)
    assert caminho.exists()
    assert settings_manager.obter_configuracao(cp, 'Geral', 'metodo') == 'FAME-Q'
    assert settings_manager.obter_configuracao(cp, 'Geral', 'inexistente') is None


def test_padroes_geram_run_config_valido(tmp_path):
    cp = settings_manager.carregar_configuracoes(tmp_path / "settings.ini")
    cfg = settings_manager.montar_run_config(cp)
    T = cfg.sequence.steps_per_task
    assert cfg.method == "FAME-Q" and cfg.sequence.n_tasks == 3
    assert cfg.learner.bc_steps == round(0.1 * T)
    assert cfg.tail_size == round(0.02 * T)
    assert [t.seed for t in cfg.sequence.tasks] == [1, 2, 1]


def test_sobrescritas_da_linha_de_comando(tmp_path):
    cp = settings_manager.carregar_configuracoes(tmp_path / "settings.ini")
    cfg = settings_manager.montar_run_config(cp, seed=7, method="Reset", output=str(tmp_path / "out"))
    assert (cfg.seed, cfg.method) == (7, "Reset")
    assert cfg.output_dir.endswith("out")


def test_chaves_salvas_sao_relidas(tmp_path):
    caminho = tmp_path / "settings.ini"
    cp = settings_manager.carregar_configuracoes(caminho)
    cp.set('Sequencia', 'tipo', 'lista')
    cp.set('Sequencia', 'sementes', '3, 4, 5, 3')
    settings_manager.salvar_configuracoes(cp, caminho)
    cfg = settings_manager.montar_run_config(settings_manager.carregar_configuracoes(caminho))
    assert [t.seed for t in cfg.sequence.tasks] == [3, 4, 5, 3]


def test_ramo_por_politica(tmp_path):
    cp = settings_manager.carregar_configuracoes(tmp_path / "settings.ini")
    cp.set('Sequencia', 'gerador', 'pointmass')
    cfg = settings_manager.montar_run_config(cp, method="FAME-WD")
    assert not cfg.value_based


@pytest.mark.parametrize("secao,chave,valor", [
    ('Sequencia', 'gerador', 'labirinto'),
    ('Sequencia', 'tipo', 'circular'),
    ('FAME', 'fracao_bc', 'muito'),
    ('FAME', 'modo_warmup', 'votacao'),
    ('Geral', 'metodo', 'FAME-KL'),
])
def test_valores_invalidos_viram_config_error(tmp_path, secao, chave, valor):
    cp = settings_manager.carregar_configuracoes(tmp_path / "settings.ini")
    cp.set(secao, chave, valor)
    with pytest.raises(ConfigError):
        settings_manager.montar_run_config(cp)


def test_padroes_de_avaliacao_e_recompensa(tmp_path):
    cfg = settings_manager.montar_run_config(settings_manager.carregar_configuracoes(tmp_path / "settings.ini"))
    assert (cfg.n_eval, cfg.eval_horizon) == (20, 10)
    assert cfg.sequence.tasks[0].spec.goal_reward == 100.0


def test_secao_de_ablacao(tmp_path):
    cp = settings_manager.carregar_configuracoes(tmp_path / "settings.ini")
    assert settings_manager.ler_ablacao(cp) == ("n_eval", (5.0, 10.0, 20.0), (0, 1, 2))
    cp.set('Ablacao', 'parametro', 'tail_size')
    cp.set('Ablacao', 'valores', '10; 40')
    assert settings_manager.ler_ablacao(cp)[:2] == ("tail_size", (10.0, 40.0))


@pytest.mark.parametrize("chave,valor", [('parametro', 'gamma'), ('valores', 'dez'), ('sementes', '')])
def test_ablacao_invalida_vira_config_error(tmp_path, chave, valor):
    cp = settings_manager.carregar_configuracoes(tmp_path / "settings.ini")
    cp.set('Ablacao', chave, valor)
    with pytest.raises(ConfigError):
        settings_manager.ler_ablacao(cp)
