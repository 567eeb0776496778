# -*- coding: utf-8 -*-
"""
Módulo da Interface de Utilizador de Linha de Comando (CLI-UI).
Menus interativos para rodar experimentos, verificar oráculos, agregar
métricas, exportar o meta buffer e editar o settings.ini.
"""
import asyncio
import os
from pathlib import Path

import aioconsole

import config
import harness
import settings_manager
import shared_state
from errors import ContractViolation
from oracles import SUITES

# ================== FUNÇÕES GENÉRICAS DE UI ==================

def limpar_tela():
    """Limpa a tela do terminal."""
    os.system('cls' if os.name == 'nt' else 'clear')

async def obter_opcao_numerica(prompt: str, num_max: int, permitir_zero=False) -> int:
    """Pede ao utilizador para digitar uma opção numérica válida."""
    min_val = 0 if permitir_zero else 1
    while True:
        try:
            escolha_str = await aioconsole.ainput(f"{prompt} [{min_val}-{num_max}]: ")
            if shared_state.CANCELAR_PROCESSAMENTO: return -1
            escolha = int(escolha_str)
            if min_val <= escolha <= num_max:
                return escolha
            print(f"⚠️ Opção inválida. Escolha um número entre {min_val} e {num_max}.")
        except (ValueError, asyncio.CancelledError):
            print("⚠️ Entrada inválida ou operação cancelada.")
            return -1

async def obter_confirmacao(prompt: str, default_yes=True) -> bool:
    """Pede ao utilizador uma confirmação (Sim/Não)."""
    opcoes_prompt = "(S/n)" if default_yes else "(s/N)"
    while True:
        try:
            resposta = await aioconsole.ainput(f"{prompt} {opcoes_prompt}: ")
            if shared_state.CANCELAR_PROCESSAMENTO: return False
            resposta = resposta.strip().lower()
            if not resposta: return default_yes
            if resposta in ['s', 'sim']: return True
            if resposta in ['n', 'nao', 'não']: return False
            print("⚠️ Resposta inválida. Digite 's' ou 'n'.")
        except asyncio.CancelledError:
            shared_state.CANCELAR_PROCESSAMENTO = True
            return False

async def obter_texto(prompt: str, padrao: str = "") -> str:
    resposta = await aioconsole.ainput(f"{prompt}" + (f" [{padrao}]" if padrao else "") + ": ")
    return resposta.strip() or padrao

async def exibir_banner_e_menu(titulo_menu: str, opcoes_menu: dict) -> int:
    """Exibe o banner do programa e um menu de opções (assíncrono)."""
    limpar_tela()
    largura_banner = 46
    titulo_app = "LABORATÓRIO FAME"
    subtitulo_app = "RL contínuo com dual learner"
    print("╔" + "═" * largura_banner + "╗")
    print(f"║{titulo_app.center(largura_banner)}║")
    print(f"║{subtitulo_app.center(largura_banner)}║")
    print("╚" + "═" * largura_banner + "╝")
    print(f"\n--- {titulo_menu.upper()} ---")
    num_opcoes = max([int(k) for k in opcoes_menu.keys() if k.isdigit()], default=0)
    for num, desc in opcoes_menu.items():
        print(f"{num}. {desc}")
    return await obter_opcao_numerica("Escolha uma opção", num_opcoes, permitir_zero=True)

async def _pausar(mensagem: str = "\nPressione ENTER para voltar ao menu..."):
    await aioconsole.ainput(mensagem)

# ================== RELATÓRIOS ==================

def imprimir_registro(registro: harness.RunRecord) -> None:
    """Resumo de uma execução: decisões de warm-up e métricas."""
    print(f"\n📊 Execução {registro.run_id}")
    for k, decisao in enumerate(registro.decisions):
        cf = registro.cf_fast[k]
        texto_cf = f", CF fast = {cf:.4f}" if cf is not None else ""
        print(f"  Tarefa {k} (ambiente {registro.env_seeds[k]}): warm-up {decisao.chosen}"
              f"{' + BC' if decisao.bc_enabled else ''}, {registro.eval_steps[k]} passos de avaliação{texto_cf}")
    if registro.cancelled:
        print("⚠️ Execução interrompida: métricas não calculadas.")
        return
    rel = registro.report
    ft = f"{rel.ft:.3f}" if rel.ft is not None else "n/d"
    print(f"  Avg. Perf = {rel.avg_perf:.3f} | FT = {ft} | Forgetting = {rel.forgetting:.3f}")

def executar_com_baseline(cfg: harness.RunConfig, com_baseline: bool) -> harness.RunRecord:
    """Roda o método e, se pedido, o Reset com a mesma semente para o FT."""
    registro = harness.run_sequence(cfg)
    if com_baseline and not registro.cancelled and cfg.method != "Reset":
        base = harness.run_sequence(harness.replace(cfg, method="Reset"))
        if not base.cancelled:
            harness.attach_baseline(registro, base)
            if cfg.output_dir:
                harness.write_run_outputs(registro, cfg.output_dir)
    return registro

# ================== FLUXOS DO MENU ==================

async def iniciar_experimento():
    """Roda um experimento a partir do settings.ini, com método e semente escolhidos."""
    try:
        cp = settings_manager.carregar_configuracoes()
        gerador = cp.get('Sequencia', 'gerador')
        metodos = config.METODOS_POR_VALOR if gerador == 'gridworld' else config.METODOS_POR_POLITICA
        opcoes = {str(i + 1): m for i, m in enumerate(metodos)}
        opcoes['0'] = "Voltar"
        escolha = await exibir_banner_e_menu(f"MÉTODO ({gerador})", opcoes)
        if escolha <= 0:
            return
        semente = int(await obter_texto("Semente", cp.get('Geral', 'semente')))
        com_baseline = await obter_confirmacao("Rodar também o Reset para calcular o FT?")
        cfg = settings_manager.montar_run_config(cp, seed=semente, method=metodos[escolha - 1])
        cfg = harness.replace(cfg, show_progress=True)
        print(f"\n🚀 A executar {cfg.method} com semente {cfg.seed}... (CTRL+C interrompe ao fim da tarefa)")
        registro = await asyncio.to_thread(executar_com_baseline, cfg, com_baseline)
        imprimir_registro(registro)
        print(f"✅ Resultados em '{cfg.output_dir}'.")
    except (ContractViolation, ValueError) as e:
        print(f"❌ {e}")
    await _pausar()

async def verificar_oraculos():
    opcoes = {str(i + 1): nome for i, nome in enumerate(SUITES)}
    opcoes[str(len(SUITES) + 1)] = "todas"
    opcoes['0'] = "Voltar"
    escolha = await exibir_banner_e_menu("ORÁCULOS", opcoes)
    if escolha <= 0:
        return
    suite = "all" if escolha == len(SUITES) + 1 else list(SUITES)[escolha - 1]
    print("\n🔎 A verificar...")
    resultados = await asyncio.to_thread(harness.oracle_check, suite)
    for resultado in resultados:
        print(resultado.resumo())
    await _pausar()

async def agregar_metricas():
    cp = settings_manager.carregar_configuracoes()
    diretorio = await obter_texto("Diretório de resultados", cp.get('Geral', 'saida'))
    try:
        linhas = await asyncio.to_thread(harness.aggregate_results, diretorio)
        for linha in linhas:
            print(f"  {linha['method']:<10} {linha['metric']:<11} {linha['mean']:.3f} ± {linha['stderr']:.3f} (n={linha['n']})")
        print(f"✅ report.csv e summary_table.csv gravados em '{diretorio}'.")
    except (ContractViolation, FileNotFoundError) as e:
        print(f"❌ {e}")
    await _pausar()

async def exportar_meta_buffer():
    checkpoint = await obter_texto("Checkpoint (.npz)")
    destino = await obter_texto("CSV de saída", str(Path(checkpoint).with_suffix('.csv')))
    try:
        n = harness.dump_buffer(checkpoint, destino)
        print(f"✅ {n} registros gravados em '{destino}'.")
    except (OSError, KeyError, ValueError) as e:
        print(f"❌ Não foi possível ler o checkpoint: {e}")
    await _pausar()

async def menu_gerenciar_configuracoes():
    """Edita as chaves mais usadas do settings.ini."""
    cp = settings_manager.carregar_configuracoes()
    editaveis = [
        ('Geral', 'metodo'), ('Geral', 'semente'), ('Geral', 'saida'),
        ('Sequencia', 'gerador'), ('Sequencia', 'sementes'), ('Sequencia', 'passos_por_tarefa'),
        ('FAME', 'modo_warmup'), ('FAME', 'integracao_valor'),
    ]
    while True:
        opcoes = {str(i + 1): f"{sec}.{chave} = {cp.get(sec, chave)}" for i, (sec, chave) in enumerate(editaveis)}
        opcoes['0'] = "Salvar e voltar"
        escolha = await exibir_banner_e_menu("CONFIGURAÇÕES", opcoes)
        if escolha <= 0:
            break
        sec, chave = editaveis[escolha - 1]
        cp.set(sec, chave, await obter_texto(f"Novo valor de {sec}.{chave}", cp.get(sec, chave)))
    try:
        settings_manager.montar_run_config(cp)
        settings_manager.salvar_configuracoes(cp)
        print("✅ Configurações salvas com sucesso!")
    except ContractViolation as e:
        print(f"❌ Configuração inválida, nada foi salvo: {e}")
    await _pausar()

async def exibir_ajuda():
    limpar_tela()
    print("""
--- AJUDA ---
1. Experimento: lê o settings.ini e roda FAME ou um baseline sobre a sequência
   configurada; grava *_curves.csv, *_decisions.csv e *_report.csv.
2. Oráculos: compara as regras de integração com soluções em lote/numéricas.
3. Métricas: agrega os CSVs de um diretório em report.csv e summary_table.csv.
4. Meta buffer: exporta o meta buffer de um checkpoint .npz para CSV.
5. Configurações: edita o settings.ini.

Pela linha de comando:
  python main.py run --config settings.ini --seed 0 --method FAME-Q --output resultados --baseline
  python main.py oracle-check l2
  python main.py metrics resultados
  python main.py dump-buffer resultados/checkpoints/FAME-Q_seed0_task2.npz buffer.csv
  python main.py ablation --parametro bc_steps --valores 0 100 200 --sementes 0 1 2
""")
    await _pausar()
