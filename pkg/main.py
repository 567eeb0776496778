# -*- coding: utf-8 -*-
"""
Ponto de entrada principal do laboratório FAME.
Com um verbo (run, oracle-check, metrics, dump-buffer, ablation) executa a
tarefa pela linha de comando; sem verbo abre o menu interativo.
"""
import argparse
import asyncio
import logging
import signal
import sys
from typing import List, Optional

import aioconsole

import cli_ui
import harness
import settings_manager
import shared_state
from errors import ContractViolation
from oracles import SUITES

logging.basicConfig(level=logging.INFO, format='%(levelname)s: %(message)s')


# ================== VERBOS ==================

def comando_run(args: argparse.Namespace) -> int:
    cp = settings_manager.carregar_configuracoes(args.config)
    cfg = settings_manager.montar_run_config(cp, seed=args.seed, method=args.method, output=args.output)
    checkpoint = args.checkpoint or args.resume or cfg.checkpoint
    cfg = harness.replace(cfg, checkpoint=checkpoint, resume=args.resume, show_progress=True)
    registro = cli_ui.executar_com_baseline(cfg, args.baseline)
    cli_ui.imprimir_registro(registro)
    if registro.cancelled:
        return 130
    print(f"✅ Resultados gravados em '{cfg.output_dir}'.")
    return 0


def comando_oracle(args: argparse.Namespace) -> int:
    resultados = harness.oracle_check(args.suite, args.instancias, args.semente)
    for resultado in resultados:
        print(resultado.resumo())
    return 0 if all(r.passed for r in resultados) else 1


def comando_metrics(args: argparse.Namespace) -> int:
    linhas = harness.aggregate_results(args.diretorio)
    for linha in linhas:
        print(f"{linha['method']:<10} {linha['metric']:<11} {linha['mean']:.4f} ± {linha['stderr']:.4f} (n={linha['n']})")
    print(f"✅ report.csv e summary_table.csv gravados em '{args.diretorio}'.")
    return 0


def comando_dump(args: argparse.Namespace) -> int:
    n = harness.dump_buffer(args.checkpoint, args.csv)
    print(f"✅ {n} registros do meta buffer gravados em '{args.csv}'.")
    return 0


def comando_ablation(args: argparse.Namespace) -> int:
    cp = settings_manager.carregar_configuracoes(args.config)
    cfg = settings_manager.montar_run_config(cp, method=args.method, output=args.output)
    parametro, valores, sementes = settings_manager.ler_ablacao(cp)
    linhas = harness.run_ablation(cfg, args.parametro or parametro, args.valores or valores, args.sementes or sementes)
    for linha in linhas:
        print(f"{linha['parameter']}={linha['value']:<8} {linha['metric']:<11} {linha['mean']:.4f} ± {linha['stderr']:.4f}")
    return 0


def construir_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Laboratório de RL contínuo com dual learner (FAME).")
    sub = parser.add_subparsers(dest="verbo")

    run = sub.add_parser("run", help="Executa uma sequência de tarefas.")
    run.add_argument("--config", default=settings_manager.SETTINGS_FILE, help="Arquivo INI da execução.")
    run.add_argument("--seed", type=int, default=None, help="Sobrescreve [Geral] semente.")
    run.add_argument("--method", default=None, help="Sobrescreve [Geral] metodo.")
    run.add_argument("--output", default=None, help="Diretório de saída (sobrescreve [Geral] saida).")
    run.add_argument("--baseline", action="store_true", help="Roda também o Reset para calcular o FT.")
    run.add_argument("--checkpoint", action="store_true", help="Grava checkpoints .npz por tarefa.")
    run.add_argument("--resume", action="store_true",
                     help="Retoma a partir do último checkpoint da execução (implica --checkpoint).")
    run.set_defaults(func=comando_run)

    oraculo = sub.add_parser("oracle-check", help="Verifica as regras de integração contra oráculos.")
    oraculo.add_argument("suite", choices=[*SUITES, "all"])
    oraculo.add_argument("--instancias", type=int, default=100)
    oraculo.add_argument("--semente", type=int, default=0)
    oraculo.set_defaults(func=comando_oracle)

    metricas = sub.add_parser("metrics", help="Agrega os CSVs de um diretório num relatório.")
    metricas.add_argument("diretorio")
    metricas.set_defaults(func=comando_metrics)

    dump = sub.add_parser("dump-buffer", help="Exporta o meta buffer de um checkpoint para CSV.")
    dump.add_argument("checkpoint")
    dump.add_argument("csv")
    dump.set_defaults(func=comando_dump)

    ablacao = sub.add_parser("ablation", help="Varre L, N, λ ou n_eval sobre várias sementes ([Ablacao] do INI).")
    ablacao.add_argument("--config", default=settings_manager.SETTINGS_FILE)
    ablacao.add_argument("--method", default=None)
    ablacao.add_argument("--output", default=None)
    ablacao.add_argument("--parametro", default=None, choices=harness.PARAMETROS_ABLACAO)
    ablacao.add_argument("--valores", type=float, nargs="+", default=None)
    ablacao.add_argument("--sementes", type=int, nargs="+", default=None)
    ablacao.set_defaults(func=comando_ablation)
    return parser


# ================== MENU INTERATIVO ==================

async def main_loop():
    """O loop principal que exibe o menu e direciona para as funções corretas."""
    opcoes_principais = {
        '1': "🚀 RODAR EXPERIMENTO",
        '2': "🔎 VERIFICAR ORÁCULOS",
        '3': "📊 AGREGAR MÉTRICAS",
        '4': "💾 EXPORTAR META BUFFER",
        '5': "⚙️ CONFIGURAÇÕES",
        '6': "❓ AJUDA",
        '0': "🚪 SAIR"
    }
    acoes = {
        1: cli_ui.iniciar_experimento, 2: cli_ui.verificar_oraculos, 3: cli_ui.agregar_metricas,
        4: cli_ui.exportar_meta_buffer, 5: cli_ui.menu_gerenciar_configuracoes, 6: cli_ui.exibir_ajuda,
    }

    while True:
        shared_state.reiniciar_cancelamento()
        try:
            escolha = await cli_ui.exibir_banner_e_menu("MENU PRINCIPAL", opcoes_principais)
            if escolha == 0:
                print("\n👋 Até a próxima!")
                break
            if escolha in acoes:
                await acoes[escolha]()
        except asyncio.CancelledError:
            print("\n🚫 Operação cancelada no menu. A voltar...")
            await asyncio.sleep(1)
        except Exception as e_main:
            print(f"\n❌ Ocorreu um erro inesperado no loop principal: {e_main}")
            logging.exception("Erro no loop principal")
            await aioconsole.ainput("Pressione ENTER para tentar continuar...")


def main(argv: Optional[List[str]] = None) -> int:
    args = construir_parser().parse_args(argv)
    signal.signal(signal.SIGINT, shared_state.solicitar_cancelamento)
    shared_state.reiniciar_cancelamento()

    if args.verbo is None:
        try:
            asyncio.run(main_loop())
        except KeyboardInterrupt:
            print("\n\n⚠️ Programa interrompido.")
        return 0

    try:
        return args.func(args)
    except ContractViolation as e:
        print(f"❌ {e}")
        return 1
    except FileNotFoundError as e:
        print(f"❌ Arquivo não encontrado: {e.filename or e}")
        return 1
    except KeyboardInterrupt:
        print("\n\n⚠️ Programa interrompido.")
        return 130


if __name__ == "__main__":
    sys.exit(main())
