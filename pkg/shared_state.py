# -*- coding: utf-8 -*-
"""
Estado compartilhado da aplicação: a flag de cancelamento definida pelo
CTRL+C e verificada pelo executor ao fim de cada tarefa.
"""
CANCELAR_PROCESSAMENTO = False


def solicitar_cancelamento(*_args) -> None:
    """Handler de SIGINT: pede a interrupção limpa da execução em andamento."""
    global CANCELAR_PROCESSAMENTO
    if CANCELAR_PROCESSAMENTO:
        raise KeyboardInterrupt
    CANCELAR_PROCESSAMENTO = True
    print("\n⚠️ Interrupção solicitada: a execução para ao fim da tarefa atual (CTRL+C de novo para sair já).")


def reiniciar_cancelamento() -> None:
    global CANCELAR_PROCESSAMENTO
    CANCELAR_PROCESSAMENTO = False
