"""Вычислительные сервисы: вероятностное ядро, достаточность, кодирование, примеры."""
