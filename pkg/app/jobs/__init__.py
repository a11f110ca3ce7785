"""Пакет для самостоятельных прогонов (встроенный selftest)."""
