"""Пакет Sufficiency Workbench.

Логика разнесена по модулям:
- app.config: конфигурация (LOG_LEVEL, SENTRY_DSN, пороги и допуски)
- app.main: точка входа CLI
- app.handlers: подкоманды
- app.services: вычисления
"""
