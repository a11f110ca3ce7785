"""Подкоманды CLI.

Роутеры импортируются напрямую в app.main:
- from app.handlers.discrete import router as discrete_router
- from app.handlers.coding import router as coding_router
"""
